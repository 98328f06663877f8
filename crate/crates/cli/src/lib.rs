//! `epindex` command-line front end.
//!
//! Every subcommand produces an [`AnalysisReport`]: a metadata block that
//! echoes the arguments, resolved parameters and input digests, plus one body.
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numeric failure.

pub mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use epindex_core::aggregation::{aggregate, join_economy, AggregationError, CountryProfile, CountryYearJoin};
use epindex_core::analysis::{
    self, correlate_countries, coverage, efficiency_map, patent_filter, patent_partition, share_table,
    split_by_gdp_pc, timeseries, top_range_subset, AnalysisError, Attribute, Band, Indicator, PatentFilterParams,
    Weight,
};
use epindex_core::ingest::{
    load_bibliometrics, load_economy, load_patents, CountryNameMap, Counting, EconomyRecord, IngestError,
    InstitutionRecord, PatentRecord, Period,
};
use epindex_core::percentile_model::{expected_events, fit_ep, prob_top, EpEstimate, ModelError, PercentileProfile};
use epindex_core::simulate::{run_sim, SimConfig, SimError};
use epindex_core::stats::{CorrelationMethod, StatsError};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use report::{
    render, AnalysisReport, CorrelationReport, Expectation, FitReport, Format, IndicatorRow, InputDigest, Metadata,
    PartitionRow, RenderError, ReportBody,
};

pub const TOOL_NAME: &str = "epindex";
pub const DEFAULT_FIELD: &str = "Physical sciences and engineering";

#[derive(Debug, Parser, Serialize)]
#[command(name = "epindex", version, about = "Percentile power-law research indicators by country")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct CommonArgs {
    /// Institution-level bibliometrics CSV
    #[arg(long, global = true)]
    pub bibliometrics: Option<PathBuf>,
    /// Economy CSV (GDP, population, GDP per capita)
    #[arg(long, global = true)]
    pub economy: Option<PathBuf>,
    /// Triadic patent families CSV
    #[arg(long, global = true)]
    pub patents: Option<PathBuf>,
    /// Extra `source_name,iso3` table merged into the built-in one
    #[arg(long, global = true)]
    pub names: Option<PathBuf>,
    /// Publication period, e.g. 2016-2019
    #[arg(long, global = true)]
    pub period: Option<Period>,
    /// Economy and patent year (default: last year of the period minus one)
    #[arg(long, global = true)]
    pub year: Option<i32>,
    #[arg(long, global = true, default_value = DEFAULT_FIELD)]
    pub field: String,
    #[arg(long, global = true, default_value = "fractional")]
    pub counting: Counting,
    /// Countries left out of the analysis (names or ISO codes, comma separated)
    #[arg(long, global = true, value_delimiter = ',')]
    pub exclude: Vec<String>,
    #[arg(long, global = true, default_value = "json")]
    pub format: Format,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

/// Selection of one indicator or all five.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndicatorSel {
    All,
    One(Indicator),
}

impl std::str::FromStr for IndicatorSel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(IndicatorSel::All)
        } else {
            s.parse().map(IndicatorSel::One)
        }
    }
}

impl IndicatorSel {
    fn list(self) -> Vec<Indicator> {
        match self {
            IndicatorSel::All => Indicator::ALL.to_vec(),
            IndicatorSel::One(i) => vec![i],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightSel {
    All,
    One(Weight),
}

impl std::str::FromStr for WeightSel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(WeightSel::All)
        } else {
            s.parse().map(WeightSel::One)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GdpPcBand {
    Low,
    High,
}

impl std::str::FromStr for GdpPcBand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(GdpPcBand::Low),
            "high" => Ok(GdpPcBand::High),
            other => Err(format!("expected low or high, got {other:?}")),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PatentFilterArgs {
    /// Latest-year patent families must exceed this
    #[arg(long, default_value_t = 10.0)]
    pub min_families: f64,
    /// Trailing years checked for stability
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Largest accepted residual dispersion around the regression line
    #[arg(long, default_value_t = 0.25)]
    pub max_dispersion: f64,
    /// Use every country with patent data, unscreened
    #[arg(long)]
    pub no_patent_filter: bool,
}

impl PatentFilterArgs {
    fn params(&self) -> PatentFilterParams {
        PatentFilterParams {
            min_families: self.min_families,
            window: self.window,
            max_dispersion: self.max_dispersion,
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Country profiles with e_p and extrapolated top-percentile counts
    Indicators {
        /// Also fit e_p from the reported percentile counts
        #[arg(long)]
        fit: bool,
    },
    /// Countries that together hold a share of an indicator's total
    Share {
        /// p, p_top10, p_top1, p_top01, p_top001 or all
        #[arg(long, default_value = "all")]
        indicator: IndicatorSel,
        #[arg(long, default_value_t = analysis::DEFAULT_SHARE_THRESHOLD)]
        threshold: f64,
    },
    /// Population or GDP share of the countries in a share table
    Coverage {
        #[arg(long, default_value = "all")]
        indicator: IndicatorSel,
        /// population, gdp or all
        #[arg(long, default_value = "all")]
        weight: WeightSel,
        #[arg(long, default_value_t = analysis::DEFAULT_SHARE_THRESHOLD)]
        threshold: f64,
    },
    /// Correlation between two country attributes
    Correlate {
        #[arg(long)]
        x: Attribute,
        #[arg(long)]
        y: Attribute,
        #[arg(long, default_value = "pearson")]
        method: CorrelationMethod,
        /// Restrict to countries within --range-ratio of the top value of this indicator
        #[arg(long)]
        top_range: Option<Indicator>,
        #[arg(long, default_value_t = 10.0)]
        range_ratio: f64,
        /// Cap on the number of countries in the top-range subset
        #[arg(long)]
        range_limit: Option<usize>,
        /// Restrict to countries below (low) or above (high) --gdp-pc-cut
        #[arg(long)]
        gdp_pc_band: Option<GdpPcBand>,
        #[arg(long, default_value_t = analysis::DEFAULT_GDP_PC_CUT)]
        gdp_pc_cut: f64,
        /// Emit the scatter points (csv/md) instead of the summary
        #[arg(long)]
        dump_points: bool,
    },
    /// Classify countries by patent families per billion US$ of GDP
    Partition {
        #[arg(long, default_value = "0.8,3.8")]
        high_band: Band,
        #[arg(long, default_value = "0.1,0.6")]
        low_band: Band,
        #[command(flatten)]
        filter: PatentFilterArgs,
    },
    /// P_top10%/P against patent families per billion US$ of GDP
    Map {
        #[command(flatten)]
        filter: PatentFilterArgs,
    },
    /// P and P_top10%/P of one country across all periods
    Timeseries {
        #[arg(long)]
        country: String,
    },
    /// Expected frequency of top-x% papers for a given output and e_p
    Expect {
        #[arg(long)]
        annual_papers: f64,
        #[arg(long)]
        ep: f64,
        #[arg(long)]
        x: f64,
    },
    /// Monte Carlo check of the percentile law
    Simulate {
        #[arg(long)]
        ep: f64,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        /// Percentiles to count (comma separated)
        #[arg(long, value_delimiter = ',', default_value = "10,1,0.1")]
        x: Vec<f64>,
        /// Number of consecutive seeds starting at --seed
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Fit e_p from top-percentile counts
    Fit {
        #[arg(long)]
        p: f64,
        /// x:count pairs, e.g. 50:500,10:100,5:50,1:10
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Indicators { .. } => "indicators",
            Command::Share { .. } => "share",
            Command::Coverage { .. } => "coverage",
            Command::Correlate { .. } => "correlate",
            Command::Partition { .. } => "partition",
            Command::Map { .. } => "map",
            Command::Timeseries { .. } => "timeseries",
            Command::Expect { .. } => "expect",
            Command::Simulate { .. } => "simulate",
            Command::Fit { .. } => "fit",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Render(RenderError::UnsupportedFormat(_)) => 1,
            CliError::Ingest(_)
            | CliError::Aggregation(_)
            | CliError::Analysis(_)
            | CliError::Stats(_)
            | CliError::Output { .. } => 2,
            CliError::Model(ModelError::InsufficientPoints { .. } | ModelError::InvalidProfile(_)) => 2,
            CliError::Model(_) | CliError::Numeric(_) | CliError::Render(_) => 3,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// Runs the tool with `argv` (including the program name) and returns the exit code.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let replay: Vec<String> = argv.iter().skip(1).cloned().collect();
    match execute(&cli, replay) {
        Ok(report) => match emit(&report, &cli.common, stdout) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(report: &AnalysisReport, common: &CommonArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let bytes = render(report, common.format)?;
    match &common.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        }),
        None => stdout.write_all(&bytes).map_err(|source| CliError::Output {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| {
        CliError::Ingest(IngestError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Loaded inputs plus the bookkeeping that ends up in the report metadata.
struct Context<'a> {
    common: &'a CommonArgs,
    names: CountryNameMap,
    inputs: BTreeMap<String, InputDigest>,
    warnings: Vec<String>,
    exclusions: BTreeSet<String>,
}

impl<'a> Context<'a> {
    fn new(common: &'a CommonArgs) -> Result<Self, CliError> {
        let mut names = CountryNameMap::builtin();
        let mut inputs = BTreeMap::new();
        if let Some(path) = &common.names {
            names.merge(&CountryNameMap::from_csv(path)?)?;
            inputs.insert("names".into(), digest(path)?);
        }
        let mut exclusions = BTreeSet::new();
        for raw in &common.exclude {
            let code = names
                .resolve(raw)
                .ok_or_else(|| CliError::Usage(format!("--exclude: unknown country {raw:?}")))?;
            exclusions.insert(code.to_string());
        }
        Ok(Context {
            common,
            names,
            inputs,
            warnings: Vec::new(),
            exclusions,
        })
    }

    fn require<'p>(&self, path: &'p Option<PathBuf>, flag: &str) -> Result<&'p Path, CliError> {
        path.as_deref()
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
    }

    fn period(&self) -> Result<Period, CliError> {
        self.common
            .period
            .ok_or_else(|| CliError::Usage("missing required flag --period".into()))
    }

    fn year(&self) -> Result<i32, CliError> {
        Ok(match self.common.year {
            Some(y) => y,
            None => self.period()?.default_reference_year(),
        })
    }

    fn bibliometrics(&mut self) -> Result<Vec<InstitutionRecord>, CliError> {
        let path = self.require(&self.common.bibliometrics, "bibliometrics")?;
        self.inputs.insert("bibliometrics".into(), digest(path)?);
        Ok(load_bibliometrics(path, &self.common.field, self.common.counting, &self.names)?)
    }

    fn economy(&mut self) -> Result<Vec<EconomyRecord>, CliError> {
        let path = self.require(&self.common.economy, "economy")?;
        self.inputs.insert("economy".into(), digest(path)?);
        Ok(load_economy(path, &self.names)?)
    }

    fn patents(&mut self) -> Result<Vec<PatentRecord>, CliError> {
        let path = self.require(&self.common.patents, "patents")?;
        self.inputs.insert("patents".into(), digest(path)?);
        Ok(load_patents(path, &self.names)?)
    }

    fn profiles(&mut self) -> Result<Vec<CountryProfile>, CliError> {
        let records = self.bibliometrics()?;
        let period = self.period()?;
        let profiles = aggregate(&records, period, &self.common.field)?;
        let (kept, dropped): (Vec<_>, Vec<_>) = profiles
            .into_iter()
            .partition(|p| !self.exclusions.contains(&p.country));
        for p in dropped {
            self.warnings.push(format!("{}: excluded by --exclude", p.country));
        }
        Ok(kept)
    }

    /// Profiles joined with economy (and patents when `with_patents`).
    fn joins(&mut self, with_patents: bool) -> Result<Vec<CountryYearJoin>, CliError> {
        let profiles = self.profiles()?;
        let economy = self.economy()?;
        let patents = if with_patents { self.patents()? } else { Vec::new() };
        let year = self.year()?;
        let out = join_economy(&profiles, &economy, &patents, year)?;
        self.warnings.extend(out.warnings);
        Ok(out.joins)
    }

    /// Joins restricted to countries passing the patent screen.
    fn screened_joins(&mut self, filter: &PatentFilterArgs) -> Result<Vec<CountryYearJoin>, CliError> {
        let mut joins = self.joins(true)?;
        if filter.no_patent_filter {
            return Ok(joins);
        }
        let patents = self.patents()?;
        let year = self.year()?;
        let upto: Vec<PatentRecord> = patents.into_iter().filter(|p| p.year <= year).collect();
        let screen = patent_filter(&upto, &filter.params())?;
        for (country, reason) in &screen.rejected {
            self.warnings.push(format!("{country}: patent screen: {reason}"));
        }
        joins.retain(|j| {
            let keep = screen.kept.contains(&j.country);
            if !keep && j.patents.is_some() && !screen.rejected.contains_key(&j.country) {
                self.warnings.push(format!("{}: not screened", j.country));
            }
            keep
        });
        Ok(joins)
    }
}

fn digest(path: &Path) -> Result<InputDigest, CliError> {
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

fn check_finite(label: &str, values: &[f64]) -> Result<(), CliError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("{label} is not finite")))
    }
}

fn parse_counts(raw: &[String]) -> Result<Vec<(f64, f64)>, CliError> {
    raw.iter()
        .map(|item| {
            let (x, c) = item
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("--counts: expected x:count, got {item:?}")))?;
            let x: f64 = x.trim().parse().map_err(|_| CliError::Usage(format!("--counts: bad percentile {x:?}")))?;
            let c: f64 = c.trim().parse().map_err(|_| CliError::Usage(format!("--counts: bad count {c:?}")))?;
            Ok((x, c))
        })
        .collect()
}

fn execute(cli: &Cli, argv: Vec<String>) -> Result<AnalysisReport, CliError> {
    let mut ctx = Context::new(&cli.common)?;
    let body = match &cli.command {
        Command::Indicators { fit } => {
            let profiles = ctx.profiles()?;
            let mut rows = Vec::with_capacity(profiles.len());
            for p in &profiles {
                if p.ep.is_none() {
                    ctx.warnings
                        .push(format!("{}: P_top10%/P = {} has no valid e_p", p.country, p.ratio()));
                }
                let ep_fit = if *fit {
                    match p.percentile_profile().and_then(|pp| fit_ep(&pp)) {
                        Ok(e) => Some(e),
                        Err(e) => {
                            ctx.warnings.push(format!("{}: fit failed: {e}", p.country));
                            None
                        }
                    }
                } else {
                    None
                };
                rows.push(IndicatorRow {
                    country: p.country.clone(),
                    name: ctx.names.display_name(&p.country).to_string(),
                    institutions: p.institutions,
                    p: p.p,
                    p_top50: p.p_top50,
                    p_top10: p.p_top10,
                    p_top5: p.p_top5,
                    p_top1_reported: p.p_top1_reported,
                    p_top1: p.p_top1_derived,
                    p_top01: p.p_top01,
                    p_top001: p.p_top001,
                    ratio: p.ratio(),
                    ep: p.ep,
                    ep_fit,
                });
            }
            ReportBody::Indicators(rows)
        }
        Command::Share { indicator, threshold } => {
            let profiles = ctx.profiles()?;
            let tables = indicator
                .list()
                .into_iter()
                .map(|i| share_table(&profiles, i, *threshold))
                .collect::<Result<Vec<_>, _>>()?;
            ReportBody::ShareTables(tables)
        }
        Command::Coverage {
            indicator,
            weight,
            threshold,
        } => {
            let profiles = ctx.profiles()?;
            let economy = ctx.economy()?;
            let year = ctx.year()?;
            let weights = match weight {
                WeightSel::All => Weight::ALL.to_vec(),
                WeightSel::One(w) => vec![*w],
            };
            let mut rows = Vec::new();
            for i in indicator.list() {
                let table = share_table(&profiles, i, *threshold)?;
                for &w in &weights {
                    let c = coverage(&table, &profiles, &economy, year, w)?;
                    for code in &c.missing_from_denominator {
                        let msg = format!("{code}: no economy data for {year}; left out of coverage denominators");
                        if !ctx.warnings.contains(&msg) {
                            ctx.warnings.push(msg);
                        }
                    }
                    check_finite("coverage", &[c.percent])?;
                    rows.push(c);
                }
            }
            ReportBody::Coverage(rows)
        }
        Command::Correlate {
            x,
            y,
            method,
            top_range,
            range_ratio,
            range_limit,
            gdp_pc_band,
            gdp_pc_cut,
            dump_points,
        } => {
            let joins = ctx.joins(true)?;
            let mut allowed: Option<BTreeSet<String>> = None;
            if let Some(ind) = top_range {
                let profiles: Vec<CountryProfile> = joins.iter().map(|j| j.profile.clone()).collect();
                let subset = top_range_subset(&profiles, *ind, *range_ratio, *range_limit)?;
                allowed = Some(subset.into_iter().map(|(c, _)| c).collect());
            }
            if let Some(band) = gdp_pc_band {
                let (low, high) = split_by_gdp_pc(&joins, *gdp_pc_cut);
                let side: BTreeSet<String> = match band {
                    GdpPcBand::Low => low.into_iter().collect(),
                    GdpPcBand::High => high.into_iter().collect(),
                };
                allowed = Some(match allowed {
                    Some(prev) => prev.intersection(&side).cloned().collect(),
                    None => side,
                });
            }
            let pred = |j: &CountryYearJoin| allowed.as_ref().is_none_or(|a| a.contains(&j.country));
            // exclusions were applied when profiling
            let study = correlate_countries(&joins, *x, *y, *method, &BTreeSet::new(), Some(&pred))?;
            for c in &study.undefined {
                ctx.warnings.push(format!("{c}: {x} or {y} undefined; left out"));
            }
            check_finite("correlation", &[study.result.r, study.result.p_two_sided])?;
            ReportBody::Correlation(CorrelationReport {
                study,
                dump_points: *dump_points,
            })
        }
        Command::Partition {
            high_band,
            low_band,
            filter,
        } => {
            let joins = ctx.screened_joins(filter)?;
            let part = patent_partition(&joins, *high_band, *low_band);
            let ppb: BTreeMap<&str, f64> = joins
                .iter()
                .filter_map(|j| j.patents_per_billion.map(|v| (j.country.as_str(), v)))
                .collect();
            let mut rows = Vec::new();
            for (class, list) in [("high", &part.high), ("low", &part.low), ("unclassified", &part.unclassified)] {
                for c in list {
                    rows.push(PartitionRow {
                        country: c.clone(),
                        patents_per_billion: ppb[c.as_str()],
                        class: class.to_string(),
                    });
                }
            }
            ReportBody::Partition(rows)
        }
        Command::Map { filter } => {
            let joins = ctx.screened_joins(filter)?;
            for j in &joins {
                if j.patents_per_billion.is_some() && j.profile.ep.is_none() {
                    ctx.warnings.push(format!("{}: no valid e_p; left off the map", j.country));
                }
            }
            ReportBody::Map(efficiency_map(&joins))
        }
        Command::Timeseries { country } => {
            let code = ctx
                .names
                .resolve(country)
                .ok_or_else(|| CliError::Usage(format!("--country: unknown country {country:?}")))?
                .to_string();
            let records = ctx.bibliometrics()?;
            ReportBody::Series(timeseries(&records, &code, &cli.common.field)?)
        }
        Command::Expect { annual_papers, ep, x } => {
            let estimate = EpEstimate::from_value(*ep).map_err(|e| CliError::Usage(format!("--ep: {e}")))?;
            let probability = prob_top(&estimate, *x).map_err(|e| CliError::Usage(format!("--x: {e}")))?;
            let ev = expected_events(*annual_papers, &estimate, *x)
                .map_err(|e| CliError::Usage(format!("--annual-papers: {e}")))?;
            check_finite("expected events", &[ev.events_per_year, ev.years_per_event])?;
            ReportBody::Expectation(Expectation {
                annual_papers: *annual_papers,
                ep: *ep,
                x: *x,
                probability,
                events_per_year: ev.events_per_year,
                years_per_event: ev.years_per_event,
            })
        }
        Command::Simulate { ep, n, x, seeds } => {
            let config = SimConfig::new(*ep, *n, x.clone(), cli.common.seed)?;
            let runs = (0..*seeds)
                .map(|i| run_sim(&config.with_seed(cli.common.seed.wrapping_add(i))))
                .collect();
            ReportBody::Simulation(runs)
        }
        Command::Fit { p, counts } => {
            let counts = parse_counts(counts)?;
            let profile = PercentileProfile::new(*p, counts)?;
            let estimate = fit_ep(&profile)?;
            ReportBody::Fit(FitReport {
                p: *p,
                counts: profile.counts().to_vec(),
                estimate,
            })
        }
    };

    let metadata = Metadata {
        tool: TOOL_NAME.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: cli.command.name().to_string(),
        argv,
        parameters: serde_json::to_value(cli).map_err(|e| CliError::Numeric(e.to_string()))?,
        inputs: ctx.inputs,
        name_table: ctx.names.version().to_string(),
        exclusions: ctx.exclusions.into_iter().collect(),
        warnings: ctx.warnings,
    };
    Ok(AnalysisReport { metadata, body })
}
