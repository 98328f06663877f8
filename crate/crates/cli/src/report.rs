//! Report model and its JSON / CSV / Markdown renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use epindex_core::analysis::{Coverage, CorrelationStudy, MapPoint, SeriesPoint, ShareTable};
use epindex_core::percentile_model::EpEstimate;
use epindex_core::simulate::SimResult;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("unsupported output format {0:?} (expected json, csv or md)")]
    UnsupportedFormat(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl std::str::FromStr for Format {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Md),
            other => Err(RenderError::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments that reproduce this report when passed back to the tool.
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub inputs: BTreeMap<String, InputDigest>,
    pub name_table: String,
    pub exclusions: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRow {
    pub country: String,
    pub name: String,
    pub institutions: usize,
    pub p: f64,
    pub p_top50: f64,
    pub p_top10: f64,
    pub p_top5: f64,
    pub p_top1_reported: f64,
    pub p_top1: f64,
    pub p_top01: f64,
    pub p_top001: f64,
    pub ratio: f64,
    pub ep: Option<EpEstimate>,
    pub ep_fit: Option<EpEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub country: String,
    pub patents_per_billion: f64,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub annual_papers: f64,
    pub ep: f64,
    pub x: f64,
    pub probability: f64,
    pub events_per_year: f64,
    pub years_per_event: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub p: f64,
    pub counts: Vec<(f64, f64)>,
    pub estimate: EpEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub study: CorrelationStudy,
    /// Emit the scatter points instead of the summary in CSV / Markdown.
    pub dump_points: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportBody {
    Indicators(Vec<IndicatorRow>),
    ShareTables(Vec<ShareTable>),
    Coverage(Vec<Coverage>),
    Correlation(CorrelationReport),
    Partition(Vec<PartitionRow>),
    Map(Vec<MapPoint>),
    Series(Vec<SeriesPoint>),
    Expectation(Expectation),
    Simulation(Vec<SimResult>),
    Fit(FitReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: Metadata,
    pub body: ReportBody,
}

pub fn render(report: &AnalysisReport, format: Format) -> Result<Vec<u8>, RenderError> {
    match format {
        Format::Json => render_json(report),
        Format::Csv => render_csv(&report.body),
        Format::Md => Ok(render_md(report).into_bytes()),
    }
}

/// Pretty JSON with keys sorted at every level.
fn render_json(report: &AnalysisReport) -> Result<Vec<u8>, RenderError> {
    // serde_json::Map is a BTreeMap without the preserve_order feature.
    let value = serde_json::to_value(report)?;
    let mut out = serde_json::to_vec_pretty(&value)?;
    out.push(b'\n');
    Ok(out)
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn render_csv(body: &ReportBody) -> Result<Vec<u8>, RenderError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match body {
        ReportBody::Indicators(rows) => {
            w.write_record([
                "country", "name", "institutions", "p", "p_top50", "p_top10", "p_top5", "p_top1_reported",
                "p_top1", "p_top01", "p_top001", "ratio", "ep", "alpha", "ep_fit", "alpha_fit", "fit_rms",
                "fit_points",
            ])?;
            for r in rows {
                w.write_record([
                    r.country.clone(),
                    r.name.clone(),
                    r.institutions.to_string(),
                    num(r.p),
                    num(r.p_top50),
                    num(r.p_top10),
                    num(r.p_top5),
                    num(r.p_top1_reported),
                    num(r.p_top1),
                    num(r.p_top01),
                    num(r.p_top001),
                    num(r.ratio),
                    opt(r.ep.map(|e| e.value())),
                    opt(r.ep.map(|e| e.alpha())),
                    opt(r.ep_fit.map(|e| e.value())),
                    opt(r.ep_fit.map(|e| e.alpha())),
                    opt(r.ep_fit.map(|e| e.residual_rms())),
                    r.ep_fit.map(|e| e.points_used().to_string()).unwrap_or_default(),
                ])?;
            }
        }
        ReportBody::ShareTables(tables) => {
            w.write_record(["indicator", "rank", "country", "value", "cumulative_share"])?;
            for t in tables {
                for (i, r) in t.countries.iter().enumerate() {
                    w.write_record([
                        t.indicator.to_string(),
                        (i + 1).to_string(),
                        r.country.clone(),
                        num(r.value),
                        num(r.cumulative_share),
                    ])?;
                }
            }
        }
        ReportBody::Coverage(rows) => {
            w.write_record(["indicator", "weight", "percent"])?;
            for c in rows {
                w.write_record([c.indicator.to_string(), c.weight.as_str().to_string(), num(c.percent)])?;
            }
        }
        ReportBody::Correlation(c) if c.dump_points => {
            w.write_record(["country", c.study.x.as_str(), c.study.y.as_str()])?;
            for p in &c.study.points {
                w.write_record([p.country.clone(), num(p.x), num(p.y)])?;
            }
        }
        ReportBody::Correlation(c) => {
            let s = &c.study;
            w.write_record(["x", "y", "method", "n", "r", "p_two_sided"])?;
            w.write_record([
                s.x.to_string(),
                s.y.to_string(),
                method_name(s),
                s.result.n.to_string(),
                num(s.result.r),
                num(s.result.p_two_sided),
            ])?;
        }
        ReportBody::Partition(rows) => {
            w.write_record(["country", "patents_per_billion", "class"])?;
            for r in rows {
                w.write_record([r.country.clone(), num(r.patents_per_billion), r.class.clone()])?;
            }
        }
        ReportBody::Map(points) => {
            w.write_record(["country", "ratio", "patents_per_billion"])?;
            for p in points {
                w.write_record([p.country.clone(), num(p.x), num(p.y)])?;
            }
        }
        ReportBody::Series(points) => {
            w.write_record(["country", "period", "p", "ratio"])?;
            for p in points {
                w.write_record([p.country.clone(), p.period.to_string(), num(p.p), num(p.ratio)])?;
            }
        }
        ReportBody::Expectation(e) => {
            w.write_record(["annual_papers", "ep", "x", "probability", "events_per_year", "years_per_event"])?;
            w.write_record([
                num(e.annual_papers),
                num(e.ep),
                num(e.x),
                num(e.probability),
                num(e.events_per_year),
                num(e.years_per_event),
            ])?;
        }
        ReportBody::Simulation(runs) => {
            w.write_record([
                "seed", "ep", "n_papers", "x", "probability", "expected_count", "empirical_count", "z_score",
            ])?;
            for r in runs {
                for o in &r.outcomes {
                    w.write_record([
                        r.seed.to_string(),
                        num(r.ep),
                        r.n_papers.to_string(),
                        num(o.x),
                        num(o.probability),
                        num(o.expected_count),
                        o.empirical_count.to_string(),
                        num(o.z_score),
                    ])?;
                }
            }
        }
        ReportBody::Fit(f) => {
            w.write_record(["p", "alpha", "ep", "residual_rms", "points_used"])?;
            w.write_record([
                num(f.p),
                num(f.estimate.alpha()),
                num(f.estimate.value()),
                num(f.estimate.residual_rms()),
                f.estimate.points_used().to_string(),
            ])?;
        }
    }
    w.into_inner()
        .map_err(|e| RenderError::Csv(csv::Error::from(e.into_error())))
}

fn method_name(s: &CorrelationStudy) -> String {
    serde_json::to_value(s.result.method)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// p-values as printed for people: tiny values collapse to a bound.
pub fn human_p_value(p: f64) -> String {
    if p < 1e-10 {
        "<1e-10".to_string()
    } else {
        format!("{p:.3e}")
    }
}

fn md_table(out: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
}

fn render_md(report: &AnalysisReport) -> String {
    let m = &report.metadata;
    let mut out = String::new();
    let _ = writeln!(out, "# {} {}\n", m.tool, m.command);
    let _ = writeln!(out, "- version: {}", m.version);
    let _ = writeln!(out, "- arguments: `{}`", m.argv.join(" "));
    if !m.exclusions.is_empty() {
        let _ = writeln!(out, "- excluded: {}", m.exclusions.join(", "));
    }
    for (role, d) in &m.inputs {
        let _ = writeln!(out, "- {role}: {} (sha256 {})", d.path, d.sha256);
    }
    out.push('\n');

    match &report.body {
        ReportBody::Indicators(rows) => md_table(
            &mut out,
            &["country", "P", "P_top10%", "P_top1%", "P_top0.1%", "P_top0.01%", "P_top10%/P", "e_p (fit)"],
            rows.iter().map(|r| {
                vec![
                    r.name.clone(),
                    num(r.p),
                    num(r.p_top10),
                    num(r.p_top1),
                    num(r.p_top01),
                    num(r.p_top001),
                    num(r.ratio),
                    opt(r.ep_fit.map(|e| e.value())),
                ]
            }),
        ),
        ReportBody::ShareTables(tables) => {
            // rank rows, one column per indicator
            let header: Vec<String> = tables.iter().map(|t| t.indicator.to_string()).collect();
            let header_refs: Vec<&str> = std::iter::once("rank").chain(header.iter().map(String::as_str)).collect();
            let depth = tables.iter().map(|t| t.countries.len()).max().unwrap_or(0);
            md_table(
                &mut out,
                &header_refs,
                (0..depth).map(|i| {
                    std::iter::once((i + 1).to_string())
                        .chain(
                            tables
                                .iter()
                                .map(|t| t.countries.get(i).map(|r| r.country.clone()).unwrap_or_default()),
                        )
                        .collect()
                }),
            );
            out.push('\n');
            md_table(
                &mut out,
                &["indicator", "countries", "threshold"],
                tables
                    .iter()
                    .map(|t| vec![t.indicator.to_string(), t.countries.len().to_string(), num(t.threshold)]),
            );
        }
        ReportBody::Coverage(rows) => {
            // indicator rows, weight columns
            let mut by_ind: BTreeMap<String, BTreeMap<&str, f64>> = BTreeMap::new();
            let mut order: Vec<String> = Vec::new();
            for c in rows {
                let key = c.indicator.to_string();
                if !by_ind.contains_key(&key) {
                    order.push(key.clone());
                }
                by_ind.entry(key).or_default().insert(c.weight.as_str(), c.percent);
            }
            md_table(
                &mut out,
                &["indicator", "population %", "gdp %"],
                order.iter().map(|k| {
                    let w = &by_ind[k];
                    vec![
                        k.clone(),
                        w.get("population").map(|v| format!("{v:.1}")).unwrap_or_default(),
                        w.get("gdp").map(|v| format!("{v:.1}")).unwrap_or_default(),
                    ]
                }),
            );
        }
        ReportBody::Correlation(c) if c.dump_points => md_table(
            &mut out,
            &["country", c.study.x.as_str(), c.study.y.as_str()],
            c.study.points.iter().map(|p| vec![p.country.clone(), num(p.x), num(p.y)]),
        ),
        ReportBody::Correlation(c) => {
            let s = &c.study;
            md_table(
                &mut out,
                &["x", "y", "method", "n", "r", "p (two-sided)"],
                [vec![
                    s.x.to_string(),
                    s.y.to_string(),
                    method_name(s),
                    s.result.n.to_string(),
                    format!("{:.4}", s.result.r),
                    human_p_value(s.result.p_two_sided),
                ]],
            );
        }
        ReportBody::Partition(rows) => md_table(
            &mut out,
            &["country", "patents per billion US$", "class"],
            rows.iter().map(|r| vec![r.country.clone(), num(r.patents_per_billion), r.class.clone()]),
        ),
        ReportBody::Map(points) => md_table(
            &mut out,
            &["country", "P_top10%/P", "patents per billion US$"],
            points.iter().map(|p| vec![p.country.clone(), num(p.x), num(p.y)]),
        ),
        ReportBody::Series(points) => md_table(
            &mut out,
            &["country", "period", "P", "P_top10%/P"],
            points.iter().map(|p| vec![p.country.clone(), p.period.to_string(), num(p.p), num(p.ratio)]),
        ),
        ReportBody::Expectation(e) => md_table(
            &mut out,
            &["annual papers", "e_p", "top x%", "probability", "events/year", "years/event"],
            [vec![
                num(e.annual_papers),
                num(e.ep),
                num(e.x),
                num(e.probability),
                num(e.events_per_year),
                format!("{:.1}", e.years_per_event),
            ]],
        ),
        ReportBody::Simulation(runs) => md_table(
            &mut out,
            &["seed", "top x%", "expected", "empirical", "z"],
            runs.iter().flat_map(|r| {
                r.outcomes.iter().map(move |o| {
                    vec![
                        r.seed.to_string(),
                        num(o.x),
                        num(o.expected_count),
                        o.empirical_count.to_string(),
                        format!("{:.3}", o.z_score),
                    ]
                })
            }),
        ),
        ReportBody::Fit(f) => md_table(
            &mut out,
            &["P", "alpha", "e_p", "rms (log10)", "points"],
            [vec![
                num(f.p),
                num(f.estimate.alpha()),
                num(f.estimate.value()),
                num(f.estimate.residual_rms()),
                f.estimate.points_used().to_string(),
            ]],
        ),
    }
    if !m.warnings.is_empty() {
        let _ = writeln!(out, "\n## Warnings\n");
        for w in &m.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    out
}
