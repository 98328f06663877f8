//! Country-level result computations: concentration tables, population and
//! GDP coverage, correlation studies, patent screens and partitions, the
//! efficiency map and per-country time series.
//!
//! Ties are always broken by ascending ISO code after descending value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{CountryProfile, CountryYearJoin};
use crate::ingest::{EconomyRecord, InstitutionRecord, PatentRecord, Period};
use crate::numeric::pairwise_sum;
use crate::stats::{correlate, linfit, CorrelationMethod, CorrelationResult, StatsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no country has a positive value for the requested indicator")]
    EmptyInput,
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("need at least {needed} countries, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("missing economy data for {}", .0.join(", "))]
    MissingEconomy(Vec<String>),
    #[error("{0}: fewer years of patent data than the stability window")]
    InsufficientYears(String),
    #[error("no records for country {0}")]
    UnknownCountry(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Absolute count indicators. `PTop1` is the value derived from the power law,
/// not the reported one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    P,
    PTop10,
    PTop1,
    PTop01,
    PTop001,
}

impl Indicator {
    pub const ALL: [Indicator; 5] = [
        Indicator::P,
        Indicator::PTop10,
        Indicator::PTop1,
        Indicator::PTop01,
        Indicator::PTop001,
    ];

    pub fn value(self, profile: &CountryProfile) -> f64 {
        match self {
            Indicator::P => profile.p,
            Indicator::PTop10 => profile.p_top10,
            Indicator::PTop1 => profile.p_top1_derived,
            Indicator::PTop01 => profile.p_top01,
            Indicator::PTop001 => profile.p_top001,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::P => "p",
            Indicator::PTop10 => "p_top10",
            Indicator::PTop1 => "p_top1",
            Indicator::PTop01 => "p_top01",
            Indicator::PTop001 => "p_top001",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown indicator {s:?} (expected p, p_top10, p_top1, p_top01, p_top001)"))
    }
}

/// Descending by value, then ascending by code.
fn ranked<'a, T>(items: impl IntoIterator<Item = (&'a str, f64, T)>) -> Vec<(&'a str, f64, T)> {
    let mut v: Vec<_> = items.into_iter().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub country: String,
    pub value: f64,
    pub cumulative_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareTable {
    pub indicator: Indicator,
    pub threshold: f64,
    /// Indicator total over all profiles.
    pub total: f64,
    pub countries: Vec<ShareRow>,
}

pub const DEFAULT_SHARE_THRESHOLD: f64 = 0.90;

/// Shortest prefix of the ranked countries whose cumulative share reaches `threshold`.
pub fn share_table(
    profiles: &[CountryProfile],
    indicator: Indicator,
    threshold: f64,
) -> Result<ShareTable, AnalysisError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(AnalysisError::InvalidThreshold(threshold));
    }
    let mut by_code: Vec<(&str, f64)> = profiles
        .iter()
        .map(|p| (p.country.as_str(), indicator.value(p)))
        .collect();
    by_code.sort_by(|a, b| a.0.cmp(b.0));
    let values: Vec<f64> = by_code.iter().map(|&(_, v)| v).collect();
    let total = pairwise_sum(&values);
    if !(total > 0.0) {
        return Err(AnalysisError::EmptyInput);
    }
    let mut rows = Vec::new();
    let mut cumulative = 0.0;
    for (country, value, ()) in ranked(by_code.into_iter().map(|(c, v)| (c, v, ()))) {
        cumulative += value;
        let share = cumulative / total;
        rows.push(ShareRow {
            country: country.to_string(),
            value,
            cumulative_share: share,
        });
        if share >= threshold {
            break;
        }
    }
    Ok(ShareTable {
        indicator,
        threshold,
        total,
        countries: rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    Population,
    Gdp,
}

impl Weight {
    pub const ALL: [Weight; 2] = [Weight::Population, Weight::Gdp];

    pub fn value(self, e: &EconomyRecord) -> f64 {
        match self {
            Weight::Population => e.population,
            Weight::Gdp => e.gdp_usd,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Weight::Population => "population",
            Weight::Gdp => "gdp",
        }
    }
}

impl FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "population" => Ok(Weight::Population),
            "gdp" => Ok(Weight::Gdp),
            other => Err(format!("unknown weight {other:?} (expected population or gdp)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub indicator: Indicator,
    pub weight: Weight,
    pub year: i32,
    pub percent: f64,
    /// Profiled countries left out of the denominator for lack of economy data.
    pub missing_from_denominator: Vec<String>,
}

/// Percentage of the profiled countries' population or GDP held by the table's countries.
pub fn coverage(
    table: &ShareTable,
    profiles: &[CountryProfile],
    economy: &[EconomyRecord],
    year: i32,
    weight: Weight,
) -> Result<Coverage, AnalysisError> {
    let econ: BTreeMap<&str, &EconomyRecord> = economy
        .iter()
        .filter(|e| e.year == year)
        .map(|e| (e.country.as_str(), e))
        .collect();
    let missing: Vec<String> = table
        .countries
        .iter()
        .filter(|r| !econ.contains_key(r.country.as_str()))
        .map(|r| r.country.clone())
        .collect();
    if !missing.is_empty() {
        return Err(AnalysisError::MissingEconomy(missing));
    }
    let in_table: BTreeSet<&str> = table.countries.iter().map(|r| r.country.as_str()).collect();
    let all: BTreeSet<&str> = profiles.iter().map(|p| p.country.as_str()).chain(in_table.iter().copied()).collect();

    let mut numerator = Vec::new();
    let mut denominator = Vec::new();
    let mut missing_from_denominator = Vec::new();
    for code in all {
        match econ.get(code) {
            Some(e) => {
                let w = weight.value(e);
                denominator.push(w);
                if in_table.contains(code) {
                    numerator.push(w);
                }
            }
            None => missing_from_denominator.push(code.to_string()),
        }
    }
    let den = pairwise_sum(&denominator);
    if !(den > 0.0) {
        return Err(AnalysisError::EmptyInput);
    }
    Ok(Coverage {
        indicator: table.indicator,
        weight,
        year,
        percent: 100.0 * pairwise_sum(&numerator) / den,
        missing_from_denominator,
    })
}

/// Per-country quantities available for correlation studies.
///
/// The `Ratio*` attributes are the size-independent indicators
/// `(P_top10%/P)^k` for k = 1..4 and are undefined for countries without a
/// valid `e_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    P,
    PTop10,
    PTop1,
    PTop01,
    PTop001,
    Ratio,
    RatioTop1,
    RatioTop01,
    RatioTop001,
    GdpUsd,
    GdpPerCapita,
    Population,
    Patents,
    PatentsPerBillion,
}

impl Attribute {
    const NAMES: [(Attribute, &'static str); 14] = [
        (Attribute::P, "p"),
        (Attribute::PTop10, "p_top10"),
        (Attribute::PTop1, "p_top1"),
        (Attribute::PTop01, "p_top01"),
        (Attribute::PTop001, "p_top001"),
        (Attribute::Ratio, "ratio"),
        (Attribute::RatioTop1, "ratio_top1"),
        (Attribute::RatioTop01, "ratio_top01"),
        (Attribute::RatioTop001, "ratio_top001"),
        (Attribute::GdpUsd, "gdp"),
        (Attribute::GdpPerCapita, "gdp_per_capita"),
        (Attribute::Population, "population"),
        (Attribute::Patents, "patents"),
        (Attribute::PatentsPerBillion, "patents_per_billion"),
    ];

    pub fn as_str(self) -> &'static str {
        Self::NAMES.iter().find(|(a, _)| *a == self).map(|(_, n)| *n).unwrap_or("?")
    }

    pub fn value(self, join: &CountryYearJoin) -> Option<f64> {
        let pr = &join.profile;
        let ratio_pow = |k: i32| pr.ep.map(|_| pr.ratio().powi(k));
        match self {
            Attribute::P => Some(pr.p),
            Attribute::PTop10 => Some(pr.p_top10),
            Attribute::PTop1 => Some(pr.p_top1_derived),
            Attribute::PTop01 => Some(pr.p_top01),
            Attribute::PTop001 => Some(pr.p_top001),
            Attribute::Ratio => ratio_pow(1),
            Attribute::RatioTop1 => ratio_pow(2),
            Attribute::RatioTop01 => ratio_pow(3),
            Attribute::RatioTop001 => ratio_pow(4),
            Attribute::GdpUsd => Some(join.economy.gdp_usd),
            Attribute::GdpPerCapita => Some(join.economy.gdp_per_capita),
            Attribute::Population => Some(join.economy.population),
            Attribute::Patents => join.patents,
            Attribute::PatentsPerBillion => join.patents_per_billion,
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        let key = match key.as_str() {
            "gdp_usd" => "gdp",
            other => other,
        };
        Self::NAMES
            .iter()
            .find(|(_, n)| *n == key)
            .map(|(a, _)| *a)
            .ok_or_else(|| {
                let all: Vec<&str> = Self::NAMES.iter().map(|(_, n)| *n).collect();
                format!("unknown attribute {s:?} (expected one of {})", all.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub country: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationStudy {
    pub x: Attribute,
    pub y: Attribute,
    pub result: CorrelationResult,
    pub points: Vec<CorrelationPoint>,
    /// Countries requested for exclusion that were present.
    pub excluded: Vec<String>,
    /// Countries dropped because an attribute is undefined for them.
    pub undefined: Vec<String>,
}

pub type JoinPredicate<'a> = &'a dyn Fn(&CountryYearJoin) -> bool;

pub fn correlate_countries(
    joins: &[CountryYearJoin],
    x: Attribute,
    y: Attribute,
    method: CorrelationMethod,
    exclude: &BTreeSet<String>,
    subset: Option<JoinPredicate<'_>>,
) -> Result<CorrelationStudy, AnalysisError> {
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    let mut undefined = Vec::new();
    let mut sorted: Vec<&CountryYearJoin> = joins.iter().collect();
    sorted.sort_by(|a, b| a.country.cmp(&b.country));
    for j in sorted {
        if exclude.contains(&j.country) {
            excluded.push(j.country.clone());
            continue;
        }
        if let Some(pred) = subset {
            if !pred(j) {
                continue;
            }
        }
        match (x.value(j), y.value(j)) {
            (Some(xv), Some(yv)) => points.push(CorrelationPoint {
                country: j.country.clone(),
                x: xv,
                y: yv,
            }),
            _ => undefined.push(j.country.clone()),
        }
    }
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let result = correlate(method, &xs, &ys)?;
    Ok(CorrelationStudy {
        x,
        y,
        result,
        points,
        excluded,
        undefined,
    })
}

/// Countries within a factor `ratio` of the top value, descending, optionally
/// capped at `limit` entries.
pub fn top_range_subset(
    profiles: &[CountryProfile],
    indicator: Indicator,
    ratio: f64,
    limit: Option<usize>,
) -> Result<Vec<(String, f64)>, AnalysisError> {
    let ranked = ranked(profiles.iter().map(|p| (p.country.as_str(), indicator.value(p), ())));
    let Some(&(_, max, ())) = ranked.first() else {
        return Err(AnalysisError::EmptyInput);
    };
    if !(max > 0.0) {
        return Err(AnalysisError::EmptyInput);
    }
    let floor = max / ratio;
    Ok(ranked
        .into_iter()
        .take_while(|&(_, v, ())| v >= floor)
        .take(limit.unwrap_or(usize::MAX))
        .map(|(c, v, ())| (c.to_string(), v))
        .collect())
}

pub const DEFAULT_GDP_PC_CUT: f64 = 30_000.0;

/// Country codes with GDP per capita `<= cut` and `> cut`.
pub fn split_by_gdp_pc(joins: &[CountryYearJoin], cut: f64) -> (Vec<String>, Vec<String>) {
    let mut low = Vec::new();
    let mut high = Vec::new();
    for j in joins {
        if j.economy.gdp_per_capita <= cut {
            low.push(j.country.clone());
        } else {
            high.push(j.country.clone());
        }
    }
    low.sort();
    high.sort();
    (low, high)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatentFilterParams {
    /// Latest-year families must exceed this.
    pub min_families: f64,
    /// Number of trailing years checked for stability.
    pub window: usize,
    /// Upper bound on the regression residual dispersion.
    pub max_dispersion: f64,
}

impl Default for PatentFilterParams {
    fn default() -> Self {
        PatentFilterParams {
            min_families: 10.0,
            window: 5,
            max_dispersion: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatentScreen {
    pub kept: BTreeSet<String>,
    /// Country → reason.
    pub rejected: BTreeMap<String, String>,
}

/// Keeps countries with enough patent families and a stable recent trend.
pub fn patent_filter(patents: &[PatentRecord], params: &PatentFilterParams) -> Result<PatentScreen, AnalysisError> {
    let mut by_country: BTreeMap<&str, Vec<&PatentRecord>> = BTreeMap::new();
    for r in patents {
        by_country.entry(r.country.as_str()).or_default().push(r);
    }
    let mut kept = BTreeSet::new();
    let mut rejected = BTreeMap::new();
    for (country, mut rows) in by_country {
        rows.sort_by_key(|r| r.year);
        let latest = rows[rows.len() - 1];
        if latest.families <= params.min_families {
            rejected.insert(
                country.to_string(),
                format!("{} families in {} (need > {})", latest.families, latest.year, params.min_families),
            );
            continue;
        }
        if rows.len() < params.window || params.window < 2 {
            return Err(AnalysisError::InsufficientYears(country.to_string()));
        }
        let tail = &rows[rows.len() - params.window..];
        let xs: Vec<f64> = tail.iter().map(|r| r.year as f64).collect();
        let ys: Vec<f64> = tail.iter().map(|r| r.families).collect();
        let fit = linfit(&xs, &ys)?;
        if fit.rel_dispersion <= params.max_dispersion {
            kept.insert(country.to_string());
        } else {
            rejected.insert(
                country.to_string(),
                format!(
                    "dispersion {} over {}-{} exceeds {}",
                    fit.rel_dispersion, tail[0].year, latest.year, params.max_dispersion
                ),
            );
        }
    }
    Ok(PatentScreen { kept, rejected })
}

/// Closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
        let lo: f64 = a.trim().parse().map_err(|_| format!("bad band bound {a:?}"))?;
        let hi: f64 = b.trim().parse().map_err(|_| format!("bad band bound {b:?}"))?;
        if lo > hi {
            return Err(format!("band {s:?} is empty"));
        }
        Ok(Band { lo, hi })
    }
}

pub const DEFAULT_HIGH_BAND: Band = Band { lo: 0.8, hi: 3.8 };
pub const DEFAULT_LOW_BAND: Band = Band { lo: 0.1, hi: 0.6 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatentPartition {
    pub high: Vec<String>,
    pub low: Vec<String>,
    pub unclassified: Vec<String>,
}

/// Splits joined countries by patent families per billion US$ of GDP.
/// Countries without that ratio are ignored.
pub fn patent_partition(joins: &[CountryYearJoin], high_band: Band, low_band: Band) -> PatentPartition {
    let mut out = PatentPartition {
        high: Vec::new(),
        low: Vec::new(),
        unclassified: Vec::new(),
    };
    for j in joins {
        let Some(v) = j.patents_per_billion else { continue };
        let bucket = if high_band.contains(v) {
            &mut out.high
        } else if low_band.contains(v) {
            &mut out.low
        } else {
            &mut out.unclassified
        };
        bucket.push(j.country.clone());
    }
    out.high.sort();
    out.low.sort();
    out.unclassified.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub country: String,
    /// `P_top10% / P`
    pub x: f64,
    /// Patent families per billion US$ of GDP.
    pub y: f64,
}

pub fn efficiency_map(joins: &[CountryYearJoin]) -> Vec<MapPoint> {
    let mut points: Vec<MapPoint> = joins
        .iter()
        .filter_map(|j| {
            let y = j.patents_per_billion?;
            j.profile.ep?;
            Some(MapPoint {
                country: j.country.clone(),
                x: j.profile.ratio(),
                y,
            })
        })
        .collect();
    points.sort_by(|a, b| a.country.cmp(&b.country));
    points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub country: String,
    pub period: Period,
    pub p: f64,
    pub ratio: f64,
}

/// `P` and `P_top10% / P` of one country for every period on record, oldest first.
pub fn timeseries(records: &[InstitutionRecord], country: &str, field: &str) -> Result<Vec<SeriesPoint>, AnalysisError> {
    let wanted = field.trim().to_lowercase();
    let mut by_period: BTreeMap<Period, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.country == country && r.field.to_lowercase() == wanted)
    {
        let entry = by_period.entry(r.period).or_default();
        entry.0.push(r.p);
        entry.1.push(r.p_top10);
    }
    if by_period.is_empty() {
        return Err(AnalysisError::UnknownCountry(country.to_string()));
    }
    Ok(by_period
        .into_iter()
        .filter_map(|(period, (p, top))| {
            let p = pairwise_sum(&p);
            (p > 0.0).then(|| SeriesPoint {
                country: country.to_string(),
                period,
                p,
                ratio: pairwise_sum(&top) / p,
            })
        })
        .collect())
}

/// Country codes ordered by `(P_top10%/P)^power`, descending; countries without a valid `e_p` are skipped.
pub fn order_by_ratio_power(profiles: &[CountryProfile], power: i32) -> Vec<String> {
    ranked(
        profiles
            .iter()
            .filter(|p| p.ep.is_some())
            .map(|p| (p.country.as_str(), p.ratio().powi(power), ())),
    )
    .into_iter()
    .map(|(c, _, ())| c.to_string())
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Counting;
    use crate::percentile_model::ep_proxy;

    fn profile(country: &str, p: f64, p_top10: f64) -> CountryProfile {
        let ep = ep_proxy(p, p_top10).ok();
        let r = p_top10 / p;
        CountryProfile {
            country: country.into(),
            period: Period { start: 2016, end: 2019 },
            field: "F".into(),
            counting: Counting::Fractional,
            p,
            p_top50: p / 2.0,
            p_top10,
            p_top5: p_top10 / 2.0,
            p_top1_reported: p_top10 / 10.0,
            p_top1_derived: p * r * r,
            p_top01: p * r.powi(3),
            p_top001: p * r.powi(4),
            ep,
            institutions: 1,
        }
    }

    fn econ(country: &str, gdp: f64, pop: f64) -> EconomyRecord {
        EconomyRecord {
            country: country.into(),
            year: 2018,
            gdp_usd: gdp,
            population: pop,
            gdp_per_capita: gdp / pop,
        }
    }

    fn join(country: &str, p: f64, p_top10: f64, gdp: f64, pop: f64, patents: Option<f64>) -> CountryYearJoin {
        let pr = profile(country, p, p_top10);
        CountryYearJoin {
            country: country.into(),
            period: pr.period,
            profile: pr,
            economy: econ(country, gdp, pop),
            patents,
            patents_per_billion: patents.map(|f| f / (gdp / 1e9)),
        }
    }

    fn countries(t: &ShareTable) -> Vec<&str> {
        t.countries.iter().map(|r| r.country.as_str()).collect()
    }

    #[test]
    fn share_table_prefix() {
        let ps = vec![profile("AAA", 50.0, 5.0), profile("BBB", 30.0, 3.0), profile("CCC", 15.0, 1.5), profile("DDD", 5.0, 0.5)];
        let t = share_table(&ps, Indicator::P, 0.9).unwrap();
        assert_eq!(countries(&t), ["AAA", "BBB", "CCC"]);
        assert_eq!(t.countries[2].cumulative_share, 0.95);
    }

    #[test]
    fn share_table_threshold_inclusive() {
        let ps = vec![profile("BBB", 10.0, 1.0), profile("AAA", 90.0, 9.0)];
        let t = share_table(&ps, Indicator::P, 0.9).unwrap();
        assert_eq!(countries(&t), ["AAA"]);
    }

    #[test]
    fn share_table_ties_by_code() {
        let ps = vec![profile("ZZZ", 40.0, 1.0), profile("AAA", 40.0, 1.0), profile("MMM", 20.0, 1.0)];
        let t = share_table(&ps, Indicator::P, 0.5).unwrap();
        assert_eq!(countries(&t), ["AAA", "ZZZ"]);
    }

    #[test]
    fn share_table_errors() {
        assert_eq!(share_table(&[], Indicator::P, 0.9), Err(AnalysisError::EmptyInput));
        let ps = vec![profile("AAA", 10.0, 0.0)];
        assert_eq!(share_table(&ps, Indicator::PTop10, 0.9), Err(AnalysisError::EmptyInput));
        assert!(matches!(share_table(&ps, Indicator::P, 1.5), Err(AnalysisError::InvalidThreshold(_))));
    }

    #[test]
    fn coverage_ratio_of_sums() {
        let ps = vec![profile("AAA", 50.0, 5.0), profile("BBB", 30.0, 3.0), profile("CCC", 15.0, 1.5), profile("DDD", 5.0, 0.5)];
        let t = share_table(&ps, Indicator::P, 0.9).unwrap();
        let economy = vec![econ("AAA", 1.0, 10.0), econ("BBB", 1.0, 20.0), econ("CCC", 1.0, 30.0), econ("DDD", 1.0, 40.0)];
        let c = coverage(&t, &ps, &economy, 2018, Weight::Population).unwrap();
        assert_eq!(c.percent, 60.0);
        assert!(c.missing_from_denominator.is_empty());
    }

    #[test]
    fn coverage_missing_table_economy() {
        let ps = vec![profile("AAA", 50.0, 5.0), profile("BBB", 50.0, 5.0)];
        let t = share_table(&ps, Indicator::P, 0.9).unwrap();
        let err = coverage(&t, &ps, &[econ("AAA", 1.0, 1.0)], 2018, Weight::Gdp).unwrap_err();
        assert_eq!(err, AnalysisError::MissingEconomy(vec!["BBB".into()]));
    }

    #[test]
    fn coverage_denominator_gap_reported() {
        let ps = vec![profile("AAA", 95.0, 5.0), profile("BBB", 5.0, 0.5)];
        let t = share_table(&ps, Indicator::P, 0.9).unwrap();
        let c = coverage(&t, &ps, &[econ("AAA", 1.0, 1.0)], 2018, Weight::Gdp).unwrap();
        assert_eq!(c.percent, 100.0);
        assert_eq!(c.missing_from_denominator, ["BBB"]);
    }

    #[test]
    fn top_range_examples() {
        let ps = vec![profile("AAA", 100.0, 1.0), profile("BBB", 50.0, 1.0), profile("CCC", 11.0, 1.0), profile("DDD", 9.0, 1.0)];
        let sub = top_range_subset(&ps, Indicator::P, 10.0, None).unwrap();
        let codes: Vec<&str> = sub.iter().map(|(c, _)| c.as_str()).collect();
        assert_eq!(codes, ["AAA", "BBB", "CCC"]);
        assert_eq!(top_range_subset(&ps, Indicator::P, 10.0, Some(2)).unwrap().len(), 2);
        assert_eq!(top_range_subset(&[], Indicator::P, 10.0, None), Err(AnalysisError::EmptyInput));
    }

    #[test]
    fn gdp_pc_split() {
        let joins = vec![
            join("ESP", 10.0, 1.0, 26_505.0, 1.0, None),
            join("NOR", 10.0, 1.0, 70_459.0, 1.0, None),
            join("SGP", 10.0, 1.0, 56_828.0, 1.0, None),
            join("XXX", 10.0, 1.0, 30_000.0, 1.0, None),
        ];
        let (low, high) = split_by_gdp_pc(&joins, DEFAULT_GDP_PC_CUT);
        assert_eq!(low, ["ESP", "XXX"]);
        assert_eq!(high, ["NOR", "SGP"]);
        assert_eq!(split_by_gdp_pc(&[], 30_000.0), (vec![], vec![]));
    }

    fn series(country: &str, fams: &[f64]) -> Vec<PatentRecord> {
        fams.iter()
            .enumerate()
            .map(|(i, &f)| PatentRecord {
                country: country.into(),
                year: 2014 + i as i32,
                families: f,
            })
            .collect()
    }

    #[test]
    fn patent_filter_rules() {
        let mut pats = series("AAA", &[100.0; 5]);
        pats.extend(series("BBB", &[11.0, 201.0, 11.0, 201.0, 11.0]));
        pats.extend(series("CCC", &[12.0, 11.0, 9.0, 9.0, 8.0]));
        pats.extend(series("DDD", &[50.0, 55.0, 60.0, 65.0, 70.0]));
        let params = PatentFilterParams { max_dispersion: 0.99, ..Default::default() };
        let screen = patent_filter(&pats, &params).unwrap();
        assert_eq!(screen.kept.iter().map(String::as_str).collect::<Vec<_>>(), ["AAA", "DDD"]);
        assert!(screen.rejected["BBB"].contains("dispersion"));
        assert!(screen.rejected["CCC"].contains("families"));
    }

    #[test]
    fn patent_filter_needs_window() {
        let pats = series("AAA", &[100.0; 3]);
        assert_eq!(
            patent_filter(&pats, &PatentFilterParams::default()),
            Err(AnalysisError::InsufficientYears("AAA".into()))
        );
    }

    #[test]
    fn partition_bands() {
        let joins = vec![
            join("AAA", 10.0, 1.0, 150e9, 1.0, Some(150.0)),
            join("BBB", 10.0, 1.0, 100e9, 1.0, Some(70.0)),
            join("CCC", 10.0, 1.0, 100e9, 1.0, Some(10.0)),
            join("DDD", 10.0, 1.0, 100e9, 1.0, Some(380.0)),
            join("EEE", 10.0, 1.0, 100e9, 1.0, None),
        ];
        let part = patent_partition(&joins, DEFAULT_HIGH_BAND, DEFAULT_LOW_BAND);
        assert_eq!(part.high, ["AAA", "DDD"]);
        assert_eq!(part.low, ["CCC"]);
        assert_eq!(part.unclassified, ["BBB"]);
    }

    #[test]
    fn map_points() {
        let joins = vec![
            join("NOR", 1000.0, 110.0, 150e9, 1.0, Some(150.0)),
            join("ESP", 1000.0, 90.0, 150e9, 1.0, None),
            join("AUT", 1000.0, 0.0, 150e9, 1.0, Some(3.0)),
        ];
        let pts = efficiency_map(&joins);
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].country, "NOR");
        assert_eq!(pts[0].x, 0.11);
        assert_eq!(pts[0].y, 1.0);
    }

    #[test]
    fn correlate_with_exclusion_and_subset() {
        let joins = vec![
            join("AAA", 10.0, 1.0, 1.0, 1.0, None),
            join("BBB", 20.0, 2.0, 2.0, 1.0, None),
            join("CCC", 30.0, 3.0, 3.0, 1.0, None),
            join("USA", 400.0, 40.0, 1.0, 1.0, None),
        ];
        let excl: BTreeSet<String> = ["USA".to_string()].into();
        let s = correlate_countries(&joins, Attribute::GdpUsd, Attribute::P, CorrelationMethod::Pearson, &excl, None).unwrap();
        assert_eq!(s.result.r, 1.0);
        assert_eq!(s.excluded, ["USA"]);
        let pred = |j: &CountryYearJoin| j.profile.p > 15.0;
        let err = correlate_countries(&joins, Attribute::GdpUsd, Attribute::P, CorrelationMethod::Pearson, &excl, Some(&pred))
            .unwrap_err();
        assert_eq!(err, AnalysisError::TooFewPoints { needed: 3, got: 2 });
    }

    #[test]
    fn correlate_skips_undefined_ratio() {
        let joins = vec![
            join("AAA", 10.0, 1.0, 1.0, 1.0, None),
            join("BBB", 20.0, 3.0, 2.0, 1.0, None),
            join("CCC", 30.0, 6.0, 3.0, 1.0, None),
            join("DDD", 30.0, 0.0, 3.0, 1.0, None),
        ];
        let s = correlate_countries(&joins, Attribute::GdpPerCapita, Attribute::Ratio, CorrelationMethod::Spearman, &BTreeSet::new(), None)
            .unwrap();
        assert_eq!(s.undefined, ["DDD"]);
        assert_eq!(s.result.n, 3);
    }

    fn inst(country: &str, start: i32, p: f64, p_top10: f64) -> InstitutionRecord {
        InstitutionRecord {
            institution: "U".into(),
            country: country.into(),
            period: Period { start, end: start + 3 },
            field: "F".into(),
            counting: Counting::Fractional,
            p,
            p_top50: p / 2.0,
            p_top10,
            p_top5: p_top10 / 2.0,
            p_top1: p_top10 / 10.0,
        }
    }

    #[test]
    fn timeseries_constant_country() {
        let recs = vec![inst("NOR", 2008, 100.0, 10.0), inst("NOR", 2006, 100.0, 10.0), inst("NOR", 2007, 100.0, 10.0), inst("ESP", 2006, 5.0, 1.0)];
        let s = timeseries(&recs, "NOR", "F").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.iter().map(|p| p.period.start).collect::<Vec<_>>(), [2006, 2007, 2008]);
        assert!(s.iter().all(|p| p.p == 100.0 && p.ratio == 0.1));
        assert_eq!(timeseries(&recs, "SGP", "F"), Err(AnalysisError::UnknownCountry("SGP".into())));
    }

    #[test]
    fn parse_names() {
        assert_eq!("p_top001".parse::<Indicator>().unwrap(), Indicator::PTop001);
        assert_eq!("gdp_usd".parse::<Attribute>().unwrap(), Attribute::GdpUsd);
        assert_eq!("ratio".parse::<Attribute>().unwrap(), Attribute::Ratio);
        assert!("bogus".parse::<Attribute>().is_err());
        assert_eq!("0.8,3.8".parse::<Band>().unwrap(), DEFAULT_HIGH_BAND);
    }
}
