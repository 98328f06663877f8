//! Country profiles from institution records, and their join with economy
//! and patent data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Counting, EconomyRecord, InstitutionRecord, PatentRecord, Period};
use crate::numeric::pairwise_sum;
use crate::percentile_model::{ep_proxy, extrapolate, EpEstimate, ModelError, PercentileProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregationError {
    #[error("records mix fractional and full counting")]
    MixedCounting,
    #[error("no records for field {field:?} in period {period}")]
    NoRecords { period: Period, field: String },
    #[error("no profiled country has economy data for {year}")]
    NoJoinableCountries { year: i32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Summed counts of one country's institutions for one period and field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryProfile {
    pub country: String,
    pub period: Period,
    pub field: String,
    pub counting: Counting,
    pub p: f64,
    pub p_top50: f64,
    pub p_top10: f64,
    pub p_top5: f64,
    /// As summed from the source; kept for audit only.
    pub p_top1_reported: f64,
    /// `P · e_p²`; this replaces the reported value in every analysis.
    pub p_top1_derived: f64,
    pub p_top01: f64,
    pub p_top001: f64,
    /// Proxy estimate; `None` when `P_top10% / P` is 0 or 1.
    pub ep: Option<EpEstimate>,
    pub institutions: usize,
}

impl CountryProfile {
    /// `P_top10% / P`.
    pub fn ratio(&self) -> f64 {
        self.p_top10 / self.p
    }

    /// Reported counts at x = 50, 10, 5, 1 as a profile for [`crate::percentile_model::fit_ep`].
    pub fn percentile_profile(&self) -> Result<PercentileProfile, ModelError> {
        PercentileProfile::new(
            self.p,
            [
                (50.0, self.p_top50),
                (10.0, self.p_top10),
                (5.0, self.p_top5),
                (1.0, self.p_top1_reported),
            ],
        )
    }
}

/// One profile per country with `P > 0`, in country-code order.
///
/// Records outside `period` / `field` are ignored. Within a country, counts are
/// pairwise-summed in input order.
pub fn aggregate(
    records: &[InstitutionRecord],
    period: Period,
    field: &str,
) -> Result<Vec<CountryProfile>, AggregationError> {
    let wanted = field.trim().to_lowercase();
    let selected: Vec<&InstitutionRecord> = records
        .iter()
        .filter(|r| r.period == period && r.field.to_lowercase() == wanted)
        .collect();
    let Some(first) = selected.first() else {
        return Err(AggregationError::NoRecords {
            period,
            field: field.to_string(),
        });
    };
    let counting = first.counting;
    if selected.iter().any(|r| r.counting != counting) {
        return Err(AggregationError::MixedCounting);
    }
    let field_label = first.field.clone();

    let mut by_country: BTreeMap<&str, Vec<&InstitutionRecord>> = BTreeMap::new();
    for r in &selected {
        by_country.entry(r.country.as_str()).or_default().push(r);
    }

    let mut out = Vec::with_capacity(by_country.len());
    for (country, rows) in by_country {
        let sum = |get: fn(&InstitutionRecord) -> f64| -> f64 {
            let values: Vec<f64> = rows.iter().map(|r| get(r)).collect();
            pairwise_sum(&values)
        };
        let p = sum(|r| r.p);
        if p <= 0.0 {
            continue;
        }
        let p_top10 = sum(|r| r.p_top10);
        let ep = ep_proxy(p, p_top10).ok();
        let ratio = p_top10 / p;
        let derived = |x: f64, k: i32| -> Result<f64, ModelError> {
            match &ep {
                Some(e) => extrapolate(p, e, x),
                None => Ok(p * ratio.powi(k)),
            }
        };
        out.push(CountryProfile {
            country: country.to_string(),
            period,
            field: field_label.clone(),
            counting,
            p,
            p_top50: sum(|r| r.p_top50),
            p_top10,
            p_top5: sum(|r| r.p_top5),
            p_top1_reported: sum(|r| r.p_top1),
            p_top1_derived: derived(1.0, 2)?,
            p_top01: derived(0.1, 3)?,
            p_top001: derived(0.01, 4)?,
            ep,
            institutions: rows.len(),
        });
    }
    Ok(out)
}

/// A profile paired with economy (and optionally patent) data for one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryYearJoin {
    pub country: String,
    pub period: Period,
    pub profile: CountryProfile,
    pub economy: EconomyRecord,
    pub patents: Option<f64>,
    /// Patent families per billion US$ of GDP.
    pub patents_per_billion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinOutput {
    pub joins: Vec<CountryYearJoin>,
    pub warnings: Vec<String>,
}

/// Joins on country code for `reference_year`. Profiles without economy data
/// are dropped with a warning; profiles without patent data keep `None`.
pub fn join_economy(
    profiles: &[CountryProfile],
    economy: &[EconomyRecord],
    patents: &[PatentRecord],
    reference_year: i32,
) -> Result<JoinOutput, AggregationError> {
    let econ: BTreeMap<&str, &EconomyRecord> = economy
        .iter()
        .filter(|e| e.year == reference_year)
        .map(|e| (e.country.as_str(), e))
        .collect();
    let pats: BTreeMap<&str, f64> = patents
        .iter()
        .filter(|p| p.year == reference_year)
        .map(|p| (p.country.as_str(), p.families))
        .collect();

    let mut joins = Vec::new();
    let mut warnings = Vec::new();
    for profile in profiles {
        let Some(e) = econ.get(profile.country.as_str()) else {
            warnings.push(format!(
                "{}: no economy data for {reference_year}; excluded from joined analyses",
                profile.country
            ));
            continue;
        };
        let families = pats.get(profile.country.as_str()).copied();
        let patents_per_billion = match families {
            Some(f) if e.gdp_usd > 0.0 => Some(f / (e.gdp_usd / 1e9)),
            _ => None,
        };
        joins.push(CountryYearJoin {
            country: profile.country.clone(),
            period: profile.period,
            profile: profile.clone(),
            economy: (*e).clone(),
            patents: families,
            patents_per_billion,
        });
    }
    if joins.is_empty() {
        return Err(AggregationError::NoJoinableCountries { year: reference_year });
    }
    Ok(JoinOutput { joins, warnings })
}
