//! The percentile power law.
//!
//! The share of a unit's papers that reach the global top `x`% follows
//! `e_p^(2 - lg x)`, where `e_p` is the probability of reaching the top 10%.
//! Equivalently `count(x) = P · (x/100)^alpha` with `e_p = 10^(-alpha)`.
//!
//! `e_p` is estimated either from the ratio `P_top10% / P` ([`ep_proxy`]) or by
//! a log-log least-squares fit over several top-percentile counts ([`fit_ep`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("P is zero; e_p is undefined")]
    ZeroDenominator,
    #[error("e_p = {0} lies outside (0, 1); the unit cannot be modeled")]
    DegenerateEp(f64),
    #[error("invalid count: {0}")]
    InvalidCount(String),
    #[error("percentile {0} outside (0, 100]")]
    InvalidPercentile(f64),
    #[error("invalid percentile profile: {0}")]
    InvalidProfile(String),
    #[error("need at least {needed} positive percentile counts, found {found}")]
    InsufficientPoints { needed: usize, found: usize },
    #[error("fitted exponent {0} is not positive")]
    NonPositiveAlpha(f64),
}

/// Minimum number of positive (x, count) points for [`fit_ep`], counting x = 100.
pub const MIN_FIT_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpMethod {
    Proxy,
    Fit,
}

/// An `e_p` value in the open interval (0, 1) together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpEstimate {
    value: f64,
    method: EpMethod,
    alpha: f64,
    residual_rms: f64,
    points_used: usize,
}

impl EpEstimate {
    /// A proxy estimate with a known value, e.g. one supplied by a user.
    pub fn from_value(value: f64) -> Result<Self, ModelError> {
        if !(value > 0.0 && value < 1.0) {
            return Err(ModelError::DegenerateEp(value));
        }
        Ok(EpEstimate {
            value,
            method: EpMethod::Proxy,
            alpha: -value.log10(),
            residual_rms: 0.0,
            points_used: 0,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn method(&self) -> EpMethod {
        self.method
    }

    /// Power-law exponent; `value == 10^(-alpha)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn residual_rms(&self) -> f64 {
        self.residual_rms
    }

    pub fn points_used(&self) -> usize {
        self.points_used
    }
}

/// Paper counts of one unit at several top percentiles.
///
/// Points are kept sorted by descending `x`. Counts never increase as `x`
/// decreases, never exceed `p`, and the count at `x = 100` (if given) is `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileProfile {
    p: f64,
    counts: Vec<(f64, f64)>,
}

impl PercentileProfile {
    pub fn new(p: f64, counts: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, ModelError> {
        if !(p.is_finite() && p >= 0.0) {
            return Err(ModelError::InvalidCount(format!("P = {p}")));
        }
        let mut counts: Vec<(f64, f64)> = counts.into_iter().collect();
        for &(x, c) in &counts {
            check_percentile(x)?;
            if !(c.is_finite() && c >= 0.0) {
                return Err(ModelError::InvalidCount(format!("count {c} at x = {x}")));
            }
            if c > p {
                return Err(ModelError::InvalidProfile(format!(
                    "count {c} at x = {x} exceeds P = {p}"
                )));
            }
            if x == 100.0 && c != p {
                return Err(ModelError::InvalidProfile(format!(
                    "count at x = 100 is {c}, expected P = {p}"
                )));
            }
        }
        counts.sort_by(|a, b| b.0.total_cmp(&a.0));
        for pair in counts.windows(2) {
            let ((x_hi, c_hi), (x_lo, c_lo)) = (pair[0], pair[1]);
            if x_hi == x_lo {
                return Err(ModelError::InvalidProfile(format!("duplicate percentile {x_hi}")));
            }
            if c_lo > c_hi {
                return Err(ModelError::InvalidProfile(format!(
                    "count {c_lo} at x = {x_lo} exceeds count {c_hi} at x = {x_hi}"
                )));
            }
        }
        Ok(PercentileProfile { p, counts })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `(x, count)` pairs, descending in `x`.
    pub fn counts(&self) -> &[(f64, f64)] {
        &self.counts
    }

    /// Points the fit uses: every positive count, plus `(100, P)` when absent.
    fn fit_points(&self) -> Vec<(f64, f64)> {
        let mut points: Vec<(f64, f64)> = self.counts.iter().copied().filter(|&(_, c)| c > 0.0).collect();
        if self.p > 0.0 && !self.counts.iter().any(|&(x, _)| x == 100.0) {
            points.insert(0, (100.0, self.p));
        }
        points
    }
}

fn check_percentile(x: f64) -> Result<(), ModelError> {
    if x > 0.0 && x <= 100.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidPercentile(x))
    }
}

/// `e_p ≈ P_top10% / P`.
pub fn ep_proxy(p: f64, p_top10: f64) -> Result<EpEstimate, ModelError> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(ModelError::InvalidCount(format!("P = {p}")));
    }
    if !(p_top10.is_finite() && p_top10 >= 0.0) {
        return Err(ModelError::InvalidCount(format!("P_top10% = {p_top10}")));
    }
    if p == 0.0 {
        return Err(ModelError::ZeroDenominator);
    }
    EpEstimate::from_value(p_top10 / p)
}

/// Ordinary least squares of `log10(count)` on `log10(x)`; the slope is `alpha`.
pub fn fit_ep(profile: &PercentileProfile) -> Result<EpEstimate, ModelError> {
    let points = profile.fit_points();
    if points.len() < MIN_FIT_POINTS {
        return Err(ModelError::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            found: points.len(),
        });
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|&(x, _)| x.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|&(_, c)| c.log10()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let alpha = sxy / sxx;
    if !(alpha > 0.0) {
        return Err(ModelError::NonPositiveAlpha(alpha));
    }
    let intercept = my - alpha * mx;
    let sq: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (intercept + alpha * x);
            r * r
        })
        .sum();
    let value = 10f64.powf(-alpha);
    if !(value > 0.0) {
        return Err(ModelError::DegenerateEp(value));
    }
    Ok(EpEstimate {
        value,
        method: EpMethod::Fit,
        alpha,
        residual_rms: (sq / n).sqrt(),
        points_used: points.len(),
    })
}

/// Probability that one paper lands in the top `x`%: `e_p^(2 - lg x)`.
pub fn prob_top(ep: &EpEstimate, x: f64) -> Result<f64, ModelError> {
    check_percentile(x)?;
    if x == 100.0 {
        return Ok(1.0);
    }
    Ok(ep.value.powf(2.0 - x.log10()))
}

/// Expected number of a unit's `p` papers in the top `x`%.
pub fn extrapolate(p: f64, ep: &EpEstimate, x: f64) -> Result<f64, ModelError> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(ModelError::InvalidCount(format!("P = {p}")));
    }
    Ok(p * prob_top(ep, x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedEvents {
    pub events_per_year: f64,
    pub years_per_event: f64,
}

/// How often a unit publishing `annual_p` papers a year produces a top-`x`% paper.
pub fn expected_events(annual_p: f64, ep: &EpEstimate, x: f64) -> Result<ExpectedEvents, ModelError> {
    if !(annual_p.is_finite() && annual_p > 0.0) {
        return Err(ModelError::InvalidCount(format!("annual papers = {annual_p}")));
    }
    let events_per_year = annual_p * prob_top(ep, x)?;
    Ok(ExpectedEvents {
        events_per_year,
        years_per_event: 1.0 / events_per_year,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ep(v: f64) -> EpEstimate {
        EpEstimate::from_value(v).unwrap()
    }

    fn exact_profile(p: f64, alpha: f64, xs: &[f64]) -> PercentileProfile {
        PercentileProfile::new(p, xs.iter().map(|&x| (x, p * (x / 100.0).powf(alpha)))).unwrap()
    }

    #[test]
    fn proxy_is_ratio() {
        let e = ep_proxy(1000.0, 100.0).unwrap();
        assert_eq!(e.value(), 0.1);
        assert_eq!(e.method(), EpMethod::Proxy);
        assert_eq!(e.points_used(), 0);
        assert_eq!(e.residual_rms(), 0.0);
        assert!((e.value() - 10f64.powf(-e.alpha())).abs() <= 1e-12);
    }

    #[test]
    fn proxy_four_year_country() {
        let p = 15000.0 * 4.0;
        assert_relative_eq!(ep_proxy(p, p * 0.05).unwrap().value(), 0.05, max_relative = 1e-15);
    }

    #[test]
    fn proxy_boundaries() {
        assert_eq!(ep_proxy(10.0, 10.0), Err(ModelError::DegenerateEp(1.0)));
        assert_eq!(ep_proxy(10.0, 0.0), Err(ModelError::DegenerateEp(0.0)));
        assert_eq!(ep_proxy(0.0, 0.0), Err(ModelError::ZeroDenominator));
        assert!(matches!(ep_proxy(10.0, 11.0), Err(ModelError::DegenerateEp(_))));
    }

    #[test]
    fn fit_exact_unit_exponent() {
        let profile =
            PercentileProfile::new(1000.0, [(50.0, 500.0), (10.0, 100.0), (5.0, 50.0), (1.0, 10.0)]).unwrap();
        let e = fit_ep(&profile).unwrap();
        assert_relative_eq!(e.alpha(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.value(), 0.1, epsilon = 1e-12);
        assert!(e.residual_rms() < 1e-12);
        assert_eq!(e.points_used(), 5);
        assert_eq!(e.method(), EpMethod::Fit);
    }

    #[test]
    fn fit_rounded_counts_recover_generating_exponent() {
        // counts = round(1000 * (x/100)^0.8, 2); numpy.polyfit on the same five
        // log10 points gives slope 0.7999904961094105
        let profile = PercentileProfile::new(
            1000.0,
            [(50.0, 574.35), (10.0, 158.49), (5.0, 91.03), (1.0, 25.12)],
        )
        .unwrap();
        let e = fit_ep(&profile).unwrap();
        assert_relative_eq!(e.alpha(), 0.799_990_496_109_410_5, epsilon = 1e-12);
        assert_relative_eq!(e.value(), 0.158_492_787_587_740_8, epsilon = 1e-12);
        assert!((e.alpha() - 0.8).abs() < 1e-4);
        assert!(e.residual_rms() > 0.0 && e.residual_rms() < 1e-4);
    }

    #[test]
    fn fit_needs_three_points() {
        let profile = PercentileProfile::new(1000.0, [(10.0, 100.0)]).unwrap();
        assert_eq!(
            fit_ep(&profile),
            Err(ModelError::InsufficientPoints { needed: 3, found: 2 })
        );
        let zeros = PercentileProfile::new(1000.0, [(10.0, 100.0), (5.0, 0.0), (1.0, 0.0)]).unwrap();
        assert!(matches!(fit_ep(&zeros), Err(ModelError::InsufficientPoints { found: 2, .. })));
    }

    #[test]
    fn fit_flat_profile_has_no_positive_alpha() {
        let flat = PercentileProfile::new(10.0, [(50.0, 10.0), (10.0, 10.0), (1.0, 10.0)]).unwrap();
        assert!(matches!(fit_ep(&flat), Err(ModelError::NonPositiveAlpha(_))));
    }

    #[test]
    fn profile_validation() {
        assert!(PercentileProfile::new(10.0, [(10.0, 11.0)]).is_err());
        assert!(PercentileProfile::new(10.0, [(10.0, 5.0), (1.0, 6.0)]).is_err());
        assert!(PercentileProfile::new(10.0, [(100.0, 9.0)]).is_err());
        assert!(PercentileProfile::new(10.0, [(0.0, 1.0)]).is_err());
        assert!(PercentileProfile::new(10.0, [(10.0, 1.0), (10.0, 1.0)]).is_err());
        let ok = PercentileProfile::new(10.0, [(1.0, 0.1), (100.0, 10.0), (10.0, 1.0)]).unwrap();
        assert_eq!(ok.counts()[0].0, 100.0);
    }

    #[test]
    fn prob_top_examples() {
        assert_eq!(prob_top(&ep(0.37), 100.0).unwrap(), 1.0);
        assert_relative_eq!(prob_top(&ep(0.1), 10.0).unwrap(), 0.1, max_relative = 1e-15);
        // mpmath, 50 digits: 0.05^(2 - log10 0.005)
        assert_relative_eq!(
            prob_top(&ep(0.05), 0.005).unwrap(),
            2.536_477_203_068_478_4e-6,
            max_relative = 1e-12
        );
        assert_eq!(prob_top(&ep(0.1), 0.0), Err(ModelError::InvalidPercentile(0.0)));
        assert_eq!(prob_top(&ep(0.1), 100.5), Err(ModelError::InvalidPercentile(100.5)));
        assert!(prob_top(&ep(0.1), f64::NAN).is_err());
    }

    #[test]
    fn extrapolate_examples() {
        let e = ep(0.1);
        assert_relative_eq!(extrapolate(1000.0, &e, 10.0).unwrap(), 100.0, max_relative = 1e-14);
        assert_relative_eq!(extrapolate(1000.0, &e, 1.0).unwrap(), 10.0, max_relative = 1e-14);
        assert_relative_eq!(extrapolate(1000.0, &e, 0.1).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(extrapolate(1000.0, &e, 0.01).unwrap(), 0.1, max_relative = 1e-14);
        // mpmath: 60000 * 0.05^(2 - log10 0.005)
        assert_relative_eq!(
            extrapolate(60000.0, &ep(0.05), 0.005).unwrap(),
            0.152_188_632_184_108_7,
            max_relative = 1e-12
        );
        assert!(extrapolate(-1.0, &e, 1.0).is_err());
    }

    #[test]
    fn expected_events_worked_examples() {
        // mpmath, 50 digits
        let cases = [
            (15000.0, 0.05, 26.283_172_025_365_464),
            (10000.0, 0.015, 6_993.365_136_606_798),
            (5000.0, 0.12, 1.825_992_868_242_541),
        ];
        for (annual, e, years) in cases {
            let got = expected_events(annual, &ep(e), 0.005).unwrap();
            assert_relative_eq!(got.years_per_event, years, max_relative = 1e-10);
            assert_relative_eq!(got.events_per_year * got.years_per_event, 1.0, max_relative = 1e-15);
        }
        assert!(expected_events(0.0, &ep(0.1), 1.0).is_err());
    }

    proptest! {
        #[test]
        fn prob_top_increasing_in_x(v in 0.001f64..0.999, x1 in 0.001f64..100.0, x2 in 0.001f64..100.0) {
            prop_assume!(x1 < x2);
            let e = ep(v);
            prop_assert!(prob_top(&e, x1).unwrap() < prob_top(&e, x2).unwrap());
        }

        #[test]
        fn prob_top_increasing_in_ep(v1 in 0.001f64..0.999, v2 in 0.001f64..0.999, x in 0.001f64..99.9) {
            prop_assume!(v1 < v2);
            prop_assert!(prob_top(&ep(v1), x).unwrap() < prob_top(&ep(v2), x).unwrap());
        }

        #[test]
        fn prob_top_at_100_is_one(v in 1e-9f64..0.999_999) {
            prop_assert_eq!(prob_top(&ep(v), 100.0).unwrap(), 1.0);
        }

        #[test]
        fn prob_top_composition(v in 0.01f64..0.99) {
            let e = ep(v);
            for x in [10.0f64, 1.0, 0.1, 0.01] {
                let direct = prob_top(&e, x).unwrap();
                let composed = v.powi(2) * v.powf(-x.log10());
                prop_assert!((direct - composed).abs() <= 1e-12 * composed);
            }
        }

        #[test]
        fn fit_recovers_exact_exponent(alpha in 0.3f64..1.5, p in 100.0f64..1e6) {
            let e = fit_ep(&exact_profile(p, alpha, &[50.0, 10.0, 5.0, 1.0])).unwrap();
            prop_assert!((e.alpha() - alpha).abs() <= 1e-9);
            prop_assert!((e.value() - 10f64.powf(-e.alpha())).abs() <= 1e-12);
        }

        #[test]
        fn proxy_and_fit_agree_on_exact_power_law(alpha in 0.3f64..1.5, p in 100.0f64..1e6) {
            let profile = exact_profile(p, alpha, &[50.0, 10.0, 5.0, 1.0]);
            let p_top10 = profile.counts().iter().find(|&&(x, _)| x == 10.0).unwrap().1;
            let proxy = ep_proxy(p, p_top10).unwrap();
            let fit = fit_ep(&profile).unwrap();
            prop_assert!((proxy.value() - fit.value()).abs() <= 1e-12);
        }

        #[test]
        fn extrapolate_linear_in_p(p in 0.0f64..1e6, a in 0.0f64..1e3, v in 0.01f64..0.99, x in 0.001f64..100.0) {
            let e = ep(v);
            let lhs = extrapolate(a * p, &e, x).unwrap();
            let rhs = a * extrapolate(p, &e, x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE));
        }
    }
}
