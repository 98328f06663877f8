//! Correlation, simple regression and the Student t survival function.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{mean, pairwise_sum};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("input is constant")]
    ConstantInput,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

impl std::str::FromStr for CorrelationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            other => Err(format!("unknown correlation method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_two_sided: f64,
    pub n: usize,
    pub method: CorrelationMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// Population standard deviation of the residuals over the mean observation.
    pub rel_dispersion: f64,
}

fn check_pair(xs: &[f64], ys: &[f64], min: usize) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < min {
        return Err(StatsError::TooFewPoints {
            needed: min,
            got: xs.len(),
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|&v| v == values[0])
}

/// Pearson product-moment correlation with a two-sided t-test p-value.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(xs, ys, 3)?;
    if is_constant(xs) || is_constant(ys) {
        return Err(StatsError::ConstantInput);
    }
    let r = pearson_r(xs, ys);
    Ok(CorrelationResult {
        r,
        p_two_sided: correlation_p_value(r, xs.len()),
        n: xs.len(),
        method: CorrelationMethod::Pearson,
    })
}

fn pearson_r(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let dx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let dy: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let sxy: Vec<f64> = dx.iter().zip(&dy).map(|(a, b)| a * b).collect();
    let sxx: Vec<f64> = dx.iter().map(|a| a * a).collect();
    let syy: Vec<f64> = dy.iter().map(|b| b * b).collect();
    let r = pairwise_sum(&sxy) / (pairwise_sum(&sxx) * pairwise_sum(&syy)).sqrt();
    r.clamp(-1.0, 1.0)
}

/// Spearman rank correlation: Pearson on average ranks, same t approximation for p.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(xs, ys, 3)?;
    if is_constant(xs) || is_constant(ys) {
        return Err(StatsError::ConstantInput);
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let r = pearson_r(&rx, &ry);
    Ok(CorrelationResult {
        r,
        p_two_sided: correlation_p_value(r, xs.len()),
        n: xs.len(),
        method: CorrelationMethod::Spearman,
    })
}

pub fn correlate(method: CorrelationMethod, xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, StatsError> {
    match method {
        CorrelationMethod::Pearson => pearson(xs, ys),
        CorrelationMethod::Spearman => spearman(xs, ys),
    }
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn correlation_p_value(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = n - 2;
    let t = r * (df as f64 / (1.0 - r * r)).sqrt();
    (2.0 * t_sf(t.abs(), df as u32)).min(1.0)
}

/// `P(T > t)` for Student's t with `df` degrees of freedom.
pub fn t_sf(t: f64, df: u32) -> f64 {
    assert!(df >= 1, "t distribution needs df >= 1");
    if t.is_nan() {
        return f64::NAN;
    }
    if t == 0.0 {
        return 0.5;
    }
    let nu = df as f64;
    let t2 = t * t;
    // tail = P(|T| > |t|) / 2 = I_{nu/(nu+t^2)}(nu/2, 1/2) / 2
    let x = nu / (nu + t2);
    let one_minus_x = t2 / (nu + t2);
    let tail = 0.5 * reg_inc_beta(nu / 2.0, 0.5, x, one_minus_x);
    if t > 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `z > 0`.
pub fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

const CF_TOLERANCE: f64 = 1e-14;
const CF_MAX_ITER: usize = 300;
const TINY: f64 = 1e-300;

/// Regularized incomplete beta `I_x(a, b)`. `one_minus_x` is passed separately
/// so callers can supply it without cancellation.
pub fn reg_inc_beta(a: f64, b: f64, x: f64, one_minus_x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if one_minus_x <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * one_minus_x.ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, one_minus_x) / b
    }
}

/// Continued fraction for the incomplete beta, modified Lentz evaluation.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_TOLERANCE {
            break;
        }
    }
    h
}

/// Ordinary least-squares line through `(xs, ys)`.
pub fn linfit(xs: &[f64], ys: &[f64]) -> Result<RegressionFit, StatsError> {
    check_pair(xs, ys, 2)?;
    if is_constant(xs) {
        return Err(StatsError::ConstantInput);
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let slope = pairwise_sum(&sxy) / pairwise_sum(&sxx);
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    let sq: Vec<f64> = residuals.iter().map(|r| r * r).collect();
    let std = (pairwise_sum(&sq) / residuals.len() as f64).sqrt();
    let rel_dispersion = if std == 0.0 { 0.0 } else { std / my.abs() };
    Ok(RegressionFit {
        slope,
        intercept,
        residuals,
        rel_dispersion,
    })
}
