//! Monte Carlo check of the percentile law.
//!
//! Paper percentiles are drawn by inverse transform from the CDF
//! `F(x) = (x/100)^alpha`, then the number landing in each top-`x`% class is
//! compared with the expected count `n · e_p^(2 - lg x)`.
//!
//! Samples are generated in fixed-size chunks. Chunk `i` uses its own ChaCha8
//! stream (`seed`, stream `i`), so results do not depend on how chunks are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::percentile_model::{prob_top, EpEstimate, ModelError};

/// Recorded in every result so runs can be reproduced exactly.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng/rand_chacha-0.9; seed_from_u64(seed), set_stream(chunk)";

/// Samples per RNG stream.
pub const CHUNK_SIZE: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("n_papers must be positive")]
    NoPapers,
    #[error("at least one percentile is required")]
    NoPercentiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    ep: EpEstimate,
    n_papers: u64,
    percentiles: Vec<f64>,
    seed: u64,
}

impl SimConfig {
    pub fn new(ep: f64, n_papers: u64, percentiles: Vec<f64>, seed: u64) -> Result<Self, SimError> {
        let ep = EpEstimate::from_value(ep)?;
        if n_papers == 0 {
            return Err(SimError::NoPapers);
        }
        if percentiles.is_empty() {
            return Err(SimError::NoPercentiles);
        }
        for &x in &percentiles {
            prob_top(&ep, x)?;
        }
        Ok(SimConfig {
            ep,
            n_papers,
            percentiles,
            seed,
        })
    }

    pub fn ep(&self) -> f64 {
        self.ep.value()
    }

    pub fn n_papers(&self) -> u64 {
        self.n_papers
    }

    pub fn percentiles(&self) -> &[f64] {
        &self.percentiles
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SimConfig { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileOutcome {
    pub x: f64,
    /// `e_p^(2 - lg x)`
    pub probability: f64,
    pub expected_count: f64,
    pub empirical_count: u64,
    /// `(empirical - expected) / sqrt(n q (1 - q))`
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub ep: f64,
    pub n_papers: u64,
    pub seed: u64,
    pub rng: String,
    pub outcomes: Vec<PercentileOutcome>,
}

/// Inverse CDF: `100 · u^(1/alpha)` for `u` in (0, 1].
pub fn sample_percentile(u: f64, ep: &EpEstimate) -> f64 {
    100.0 * u.powf(1.0 / ep.alpha())
}

fn count_chunk(config: &SimConfig, chunk: u64) -> Vec<u64> {
    let start = chunk * CHUNK_SIZE;
    let len = CHUNK_SIZE.min(config.n_papers - start);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chunk);
    let mut counts = vec![0u64; config.percentiles.len()];
    for _ in 0..len {
        // (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let x = sample_percentile(u, &config.ep);
        for (c, &limit) in counts.iter_mut().zip(&config.percentiles) {
            if x <= limit {
                *c += 1;
            }
        }
    }
    counts
}

/// Empirical counts of samples at or below each percentile, summed over chunks.
pub fn sample_counts(config: &SimConfig) -> Vec<u64> {
    let chunks = config.n_papers.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| count_chunk(config, c))
        .reduce(
            || vec![0u64; config.percentiles.len()],
            |mut acc, part| {
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
                acc
            },
        )
}

pub fn run_sim(config: &SimConfig) -> SimResult {
    let counts = sample_counts(config);
    let n = config.n_papers as f64;
    let outcomes = config
        .percentiles
        .iter()
        .zip(counts)
        .map(|(&x, empirical)| {
            let q = prob_top(&config.ep, x).expect("validated in SimConfig::new");
            let expected = n * q;
            let sd = (n * q * (1.0 - q)).sqrt();
            let diff = empirical as f64 - expected;
            let z_score = if sd > 0.0 { diff / sd } else { 0.0 };
            PercentileOutcome {
                x,
                probability: q,
                expected_count: expected,
                empirical_count: empirical,
                z_score,
            }
        })
        .collect();
    SimResult {
        ep: config.ep.value(),
        n_papers: config.n_papers,
        seed: config.seed,
        rng: RNG_ALGORITHM.to_string(),
        outcomes,
    }
}
