//! Percentile power-law research indicators.
//!
//! The crate turns institution-level top-percentile paper counts into
//! country profiles, estimates each country's `e_p` efficiency constant,
//! extrapolates counts to rarer percentiles, and links the results to GDP,
//! population and triadic patent data.
//!
//! Modules, bottom-up:
//! - [`ingest`]: CSV loaders and country name reconciliation
//! - [`percentile_model`]: `e_p` estimation, top-percentile probabilities, expected event rates
//! - [`aggregation`]: institution records → country profiles, economy/patent joins
//! - [`stats`]: Pearson/Spearman with t-test p-values, simple regression
//! - [`analysis`]: share tables, coverage, correlation studies, patent screens, maps, series
//! - [`simulate`]: seeded Monte Carlo check of the percentile law

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail these guards

pub mod aggregation;
pub mod analysis;
pub mod ingest;
mod numeric;
pub mod percentile_model;
pub mod simulate;
pub mod stats;

pub use numeric::pairwise_sum;
