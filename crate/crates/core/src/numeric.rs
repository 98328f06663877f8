//! Summation helpers with a fixed evaluation order.

const BLOCK: usize = 8;

/// Pairwise (cascade) summation. The split points depend only on the slice
/// length, so a given input order always produces the same bits.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}
