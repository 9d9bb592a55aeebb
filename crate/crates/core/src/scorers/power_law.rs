//! Shared maximum-likelihood exponent estimator for the social and
//! categorical power laws.

/// Estimate the power-law exponent from per-pair frequencies:
/// `1 + n_pairs / Σ ln(1 + x)` over all (user, POI) pairs.
///
/// Zero frequencies contribute ln(1) = 0, so callers may pass only the
/// nonzero values as long as `n_pairs` counts every pair. Returns `None`
/// when the sum is zero (no signal anywhere) — the degenerate case where
/// the context scores are defined as 0.
pub fn power_law_exponent(frequencies: impl IntoIterator<Item = f64>, n_pairs: u64) -> Option<f64> {
    let sum: f64 = frequencies.into_iter().map(|x| (1.0 + x).ln()).sum();
    if sum <= 0.0 {
        return None;
    }
    Some(1.0 + n_pairs as f64 / sum)
}

/// Cumulative power-law score `1 − (1 + x)^(1−exponent)`, in [0, 1) for
/// exponent > 1 and x ≥ 0.
pub fn power_law_score(x: f64, exponent: f64) -> f64 {
    1.0 - (1.0 + x).powf(1.0 - exponent)
}
