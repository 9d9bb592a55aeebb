//! Top-K ranking metrics with binary relevance.

use std::collections::BTreeSet;

use crate::data::PoiId;

/// Pre@K = hits in the top K divided by K. The denominator stays K even
/// when fewer than K items were recommended.
pub fn precision_at_k(recommended: &[PoiId], test: &BTreeSet<PoiId>, k: usize) -> f64 {
    assert!(k >= 1, "K must be ≥ 1");
    let hits = recommended
        .iter()
        .take(k)
        .filter(|p| test.contains(p))
        .count();
    hits as f64 / k as f64
}

/// Rec@K = hits in the top K divided by the number of test POIs.
pub fn recall_at_k(recommended: &[PoiId], test: &BTreeSet<PoiId>, k: usize) -> f64 {
    assert!(k >= 1, "K must be ≥ 1");
    debug_assert!(!test.is_empty(), "recall needs a nonempty test set");
    let hits = recommended
        .iter()
        .take(k)
        .filter(|p| test.contains(p))
        .count();
    hits as f64 / test.len() as f64
}

/// nDCG@K with binary relevance: DCG = Σ (2^rel_i − 1)/log2(i+1) over the
/// top K, IDCG places min(K, |test|) relevant items first.
pub fn ndcg_at_k(recommended: &[PoiId], test: &BTreeSet<PoiId>, k: usize) -> f64 {
    assert!(k >= 1, "K must be ≥ 1");
    debug_assert!(!test.is_empty(), "nDCG needs a nonempty test set");
    let dcg: f64 = recommended
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, p)| test.contains(*p))
        .map(|(i, _)| 1.0 / ((i + 2) as f64).log2())
        .sum();
    let ideal_hits = k.min(test.len());
    let idcg: f64 = (0..ideal_hits).map(|i| 1.0 / ((i + 2) as f64).log2()).sum();
    if idcg == 0.0 {
        return 0.0;
    }
    dcg / idcg
}
