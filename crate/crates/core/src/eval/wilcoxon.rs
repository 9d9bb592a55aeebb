//! Wilcoxon signed-rank test, Holm step-down correction, and the
//! critical-difference ranking of model configurations.

use serde::{Deserialize, Serialize};

use super::special::normal_cdf;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    /// Pairs left after dropping zero differences.
    pub n_nonzero: usize,
    /// All differences were zero.
    pub degenerate: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped. With ≤ 25 informative pairs the exact
/// permutation distribution of W+ (conditional on the observed ranks) is
/// enumerated; larger samples use the normal approximation with tie
/// correction and no continuity correction.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(CoreError::InvalidConfig(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            n_nonzero: 0,
            degenerate: true,
        });
    }

    // Rank |d| ascending with average ranks on ties.
    diffs.sort_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap());
    let mut ranks = vec![0.0; n];
    let mut tie_sizes: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[j + 1].abs() == diffs[i].abs() {
            j += 1;
        }
        let avg_rank = (i + j + 2) as f64 / 2.0; // 1-based average
        for r in ranks.iter_mut().take(j + 1).skip(i) {
            *r = avg_rank;
        }
        tie_sizes.push(j + 1 - i);
        i = j + 1;
    }
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total: f64 = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_minus = total - w_plus;

    let p_value = if n <= 25 {
        exact_two_sided_p(&ranks, w_plus)
    } else {
        let mean = total / 2.0;
        let tie_term: f64 = tie_sizes
            .iter()
            .map(|&t| (t * t * t - t) as f64)
            .sum::<f64>()
            / 48.0;
        let var = n as f64 * (n as f64 + 1.0) * (2.0 * n as f64 + 1.0) / 24.0 - tie_term;
        if var <= 0.0 {
            1.0
        } else {
            let z = (w_plus - mean) / var.sqrt();
            (2.0 * (1.0 - normal_cdf(z.abs()))).clamp(0.0, 1.0)
        }
    };

    Ok(WilcoxonResult {
        w_plus,
        w_minus,
        p_value,
        n_nonzero: n,
        degenerate: false,
    })
}

/// Exact two-sided p via the distribution of W+ under random sign flips,
/// conditional on the observed (possibly tied) ranks. Doubled ranks keep
/// the dynamic program integral.
fn exact_two_sided_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let mut counts = vec![0f64; max_sum + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=max_sum).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total = 2f64.powi(ranks.len() as i32);
    let w2 = (2.0 * w_plus).round() as usize;
    let below: f64 = counts[..=w2.min(max_sum)].iter().sum();
    let above: f64 = counts[w2.min(max_sum)..].iter().sum();
    (2.0 * (below.min(above)) / total).clamp(0.0, 1.0)
}

/// Holm step-down adjusted p-values, same order as the input.
pub fn holm_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].partial_cmp(&p_values[j]).unwrap());
    let mut adjusted = vec![0.0; m];
    let mut running_max: f64 = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p_values[idx]).min(1.0);
        running_max = running_max.max(scaled);
        adjusted[idx] = running_max;
    }
    adjusted
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairwiseComparison {
    /// Indices into the label list.
    pub model_a: usize,
    pub model_b: usize,
    pub w_plus: f64,
    pub p_raw: f64,
    pub p_holm: f64,
    pub significant: bool,
}

/// Critical-difference ranking: average ranks per model plus cliques of
/// mutually non-significant models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdRanking {
    pub labels: Vec<String>,
    /// Average rank per model (1 = best), aligned with `labels`.
    pub average_ranks: Vec<f64>,
    /// Model indices sorted by average rank, best first.
    pub order: Vec<usize>,
    /// Maximal groups (size ≥ 2) of adjacent models with no significant
    /// pairwise difference inside the group. Indices into `labels`.
    pub cliques: Vec<Vec<usize>>,
    pub pairwise: Vec<PairwiseComparison>,
    pub alpha: f64,
}

/// Per-user ranks (1 = highest value) with average-rank tie handling.
pub fn rank_row(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
    let mut ranks = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Wilcoxon–Holm critical-difference analysis over M models evaluated on
/// the same users. `per_model_values[m][u]` is model m's metric for user u.
pub fn wilcoxon_holm_cd(
    per_model_values: &[Vec<f64>],
    labels: &[String],
    alpha: f64,
) -> Result<CdRanking> {
    let m = per_model_values.len();
    if m < 2 {
        return Err(CoreError::TooFew {
            needed: 2,
            got: m,
            what: "models".into(),
        });
    }
    if labels.len() != m {
        return Err(CoreError::InvalidConfig("one label per model required".into()));
    }
    let n_users = per_model_values[0].len();
    if per_model_values.iter().any(|v| v.len() != n_users) {
        return Err(CoreError::InvalidConfig(
            "every model must cover the same evaluated-user set".into(),
        ));
    }
    if n_users == 0 {
        return Err(CoreError::TooFew {
            needed: 1,
            got: 0,
            what: "evaluated users".into(),
        });
    }

    // Average rank per model over per-user rankings.
    let mut rank_sums = vec![0.0; m];
    let mut row = Vec::with_capacity(m);
    for u in 0..n_users {
        row.clear();
        row.extend(per_model_values.iter().map(|v| v[u]));
        for (s, r) in rank_sums.iter_mut().zip(rank_row(&row)) {
            *s += r;
        }
    }
    let average_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n_users as f64).collect();

    // All pairwise signed-rank tests with Holm correction.
    let mut pairs = Vec::new();
    let mut raw_ps = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let w = wilcoxon_signed_rank(&per_model_values[i], &per_model_values[j])?;
            raw_ps.push(w.p_value);
            pairs.push((i, j, w.w_plus));
        }
    }
    let holm = holm_adjust(&raw_ps);
    let pairwise: Vec<PairwiseComparison> = pairs
        .into_iter()
        .zip(raw_ps.iter().zip(&holm))
        .map(|((a, b, w_plus), (&p_raw, &p_holm))| PairwiseComparison {
            model_a: a,
            model_b: b,
            w_plus,
            p_raw,
            p_holm,
            significant: p_holm < alpha,
        })
        .collect();

    // Order by average rank (best first); cliques are maximal runs of
    // adjacent models whose pairs are all non-significant.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        average_ranks[i]
            .partial_cmp(&average_ranks[j])
            .unwrap()
            .then(i.cmp(&j))
    });
    let significant = |a: usize, b: usize| {
        pairwise
            .iter()
            .any(|p| ((p.model_a, p.model_b) == (a.min(b), a.max(b))) && p.significant)
    };
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut covered_until = 0usize;
    for start in 0..m {
        let mut end = start;
        'grow: while end + 1 < m {
            for inner in start..=end {
                if significant(order[inner], order[end + 1]) {
                    break 'grow;
                }
            }
            end += 1;
        }
        if end > start && end + 1 > covered_until {
            cliques.push(order[start..=end].to_vec());
            covered_until = end + 1;
        }
    }

    Ok(CdRanking {
        labels: labels.to_vec(),
        average_ranks,
        order,
        cliques,
        pairwise,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_case_matches_reference() {
        // Frozen from an independent statistics package (exact mode):
        // W = min(W+, W−) = 15, p = 0.7421875.
        let a = [1.1, 2.3, 0.5, 4.2, 3.3, 2.2, 5.0, 1.9];
        let b = [0.8, 2.9, 0.1, 3.9, 3.9, 1.0, 4.2, 2.5];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.w_plus.min(r.w_minus), 15.0);
        assert!((r.p_value - 0.7421875).abs() < 1e-12, "{}", r.p_value);
    }

    #[test]
    fn large_sample_matches_reference_normal_approximation() {
        // 40 tie-free pairs; statistic and p frozen from the reference
        // implementation (approx mode, no continuity correction).
        let a: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, x)| x + 0.15 + (i as f64 * 0.91).cos() * 0.3)
            .collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.n_nonzero, 40);
        assert_eq!(r.w_plus.min(r.w_minus), 163.0);
        assert!(
            (r.p_value - 0.0009001730774326844).abs() < 1e-12,
            "{}",
            r.p_value
        );
    }

    #[test]
    fn identical_samples_are_degenerate() {
        let a = [0.5, 0.5, 1.0];
        let r = wilcoxon_signed_rank(&a, &a).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn holm_all_ones_stays_ones() {
        let adjusted = holm_adjust(&[1.0, 1.0, 1.0]);
        assert_eq!(adjusted, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn holm_orders_and_caps() {
        let adjusted = holm_adjust(&[0.01, 0.04, 0.03, 0.005]);
        // Sorted: 0.005·4=0.02, 0.01·3=0.03, 0.03·2=0.06, 0.04·1=0.06(max kept)
        assert!((adjusted[3] - 0.02).abs() < 1e-12);
        assert!((adjusted[0] - 0.03).abs() < 1e-12);
        assert!((adjusted[2] - 0.06).abs() < 1e-12);
        assert!((adjusted[1] - 0.06).abs() < 1e-12);
    }

    #[test]
    fn rank_row_averages_ties_and_sums_correctly() {
        let ranks = rank_row(&[0.9, 0.3, 0.9, 0.1]);
        assert_eq!(ranks, vec![1.5, 3.0, 1.5, 4.0]);
        let m = ranks.len() as f64;
        assert_eq!(ranks.iter().sum::<f64>(), m * (m + 1.0) / 2.0);
    }

    #[test]
    fn planted_order_recovers_ranks_without_cliques() {
        let n = 40;
        let a: Vec<f64> = (0..n).map(|i| 0.8 + 0.001 * (i as f64).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| 0.5 + 0.001 * (i as f64).cos()).collect();
        let c: Vec<f64> = (0..n).map(|i| 0.2 + 0.001 * (i as f64 * 2.0).sin()).collect();
        let labels = vec!["A".into(), "B".into(), "C".into()];
        let cd = wilcoxon_holm_cd(&[a, b, c], &labels, 0.05).unwrap();
        assert_eq!(cd.average_ranks, vec![1.0, 2.0, 3.0]);
        assert!(cd.cliques.is_empty(), "cliques: {:?}", cd.cliques);
        assert_eq!(cd.order, vec![0, 1, 2]);
    }

    #[test]
    fn identical_models_form_one_clique() {
        let vals: Vec<f64> = (0..20).map(|i| (i as f64 * 0.11).cos()).collect();
        let labels = vec!["A".into(), "B".into()];
        let cd = wilcoxon_holm_cd(&[vals.clone(), vals], &labels, 0.05).unwrap();
        assert_eq!(cd.cliques.len(), 1);
        assert_eq!(cd.cliques[0].len(), 2);
        assert_eq!(cd.average_ranks[0], cd.average_ranks[1]);
    }

    #[test]
    fn single_model_errors() {
        let labels = vec!["A".into()];
        assert!(wilcoxon_holm_cd(&[vec![1.0, 2.0]], &labels, 0.05).is_err());
    }
}
