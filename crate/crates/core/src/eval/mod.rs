//! Top-K ranking metrics, paired significance testing, and Wilcoxon–Holm
//! critical-difference ranking.

mod metrics;
mod special;
mod ttest;
mod wilcoxon;

pub use metrics::{ndcg_at_k, precision_at_k, recall_at_k};
pub use special::{betainc, erfc, ln_gamma, normal_cdf, student_t_two_tailed_p};
pub use ttest::{paired_ttest, TTestResult};
pub use wilcoxon::{
    holm_adjust, rank_row, wilcoxon_holm_cd, wilcoxon_signed_rank, CdRanking,
    PairwiseComparison, WilcoxonResult,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    Precision,
    Recall,
    Ndcg,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Precision, MetricKind::Recall, MetricKind::Ndcg];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Precision => "Pre",
            MetricKind::Recall => "Rec",
            MetricKind::Ndcg => "nDCG",
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One model's per-user values and mean for a (metric, K) cell. Users with
/// empty test sets are excluded before this is built.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricResult {
    pub model: String,
    pub metric: MetricKind,
    pub k: usize,
    pub per_user: Vec<f64>,
    pub mean: f64,
}

impl MetricResult {
    pub fn from_values(model: &str, metric: MetricKind, k: usize, per_user: Vec<f64>) -> Self {
        let mean = if per_user.is_empty() {
            0.0
        } else {
            per_user.iter().sum::<f64>() / per_user.len() as f64
        };
        Self {
            model: model.to_owned(),
            metric,
            k,
            per_user,
            mean,
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        let n = self.per_user.len();
        if n < 2 {
            return 0.0;
        }
        let var = self
            .per_user
            .iter()
            .map(|v| (v - self.mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        (var / n as f64).sqrt()
    }
}
