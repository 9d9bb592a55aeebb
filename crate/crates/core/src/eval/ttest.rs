//! Two-tailed paired t-test.

use serde::{Deserialize, Serialize};

use super::special::student_t_two_tailed_p;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
    pub mean_diff: f64,
    /// Zero-variance differences: p is 1.0 for identical samples and 0.0
    /// for a nonzero constant shift, with no t statistic to speak of.
    pub degenerate: bool,
}

impl TTestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Paired t-test over per-user values of two models.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(CoreError::InvalidConfig(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(CoreError::TooFew {
            needed: 2,
            got: n,
            what: "paired observations".into(),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let dof = n - 1;

    if var == 0.0 {
        let (stat, p) = if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        };
        return Ok(TTestResult {
            statistic: stat,
            p_value: p,
            dof,
            mean_diff: mean,
            degenerate: true,
        });
    }
    let se = (var / n as f64).sqrt();
    let t = mean / se;
    Ok(TTestResult {
        statistic: t,
        p_value: student_t_two_tailed_p(t, dof),
        dof,
        mean_diff: mean,
        degenerate: false,
    })
}
