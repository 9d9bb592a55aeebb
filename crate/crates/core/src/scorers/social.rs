//! Social context: cumulative power law over friends' check-in frequency.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::power_law::{power_law_exponent, power_law_score};
use super::{Context, ContextScorer};
use crate::data::{FrequencyMatrix, PoiId, SocialGraph, UserId};
use crate::error::{CoreError, Result};

/// Fitted social scorer: the exponent β and, per user, the aggregated
/// friend check-in frequency x(u, l) as a sparse row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialPowerLawModel {
    pub beta: f64,
    /// Set when every social frequency is zero; all scores are then 0.
    pub degenerate: bool,
    rows: Vec<BTreeMap<u32, f64>>,
    n_pois: usize,
}

/// Aggregate friend frequencies and estimate β over all (user, POI) pairs.
pub fn fit_social(matrix: &FrequencyMatrix, social: &SocialGraph) -> SocialPowerLawModel {
    let n_users = matrix.n_users();
    let mut rows: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); n_users];
    for (u, row) in rows.iter_mut().enumerate() {
        for &friend in social.friends(UserId(u as u32)) {
            for (l, c) in matrix.user_row(friend) {
                *row.entry(l.0).or_insert(0.0) += c as f64;
            }
        }
    }
    let n_pairs = (n_users as u64) * (matrix.n_pois() as u64);
    let beta = power_law_exponent(
        rows.iter().flat_map(|r| r.values().copied()),
        n_pairs,
    );
    SocialPowerLawModel {
        beta: beta.unwrap_or(f64::NAN),
        degenerate: beta.is_none(),
        rows,
        n_pois: matrix.n_pois(),
    }
}

impl SocialPowerLawModel {
    /// Aggregated check-in frequency of u's friends on l.
    pub fn social_frequency(&self, user: UserId, poi: PoiId) -> Result<f64> {
        let row = self
            .rows
            .get(user.index())
            .ok_or(CoreError::UnknownUser(user.0))?;
        if poi.index() >= self.n_pois {
            return Err(CoreError::UnknownPoiIndex(poi.0));
        }
        Ok(row.get(&poi.0).copied().unwrap_or(0.0))
    }
}

impl ContextScorer for SocialPowerLawModel {
    fn context(&self) -> Context {
        Context::Social
    }

    fn score(&self, user: UserId, poi: PoiId) -> Result<f64> {
        let x = self.social_frequency(user, poi)?;
        if self.degenerate {
            return Ok(0.0);
        }
        Ok(power_law_score(x, self.beta))
    }
}
