//! Friend-based collaborative filtering: similarity-weighted average of
//! friends' check-in counts, with cosine similarity over train count vectors.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{Context, ContextScorer};
use crate::data::{FrequencyMatrix, PoiId, SocialGraph, UserId};
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcfModel {
    /// Per user: (friend, cosine similarity) with sim > 0, friend order.
    similarities: Vec<Vec<(u32, f64)>>,
    /// Friends' sparse count rows, copied so scoring is self-contained.
    rows: Vec<BTreeMap<u32, u32>>,
    n_pois: usize,
}

/// Cosine similarity of two sparse count rows.
fn cosine(a: &BTreeMap<u32, u32>, b: &BTreeMap<u32, u32>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let dot: f64 = a
        .iter()
        .filter_map(|(l, &ca)| b.get(l).map(|&cb| ca as f64 * cb as f64))
        .sum();
    if dot == 0.0 {
        return 0.0;
    }
    let norm = |r: &BTreeMap<u32, u32>| {
        r.values()
            .map(|&c| (c as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    dot / (norm(a) * norm(b))
}

pub fn fit_fcf(matrix: &FrequencyMatrix, social: &SocialGraph) -> FcfModel {
    let n_users = matrix.n_users();
    let rows: Vec<BTreeMap<u32, u32>> = (0..n_users)
        .map(|u| matrix.user_row(UserId(u as u32)).map(|(l, c)| (l.0, c)).collect())
        .collect();
    let similarities = (0..n_users)
        .map(|u| {
            social
                .friends(UserId(u as u32))
                .iter()
                .filter_map(|&f| {
                    let sim = cosine(&rows[u], &rows[f.index()]);
                    (sim > 0.0).then_some((f.0, sim))
                })
                .collect()
        })
        .collect();
    FcfModel {
        similarities,
        rows,
        n_pois: matrix.n_pois(),
    }
}

impl ContextScorer for FcfModel {
    fn context(&self) -> Context {
        Context::FriendCf
    }

    fn score(&self, user: UserId, poi: PoiId) -> Result<f64> {
        let sims = self
            .similarities
            .get(user.index())
            .ok_or(CoreError::UnknownUser(user.0))?;
        if poi.index() >= self.n_pois {
            return Err(CoreError::UnknownPoiIndex(poi.0));
        }
        let sim_total: f64 = sims.iter().map(|&(_, s)| s).sum();
        if sim_total == 0.0 {
            return Ok(0.0);
        }
        let weighted: f64 = sims
            .iter()
            .map(|&(f, s)| {
                s * self.rows[f as usize].get(&poi.0).copied().unwrap_or(0) as f64
            })
            .sum();
        Ok(weighted / sim_total)
    }
}
