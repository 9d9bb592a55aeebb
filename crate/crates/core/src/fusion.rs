//! Sum-rule fusion of a base ranker with contextual scores, and top-N list
//! construction.
//!
//! Raw base and context scores live on very different scales (MF dot
//! products vs. kernel densities vs. unit-interval power laws), so the
//! default normalizes each component per user over the candidate set before
//! summing. `Normalization::None` sums raw scores.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{PoiId, UserId};
use crate::error::{CoreError, Result};
use crate::scorers::{Context, ContextScore};

/// Which trainable ranker supplies the base score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseModel {
    /// Matrix factorization.
    Mf,
    /// Neural network.
    Ncf,
    /// Pure contextual model: the base contributes 0.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    None,
    PerUserMinmax,
}

/// A model configuration: base ranker, context subset, normalization, and
/// list length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub base: BaseModel,
    pub contexts: Vec<Context>,
    pub normalization: Normalization,
    pub n: usize,
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(CoreError::InvalidConfig("list length n must be ≥ 1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.contexts {
            if !seen.insert(*c) {
                return Err(CoreError::InvalidConfig(format!(
                    "context {c} repeats in the fusion config"
                )));
            }
        }
        Ok(())
    }
}

/// One user's ranked recommendations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationList {
    pub user: UserId,
    /// (POI, fused score), scores non-increasing.
    pub items: Vec<(PoiId, f64)>,
}

/// Sum one candidate's base and context scores without normalization.
/// The provided scores must cover exactly the configured contexts.
pub fn fuse(
    base_score: Option<f64>,
    context_scores: &[ContextScore],
    config: &FusionConfig,
) -> Result<f64> {
    if config.contexts.len() != context_scores.len() {
        return Err(CoreError::MissingContext(format!(
            "expected {} context scores, got {}",
            config.contexts.len(),
            context_scores.len()
        )));
    }
    let mut total = match (config.base, base_score) {
        (BaseModel::None, _) => 0.0,
        (_, Some(s)) => s,
        (_, None) => return Err(CoreError::MissingContext("base score".into())),
    };
    for wanted in &config.contexts {
        let found = context_scores
            .iter()
            .find(|s| s.context == *wanted)
            .ok_or_else(|| CoreError::MissingContext(wanted.to_string()))?;
        total += found.value;
    }
    Ok(total)
}

/// Map a component's candidate scores onto [0, 1]: max→1, min→0; a constant
/// component maps to all zeros.
pub fn minmax_normalize(scores: &mut [f64]) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &s in scores.iter() {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    let range = hi - lo;
    if range <= 0.0 {
        scores.iter_mut().for_each(|s| *s = 0.0);
        return;
    }
    scores.iter_mut().for_each(|s| *s = (*s - lo) / range);
}

/// Fuse whole candidate score vectors for one user.
///
/// `base_scores` must be `Some` iff the config has a base model; each
/// context vector must match the candidate count. Normalization (if
/// configured) applies to every component independently.
pub fn fuse_candidates(
    base_scores: Option<Vec<f64>>,
    context_scores: Vec<(Context, Vec<f64>)>,
    n_candidates: usize,
    config: &FusionConfig,
) -> Result<Vec<f64>> {
    let mut components: Vec<Vec<f64>> = Vec::new();
    match (config.base, base_scores) {
        (BaseModel::None, _) => {}
        (_, Some(b)) if b.len() == n_candidates => components.push(b),
        (_, Some(b)) => {
            return Err(CoreError::InvalidConfig(format!(
                "base score vector has {} entries for {} candidates",
                b.len(),
                n_candidates
            )))
        }
        (_, None) => return Err(CoreError::MissingContext("base score".into())),
    }
    for wanted in &config.contexts {
        let (_, scores) = context_scores
            .iter()
            .find(|(c, _)| c == wanted)
            .ok_or_else(|| CoreError::MissingContext(wanted.to_string()))?;
        if scores.len() != n_candidates {
            return Err(CoreError::InvalidConfig(format!(
                "context {wanted} has {} entries for {} candidates",
                scores.len(),
                n_candidates
            )));
        }
        components.push(scores.clone());
    }

    let mut fused = vec![0.0; n_candidates];
    for mut component in components {
        if config.normalization == Normalization::PerUserMinmax {
            minmax_normalize(&mut component);
        }
        for (f, c) in fused.iter_mut().zip(&component) {
            *f += c;
        }
    }
    Ok(fused)
}

/// Rank candidates by fused score, descending; ties break on the lower POI
/// index. Returns at most `n` items.
pub fn recommend_top_n(
    user: UserId,
    candidates: &[PoiId],
    fused_scores: &[f64],
    n: usize,
) -> RecommendationList {
    debug_assert_eq!(candidates.len(), fused_scores.len());
    if candidates.is_empty() {
        warn!("user index {} has an empty candidate set", user.0);
        return RecommendationList {
            user,
            items: Vec::new(),
        };
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        fused_scores[b]
            .partial_cmp(&fused_scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(candidates[a].cmp(&candidates[b]))
    });
    RecommendationList {
        user,
        items: order
            .into_iter()
            .take(n)
            .map(|i| (candidates[i], fused_scores[i]))
            .collect(),
    }
}

/// Render recommendation lists as `user_id<TAB>rank<TAB>poi_id<TAB>score`
/// rows (rank is 1-based).
pub fn recommendations_to_tsv(
    lists: &[RecommendationList],
    users: &crate::data::Registry,
    pois: &crate::data::Registry,
) -> String {
    let mut out = String::new();
    for list in lists {
        let user = users.name(list.user.0).unwrap_or("?");
        for (rank, &(poi, score)) in list.items.iter().enumerate() {
            out.push_str(&format!(
                "{user}\t{}\t{}\t{score}\n",
                rank + 1,
                pois.name(poi.0).unwrap_or("?")
            ));
        }
    }
    out
}
