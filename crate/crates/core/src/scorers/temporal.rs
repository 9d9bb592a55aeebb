//! Temporal context: additive Markov chain over the POI transition graph.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{Context, ContextScorer};
use crate::data::{CheckinEvent, PoiId, UserId};
use crate::error::{CoreError, Result};

/// Directed transition-count graph built from chronologically consecutive
/// same-user check-ins. Self-transitions count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmcTransitionGraph {
    n_pois: usize,
    tcount: Vec<BTreeMap<u32, u32>>,
    ocount: Vec<u32>,
    /// Sequence decay rate α ≥ 0 used by the additive score.
    pub alpha: f64,
}

/// Accumulate transition and outgoing counts from per-user train sequences.
pub fn build_transition_graph(
    train: &[Vec<CheckinEvent>],
    n_pois: usize,
    alpha: f64,
) -> AmcTransitionGraph {
    let mut tcount: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new(); n_pois];
    let mut ocount = vec![0u32; n_pois];
    for events in train {
        for pair in events.windows(2) {
            let from = pair[0].poi;
            let to = pair[1].poi;
            *tcount[from.index()].entry(to.0).or_insert(0) += 1;
            ocount[from.index()] += 1;
        }
    }
    AmcTransitionGraph {
        n_pois,
        tcount,
        ocount,
        alpha,
    }
}

impl AmcTransitionGraph {
    pub fn transition_count(&self, from: PoiId, to: PoiId) -> u32 {
        self.tcount[from.index()].get(&to.0).copied().unwrap_or(0)
    }

    pub fn outgoing_count(&self, from: PoiId) -> u32 {
        self.ocount[from.index()]
    }

    /// Transition probability; 0 for nodes without outgoing edges.
    pub fn transition_probability(&self, from: PoiId, to: PoiId) -> f64 {
        let out = self.ocount[from.index()];
        if out == 0 {
            return 0.0;
        }
        self.transition_count(from, to) as f64 / out as f64
    }

    pub fn n_pois(&self) -> usize {
        self.n_pois
    }

    /// Additive Markov chain score of `candidate` given the visit history
    /// `l_1..l_n`: decay-weighted average of the transition probabilities
    /// from every past visit, with weight 2^(−α·(n−i)) for position i.
    pub fn amc_score(&self, history: &[PoiId], candidate: PoiId) -> Result<f64> {
        if history.is_empty() {
            return Err(CoreError::EmptyHistory);
        }
        if candidate.index() >= self.n_pois {
            return Err(CoreError::UnknownPoiIndex(candidate.0));
        }
        let n = history.len();
        let mut numerator = 0.0;
        let mut denominator = 0.0;
        for (i, &past) in history.iter().enumerate() {
            if past.index() >= self.n_pois {
                return Err(CoreError::UnknownPoiIndex(past.0));
            }
            let weight = 2f64.powf(-self.alpha * (n - 1 - i) as f64);
            denominator += weight;
            numerator += weight * self.transition_probability(past, candidate);
        }
        Ok(numerator / denominator)
    }

    /// Score many candidates at once by walking each history row a single
    /// time instead of once per candidate. Same values as [`amc_score`].
    pub fn amc_score_many(&self, history: &[PoiId], candidates: &[PoiId]) -> Result<Vec<f64>> {
        if history.is_empty() {
            return Err(CoreError::EmptyHistory);
        }
        let n = history.len();
        let mut denominator = 0.0;
        let mut accum: std::collections::HashMap<u32, f64> =
            std::collections::HashMap::with_capacity(candidates.len());
        for (i, &past) in history.iter().enumerate() {
            if past.index() >= self.n_pois {
                return Err(CoreError::UnknownPoiIndex(past.0));
            }
            let weight = 2f64.powf(-self.alpha * (n - 1 - i) as f64);
            denominator += weight;
            let out = self.ocount[past.index()];
            if out == 0 {
                continue;
            }
            let scale = weight / out as f64;
            for (&to, &count) in &self.tcount[past.index()] {
                *accum.entry(to).or_insert(0.0) += scale * count as f64;
            }
        }
        candidates
            .iter()
            .map(|c| {
                if c.index() >= self.n_pois {
                    return Err(CoreError::UnknownPoiIndex(c.0));
                }
                Ok(accum.get(&c.0).copied().unwrap_or(0.0) / denominator)
            })
            .collect()
    }
}

/// The graph plus each user's train history, so it scores (user, POI) pairs
/// like every other context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalModel {
    pub graph: AmcTransitionGraph,
    histories: Vec<Vec<PoiId>>,
}

impl TemporalModel {
    pub fn fit(train: &[Vec<CheckinEvent>], n_pois: usize, alpha: f64) -> Self {
        let graph = build_transition_graph(train, n_pois, alpha);
        let histories = train
            .iter()
            .map(|events| events.iter().map(|e| e.poi).collect())
            .collect();
        Self { graph, histories }
    }

    pub fn history(&self, user: UserId) -> Result<&[PoiId]> {
        self.histories
            .get(user.index())
            .map(Vec::as_slice)
            .ok_or(CoreError::UnknownUser(user.0))
    }
}

impl ContextScorer for TemporalModel {
    fn context(&self) -> Context {
        Context::Temporal
    }

    fn score(&self, user: UserId, poi: PoiId) -> Result<f64> {
        self.graph.amc_score(self.history(user)?, poi)
    }
}
