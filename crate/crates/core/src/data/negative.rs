//! Negative sampling for implicit-feedback training and test candidates.

use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;

use super::split::SplitDataset;
use super::types::{FrequencyMatrix, InteractionSample, PoiId, UserId};
use crate::rng::{child_seed_indexed, rng_from_seed};

/// How many negatives to draw per user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeMode {
    /// One negative per unique visited train POI.
    Train,
    /// A fixed cap per user (1,000 in the evaluation protocol), limited by
    /// the pool of unvisited POIs.
    Test { per_user: usize },
}

/// Draw negatives per user: POIs absent from that user's train set,
/// uniformly without replacement, deterministic under `seed`.
///
/// Each user consumes an independent sub-stream, so per-user draws do not
/// depend on how many negatives other users received.
pub fn sample_negatives(
    split: &SplitDataset,
    train_matrix: &FrequencyMatrix,
    n_pois: usize,
    mode: NegativeMode,
    seed: u64,
) -> Vec<InteractionSample> {
    let mut out = Vec::new();
    for u in 0..split.n_users() {
        let user = UserId(u as u32);
        let wanted = match mode {
            NegativeMode::Train => train_matrix.user_unique_pois(user),
            NegativeMode::Test { per_user } => per_user,
        };
        if wanted == 0 {
            continue;
        }
        // Pool: every POI the user has not visited in train, ascending.
        let mut pool: Vec<u32> = Vec::with_capacity(n_pois);
        let mut visited = train_matrix.user_row(user).peekable();
        for l in 0..n_pois as u32 {
            match visited.peek() {
                Some(&(p, _)) if p.0 == l => {
                    visited.next();
                }
                _ => pool.push(l),
            }
        }
        if pool.is_empty() {
            warn!("user index {u} has an empty negative pool; zero negatives drawn");
            continue;
        }
        let take = wanted.min(pool.len());
        let mut rng = rng_from_seed(child_seed_indexed(seed, "negatives", u as u64));
        let (chosen, _) = pool.partial_shuffle(&mut rng, take);
        let mut chosen: Vec<u32> = chosen.to_vec();
        chosen.sort_unstable();
        out.extend(chosen.into_iter().map(|l| InteractionSample {
            user,
            poi: PoiId(l),
            label: 0,
        }));
    }
    out
}

/// Positives (one per unique visited train POI) followed by the matching
/// negatives, shuffled deterministically — the training set for the neural
/// ranker.
pub fn training_samples(
    split: &SplitDataset,
    train_matrix: &FrequencyMatrix,
    n_pois: usize,
    seed: u64,
) -> Vec<InteractionSample> {
    let mut samples = Vec::new();
    for u in 0..split.n_users() {
        let user = UserId(u as u32);
        for (poi, _) in train_matrix.user_row(user) {
            samples.push(InteractionSample {
                user,
                poi,
                label: 1,
            });
        }
    }
    samples.extend(sample_negatives(
        split,
        train_matrix,
        n_pois,
        NegativeMode::Train,
        seed,
    ));
    let mut rng = rng_from_seed(child_seed_indexed(seed, "sample-order", 0));
    samples.shuffle(&mut rng);
    samples
}

/// Uniform sampling without replacement that leaves the untaken tail alone.
trait PartialShuffle<T> {
    fn partial_shuffle<R: Rng>(&mut self, rng: &mut R, amount: usize) -> (&mut [T], &mut [T]);
}

impl<T> PartialShuffle<T> for Vec<T> {
    fn partial_shuffle<R: Rng>(&mut self, rng: &mut R, amount: usize) -> (&mut [T], &mut [T]) {
        let len = self.len();
        let amount = amount.min(len);
        for i in 0..amount {
            let j = rng.random_range(i..len);
            self.swap(i, j);
        }
        self.split_at_mut(amount)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::split::SplitDataset;
    use crate::data::types::CheckinEvent;

    fn fixture(unique_pois: usize, n_pois: usize) -> (SplitDataset, FrequencyMatrix) {
        let events: Vec<CheckinEvent> = (0..unique_pois)
            .map(|l| CheckinEvent {
                user: UserId(0),
                poi: PoiId(l as u32),
                timestamp: l as i64,
            })
            .collect();
        let split = SplitDataset {
            train: vec![events.clone()],
            test: vec![vec![]],
            validation: vec![vec![]],
            train_only_users: vec![],
        };
        let m = FrequencyMatrix::from_checkins(1, n_pois, &split.train);
        (split, m)
    }

    #[test]
    fn train_mode_matches_unique_poi_count() {
        let (split, m) = fixture(5, 100);
        let neg = sample_negatives(&split, &m, 100, NegativeMode::Train, 7);
        assert_eq!(neg.len(), 5);
        for s in &neg {
            assert_eq!(s.label, 0);
            assert!(!m.visited(s.user, s.poi), "negative collides with train");
        }
    }

    #[test]
    fn test_mode_caps_at_pool_size() {
        let (split, m) = fixture(5, 1505);
        let neg = sample_negatives(&split, &m, 1505, NegativeMode::Test { per_user: 1000 }, 7);
        assert_eq!(neg.len(), 1000);

        let (split, m) = fixture(5, 12);
        let neg = sample_negatives(&split, &m, 12, NegativeMode::Test { per_user: 1000 }, 7);
        assert_eq!(neg.len(), 7); // pool of 12 - 5 visited
    }

    #[test]
    fn deterministic_under_seed() {
        let (split, m) = fixture(5, 300);
        let a = sample_negatives(&split, &m, 300, NegativeMode::Test { per_user: 50 }, 99);
        let b = sample_negatives(&split, &m, 300, NegativeMode::Test { per_user: 50 }, 99);
        let c = sample_negatives(&split, &m, 300, NegativeMode::Test { per_user: 50 }, 100);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn training_samples_balance_labels() {
        let (split, m) = fixture(6, 50);
        let samples = training_samples(&split, &m, 50, 3);
        let pos = samples.iter().filter(|s| s.label == 1).count();
        let neg = samples.iter().filter(|s| s.label == 0).count();
        assert_eq!(pos, 6);
        assert_eq!(neg, 6);
    }
}
