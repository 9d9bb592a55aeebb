//! Per-user chronological train/test/validation split.

use log::warn;
use serde::{Deserialize, Serialize};

use super::types::{CheckinEvent, Dataset, UserId};
use crate::error::{CoreError, Result};

/// Split fractions; must be non-negative and sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.70,
            test: 0.20,
            validation: 0.10,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.test, self.validation];
        if parts.iter().any(|&f| f < 0.0) || self.train == 0.0 {
            return Err(CoreError::InvalidConfig(
                "split fractions must be non-negative with a positive train share".into(),
            ));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidConfig(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// Chronological views of one dataset. Per user, every train timestamp
/// precedes every test timestamp, which precedes every validation timestamp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitDataset {
    pub train: Vec<Vec<CheckinEvent>>,
    pub test: Vec<Vec<CheckinEvent>>,
    pub validation: Vec<Vec<CheckinEvent>>,
    /// Users with fewer than 3 check-ins, assigned train-only.
    pub train_only_users: Vec<UserId>,
}

impl SplitDataset {
    pub fn n_users(&self) -> usize {
        self.train.len()
    }
}

/// Event counts per segment for a user with `n` check-ins.
///
/// Train takes round(f_train·n) capped at n−1 (so test data exists whenever
/// a holdout share was requested), test takes round(f_test·n) capped at the
/// remainder, validation takes what is left. Users with fewer than 3
/// check-ins go train-only with a warning.
pub fn split_sizes(n: usize, fractions: SplitFractions) -> (usize, usize, usize) {
    if n == 0 {
        return (0, 0, 0);
    }
    let holdout_requested = fractions.test + fractions.validation > 0.0;
    if holdout_requested && n < 3 {
        return (n, 0, 0);
    }
    let mut train = (fractions.train * n as f64).round() as usize;
    if holdout_requested && n >= 2 {
        train = train.min(n - 1);
    }
    train = train.clamp(1, n);
    let mut test = (fractions.test * n as f64).round() as usize;
    test = test.min(n - train);
    let validation = n - train - test;
    (train, test, validation)
}

/// Split every user's (already time-sorted) check-ins into the three
/// chronological segments.
pub fn temporal_split(d: &Dataset, fractions: SplitFractions) -> Result<SplitDataset> {
    fractions.validate()?;
    let mut split = SplitDataset {
        train: Vec::with_capacity(d.n_users()),
        test: Vec::with_capacity(d.n_users()),
        validation: Vec::with_capacity(d.n_users()),
        train_only_users: Vec::new(),
    };
    for (u, events) in d.checkins.iter().enumerate() {
        if events.is_empty() {
            return Err(CoreError::InvalidConfig(format!(
                "user index {u} has no check-ins; filter before splitting"
            )));
        }
        let n = events.len();
        let (n_train, n_test, _) = split_sizes(n, fractions);
        if fractions.test + fractions.validation > 0.0 && n < 3 {
            warn!(
                "user {} has only {n} check-ins; assigned train-only",
                d.users.name(u as u32).unwrap_or("?")
            );
            split.train_only_users.push(UserId(u as u32));
        }
        split.train.push(events[..n_train].to_vec());
        split.test.push(events[n_train..n_train + n_test].to_vec());
        split.validation.push(events[n_train + n_test..].to_vec());
    }
    Ok(split)
}
