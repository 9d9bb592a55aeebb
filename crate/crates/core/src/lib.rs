//! Context-aware point-of-interest recommendation.
//!
//! This crate implements the building blocks of a POI recommendation
//! framework over location-based social network check-in data:
//!
//! - [`data`]: dataset ingestion, filtering, temporal splitting, frequency
//!   matrices, negative sampling, and a synthetic check-in generator.
//! - [`scorers`]: contextual scoring models — per-user geographical KDE,
//!   social and categorical power laws, an additive Markov chain over
//!   POI transitions, friend-based CF, and a multi-center Gaussian model.
//! - [`models`]: the two trainable base rankers — Poisson matrix
//!   factorization and an MLP collaborative-filtering network.
//! - [`fusion`]: sum-rule combination of a base ranker with any subset of
//!   context scores, plus top-N list construction.
//! - [`eval`]: top-K ranking metrics, paired t-tests, and Wilcoxon–Holm
//!   critical-difference ranking.
//! - [`behavior`]: user-behavior segmentation (geographic range, temporal
//!   density, exploration) and correlation analysis.
//!
//! Everything is deterministic under explicit seeds; fitted models are
//! immutable and safe to score from many threads.

pub mod behavior;
pub mod data;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geo;
pub mod models;
pub mod rng;
pub mod scorers;

pub use error::{CoreError, Result};
