//! Dataset ingestion, filtering, temporal splitting, frequency matrices,
//! negative sampling, and synthetic data generation.

mod filter;
mod load;
mod negative;
mod split;
mod synth;
mod types;

pub use filter::{filter_dataset, filter_dataset_fixpoint};
pub use load::{load_dataset, LoadStats};
pub use negative::{sample_negatives, training_samples, NegativeMode};
pub use split::{temporal_split, SplitDataset, SplitFractions};
pub use synth::{generate_synthetic, SyntheticConfig};
pub use types::{
    CategoryId, CheckinEvent, Dataset, FrequencyMatrix, InteractionSample, Poi, PoiId, Registry,
    SocialGraph, UserId,
};
