//! Declarative experiment runner for the context-aware POI recommendation
//! framework: parse a JSON config, run the pipeline (load → filter → split
//! → fit scorers → train rankers → fuse → evaluate → segment), and emit
//! CSV/TXT/SVG reports plus a manifest.

pub mod config;
pub mod error;
pub mod labels;
pub mod pipeline;
pub mod reports;
pub mod svg;

pub use config::{DatasetSource, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use labels::{Family, ModelSpec, ScorerKind};
pub use pipeline::{run_experiment, RunOutput, SeedOutput, SignificanceRow};
pub use reports::{emit_reports, write_dataset_tsv, write_index_map, Manifest};
