//! Experiment configuration: a single JSON document describing the dataset,
//! preprocessing, model grid, hyperparameters, and outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ctxrec_core::data::{SplitFractions, SyntheticConfig};
use ctxrec_core::eval::MetricKind;
use ctxrec_core::fusion::Normalization;
use ctxrec_core::models::{AdamHyperparams, NcfArch, NcfTrainConfig, PfmHyperparams};
use ctxrec_core::scorers::{KdeSettings, MgmSettings};

use crate::error::{HarnessError, Result};
use crate::labels::ModelSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// TSV files on disk.
    Files {
        checkins: PathBuf,
        pois: PathBuf,
        social: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        categories: Option<PathBuf>,
    },
    /// Generated with planted structure; seeded from the experiment seed.
    Synthetic(SyntheticConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub min_user_checkins: usize,
    pub min_poi_visitors: usize,
    /// Re-apply the user/POI passes until nothing changes.
    pub fixpoint: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_user_checkins: 10,
            min_poi_visitors: 10,
            fixpoint: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NcfHyperConfig {
    pub arch: NcfArch,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamHyperparams,
}

impl Default for NcfHyperConfig {
    fn default() -> Self {
        let t = NcfTrainConfig::default();
        Self {
            arch: NcfArch::default(),
            epochs: t.epochs,
            batch_size: t.batch_size,
            adam: t.adam,
        }
    }
}

impl NcfHyperConfig {
    pub fn train_config(&self) -> NcfTrainConfig {
        NcfTrainConfig {
            adam: self.adam,
            epochs: self.epochs,
            batch_size: self.batch_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperConfig {
    pub pfm: PfmHyperparams,
    pub ncf: NcfHyperConfig,
    pub kde: KdeSettings,
    pub amc_alpha: f64,
    pub mgm: MgmSettings,
}

impl Default for HyperConfig {
    fn default() -> Self {
        Self {
            pfm: PfmHyperparams::default(),
            ncf: NcfHyperConfig::default(),
            kde: KdeSettings::default(),
            amc_alpha: 0.1,
            mgm: MgmSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CdConfig {
    pub metric: MetricKind,
    pub k: usize,
}

impl Default for CdConfig {
    fn default() -> Self {
        Self {
            metric: MetricKind::Ndcg,
            k: 20,
        }
    }
}

/// The experiment document. Unknown fields are rejected so typos fail fast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default = "SplitFractions::default")]
    pub split: SplitFractions,
    /// Model grid as labels, e.g. ["M", "M-(GT)", "GeoSoCa-(GS)"].
    pub models: Vec<String>,
    #[serde(default = "default_metrics_k")]
    pub metrics_k: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    /// Recommendation list length; effective length is max(top_n, max K).
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    /// Test-time negatives per user.
    #[serde(default = "default_test_negatives")]
    pub test_negatives: usize,
    #[serde(default)]
    pub hyper: HyperConfig,
    #[serde(default)]
    pub cd: CdConfig,
    pub output_dir: PathBuf,
}

fn default_metrics_k() -> Vec<usize> {
    vec![10, 20]
}
fn default_normalization() -> Normalization {
    Normalization::PerUserMinmax
}
fn default_top_n() -> usize {
    20
}
fn default_test_negatives() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Parse the model grid and check every cross-field constraint that can
    /// fail before any data is touched.
    pub fn validate(&self) -> Result<Vec<ModelSpec>> {
        if self.models.is_empty() {
            return Err(HarnessError::Config("model grid is empty".into()));
        }
        if self.metrics_k.is_empty() {
            return Err(HarnessError::Config("metrics_k must be non-empty".into()));
        }
        if self.metrics_k.contains(&0) {
            return Err(HarnessError::Config("metrics_k entries must be ≥ 1".into()));
        }
        let mut seen_k = std::collections::BTreeSet::new();
        if !self.metrics_k.iter().all(|&k| seen_k.insert(k)) {
            return Err(HarnessError::Config(format!(
                "metrics_k contains duplicates: {:?}",
                self.metrics_k
            )));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        if self.test_negatives == 0 {
            return Err(HarnessError::Config("test_negatives must be ≥ 1".into()));
        }
        self.split
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;

        let mut specs = Vec::with_capacity(self.models.len());
        let mut seen = std::collections::BTreeSet::new();
        for label in &self.models {
            let spec = ModelSpec::parse(label).map_err(|e| HarnessError::Config(e.to_string()))?;
            if !seen.insert(spec.canonical_label()) {
                return Err(HarnessError::Config(format!(
                    "model `{label}` appears twice in the grid (canonical `{}`)",
                    spec.canonical_label()
                )));
            }
            specs.push(spec);
        }

        // The categorical context needs category data; fail fast before any
        // training happens (the Gowalla case).
        let has_categories = match &self.dataset {
            DatasetSource::Files { categories, .. } => categories.is_some(),
            DatasetSource::Synthetic(s) => s.n_categories > 0,
        };
        if !has_categories {
            if let Some(spec) = specs.iter().find(|s| s.needs_categories()) {
                return Err(HarnessError::Config(format!(
                    "model `{}` uses the categorical context, but the dataset has no categories",
                    spec.canonical_label()
                )));
            }
        }

        if !self.metrics_k.contains(&self.cd.k) {
            return Err(HarnessError::Config(format!(
                "cd.k = {} must be one of metrics_k {:?}",
                self.cd.k, self.metrics_k
            )));
        }
        Ok(specs)
    }
}
