//! Contextual scoring models.
//!
//! Each scorer is fitted once on train data and then queried as a pure
//! function of (user, POI). All scores are finite and non-negative.

mod categorical;
mod fcf;
mod kde;
mod mgm;
mod power_law;
mod social;
mod temporal;

pub use categorical::{fit_categorical, CategoricalModel};
pub use fcf::{fit_fcf, FcfModel};
pub use kde::{fit_geo_kde, fit_geo_kde_universal, GeoKdeModel, KdeSettings};
pub use mgm::{fit_mgm, MgmCenter, MgmModel, MgmSettings};
pub use power_law::power_law_exponent;
pub use social::{fit_social, SocialPowerLawModel};
pub use temporal::{build_transition_graph, AmcTransitionGraph, TemporalModel};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// The contextual signal a score came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Context {
    /// Per-user (or universal) geographical kernel density.
    Geographical,
    /// Additive Markov chain over POI transitions.
    Temporal,
    /// Social power law over friends' check-in frequency.
    Social,
    /// Categorical power law.
    Categorical,
    /// Friend-based collaborative filtering.
    FriendCf,
    /// Multi-center Gaussian geographical model.
    MultiCenter,
}

impl Context {
    pub fn tag(self) -> &'static str {
        match self {
            Context::Geographical => "G",
            Context::Temporal => "T",
            Context::Social => "S",
            Context::Categorical => "C",
            Context::FriendCf => "FCF",
            Context::MultiCenter => "MGM",
        }
    }
}

impl std::fmt::Display for Context {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A context-tagged score; finite and ≥ 0 by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextScore {
    pub value: f64,
    pub context: Context,
}

/// Common scoring interface the fusion layer consumes.
pub trait ContextScorer: Send + Sync {
    fn context(&self) -> Context;

    /// Score one (user, POI) pair.
    fn score(&self, user: crate::data::UserId, poi: crate::data::PoiId) -> Result<f64>;

    fn score_tagged(
        &self,
        user: crate::data::UserId,
        poi: crate::data::PoiId,
    ) -> Result<ContextScore> {
        Ok(ContextScore {
            value: self.score(user, poi)?,
            context: self.context(),
        })
    }
}

/// Version header wrapped around every serialized model artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact<T> {
    pub format_version: u32,
    pub kind: String,
    pub model: T,
}

pub const ARTIFACT_VERSION: u32 = 1;

impl<T: Serialize + serde::de::DeserializeOwned> ModelArtifact<T> {
    pub fn new(kind: &str, model: T) -> Self {
        Self {
            format_version: ARTIFACT_VERSION,
            kind: kind.to_owned(),
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| crate::CoreError::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let artifact: Self = serde_json::from_str(s)
            .map_err(|e| crate::CoreError::Serialization(e.to_string()))?;
        if artifact.format_version != ARTIFACT_VERSION {
            return Err(crate::CoreError::Serialization(format!(
                "unsupported artifact version {}",
                artifact.format_version
            )));
        }
        Ok(artifact)
    }
}
