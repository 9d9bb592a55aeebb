//! Model label scheme: `M-(GT)`, `N-(ST)`, `GeoSoCa-(GS)`, `FCFKDEAMC-(GT)`,
//! `PFMMGM-(MG)`, with bare `M`/`N` for the interaction-only rankers.
//!
//! Each family maps its context letters onto fixed scorer implementations:
//! the proposed M/N models use the per-user KDE, the additive Markov chain,
//! the social power law, and the categorical power law; GeoSoCa swaps in
//! the universal KDE; FCFKDEAMC uses friend-based CF for its social part;
//! PFMMGM pairs the factorization base with the multi-center Gaussian.
//! Labels round-trip: parsing then formatting yields the canonical form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ctxrec_core::fusion::BaseModel;

/// Concrete scorer implementations a model can bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScorerKind {
    GeoKdePerUser,
    GeoKdeUniversal,
    Amc,
    SocialPowerLaw,
    Categorical,
    Fcf,
    Mgm,
}

impl ScorerKind {
    /// Whether this scorer needs POI category data.
    pub fn needs_categories(self) -> bool {
        matches!(self, ScorerKind::Categorical)
    }
}

/// Model family, which fixes how context letters resolve to scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Proposed(BaseModel),
    GeoSoCa,
    Fcfkdeamc,
    Pfmmgm,
}

/// A parsed model label: base ranker plus an ordered scorer bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub base: BaseModel,
    pub components: Vec<ScorerKind>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("unknown model family in `{0}`")]
    UnknownFamily(String),
    #[error("malformed label `{0}`: expected NAME or NAME-(LETTERS)")]
    Malformed(String),
    #[error("context letter `{letter}` is not valid for family {family} in `{label}`")]
    BadContext {
        letter: char,
        family: String,
        label: String,
    },
    #[error("context letter `{letter}` repeats in `{label}`")]
    Repeated { letter: char, label: String },
    #[error("label `{0}` selects no base model and no contexts")]
    Empty(String),
}

/// Per-family canonical letter order and letter→scorer mapping.
fn family_table(family: Family) -> &'static [(char, ScorerKind)] {
    match family {
        Family::Proposed(_) => &[
            ('G', ScorerKind::GeoKdePerUser),
            ('T', ScorerKind::Amc),
            ('S', ScorerKind::SocialPowerLaw),
            ('C', ScorerKind::Categorical),
        ],
        Family::GeoSoCa => &[
            ('G', ScorerKind::GeoKdeUniversal),
            ('S', ScorerKind::SocialPowerLaw),
            ('C', ScorerKind::Categorical),
        ],
        Family::Fcfkdeamc => &[
            ('G', ScorerKind::GeoKdePerUser),
            ('T', ScorerKind::Amc),
            ('S', ScorerKind::Fcf),
        ],
        Family::Pfmmgm => &[('G', ScorerKind::Mgm)],
    }
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::Proposed(BaseModel::Mf) => "M",
        Family::Proposed(BaseModel::Ncf) => "N",
        Family::Proposed(BaseModel::None) => unreachable!("proposed models carry a base"),
        Family::GeoSoCa => "GeoSoCa",
        Family::Fcfkdeamc => "FCFKDEAMC",
        Family::Pfmmgm => "PFMMGM",
    }
}

impl ModelSpec {
    /// Parse a label; letters may arrive in any order.
    pub fn parse(label: &str) -> Result<Self, LabelError> {
        let (name, letters) = match label.find("-(") {
            Some(pos) => {
                let name = &label[..pos];
                let rest = &label[pos + 2..];
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| LabelError::Malformed(label.to_owned()))?;
                if inner.is_empty() {
                    return Err(LabelError::Malformed(label.to_owned()));
                }
                (name, inner)
            }
            None => (label, ""),
        };

        let family = match name {
            "M" => Family::Proposed(BaseModel::Mf),
            "N" => Family::Proposed(BaseModel::Ncf),
            "GeoSoCa" => Family::GeoSoCa,
            "FCFKDEAMC" => Family::Fcfkdeamc,
            "PFMMGM" => Family::Pfmmgm,
            _ => return Err(LabelError::UnknownFamily(label.to_owned())),
        };

        let mut has_m = false;
        let mut chosen: Vec<char> = Vec::new();
        for letter in letters.chars() {
            if letter == 'M' && family == Family::Pfmmgm {
                if has_m {
                    return Err(LabelError::Repeated {
                        letter,
                        label: label.to_owned(),
                    });
                }
                has_m = true;
                continue;
            }
            if !family_table(family).iter().any(|&(c, _)| c == letter) {
                return Err(LabelError::BadContext {
                    letter,
                    family: family_name(family).to_owned(),
                    label: label.to_owned(),
                });
            }
            if chosen.contains(&letter) {
                return Err(LabelError::Repeated {
                    letter,
                    label: label.to_owned(),
                });
            }
            chosen.push(letter);
        }

        let base = match family {
            Family::Proposed(base) => base,
            Family::Pfmmgm if has_m => BaseModel::Mf,
            _ => BaseModel::None,
        };
        // Canonical component order follows the family table.
        let components: Vec<ScorerKind> = family_table(family)
            .iter()
            .filter(|(c, _)| chosen.contains(c))
            .map(|&(_, s)| s)
            .collect();

        if base == BaseModel::None && components.is_empty() {
            return Err(LabelError::Empty(label.to_owned()));
        }
        Ok(Self {
            family,
            base,
            components,
        })
    }

    /// Canonical label; `parse(canonical(x)) == x`.
    pub fn canonical_label(&self) -> String {
        let name = family_name(self.family);
        let mut letters = String::new();
        if self.family == Family::Pfmmgm && self.base == BaseModel::Mf {
            letters.push('M');
        }
        for &(c, kind) in family_table(self.family) {
            if self.components.contains(&kind) {
                letters.push(c);
            }
        }
        if letters.is_empty() {
            name.to_owned()
        } else {
            format!("{name}-({letters})")
        }
    }

    /// Context letters alone (the `contexts` column of the results table).
    pub fn context_letters(&self) -> String {
        let mut letters = String::new();
        if self.family == Family::Pfmmgm && self.base == BaseModel::Mf {
            letters.push('M');
        }
        for &(c, kind) in family_table(self.family) {
            if self.components.contains(&kind) {
                letters.push(c);
            }
        }
        letters
    }

    /// Family prefix (the `model` column of the results table).
    pub fn family_name(&self) -> &'static str {
        family_name(self.family)
    }

    pub fn needs_categories(&self) -> bool {
        self.components.iter().any(|c| c.needs_categories())
    }
}
