//! Trainable base rankers: Poisson matrix factorization (linear) and an
//! MLP collaborative-filtering network (non-linear).

mod adam;
mod ncf;
mod pfm;

pub use adam::{adam_step, AdamHyperparams, AdamState};
pub use ncf::{loss_and_grads, ncf_predict, train_ncf, NcfArch, NcfGrads, NcfModel, NcfTrainConfig};
pub use pfm::{mf_predict, train_pfm, MfModel, PfmHyperparams};
