//! Neural collaborative filtering: embedding lookups feeding an MLP.
//!
//! Forward pass: concat(user embedding, POI embedding) → ReLU hidden layers
//! → linear scalar → sigmoid. Trained with binary cross-entropy over
//! positive/negative interaction samples using mini-batch Adam. Embeddings
//! are initialized from a trained factorization model and fine-tuned with
//! the rest of the network.

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamHyperparams, AdamState};
use super::pfm::MfModel;
use crate::data::{InteractionSample, PoiId, UserId};
use crate::error::{CoreError, Result};
use crate::rng::{child_seed, child_seed_indexed, rng_from_seed};

/// Hidden layer widths; the output layer is always a single unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NcfArch {
    pub hidden: Vec<usize>,
}

impl Default for NcfArch {
    fn default() -> Self {
        Self {
            hidden: vec![128, 64],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NcfTrainConfig {
    pub adam: AdamHyperparams,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for NcfTrainConfig {
    fn default() -> Self {
        Self {
            adam: AdamHyperparams::default(),
            epochs: 50,
            batch_size: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// out×in.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcfModel {
    pub k: usize,
    /// |U|×K.
    pub user_emb: Array2<f64>,
    /// |L|×K.
    pub poi_emb: Array2<f64>,
    /// Hidden layers then the 1-unit output layer.
    pub layers: Vec<Dense>,
    pub seed: u64,
    /// Mean training loss per epoch.
    pub loss_trace: Vec<f64>,
    adam_states: Vec<AdamState>,
    adam_t: usize,
}

impl NcfModel {
    pub fn n_parameters(&self) -> usize {
        self.user_emb.len()
            + self.poi_emb.len()
            + self
                .layers
                .iter()
                .map(|l| l.w.len() + l.b.len())
                .sum::<usize>()
    }

    /// Fresh network with embeddings copied from a factorization model and
    /// seeded He-style hidden weights. Exposed for tests that need an
    /// untrained network.
    pub fn initialize(init: &MfModel, arch: &NcfArch, seed: u64) -> Self {
        let k = init.k();
        let mut rng = rng_from_seed(child_seed(seed, "ncf-init"));
        let mut sizes = Vec::with_capacity(arch.hidden.len() + 1);
        let mut fan_in = 2 * k;
        for &h in &arch.hidden {
            sizes.push((h, fan_in));
            fan_in = h;
        }
        sizes.push((1, fan_in));
        let n_layers = sizes.len();
        let layers: Vec<Dense> = sizes
            .into_iter()
            .enumerate()
            .map(|(i, (out, inp))| {
                // He scaling for ReLU layers, Xavier-ish for the output.
                let std = if i + 1 < n_layers {
                    (2.0 / inp as f64).sqrt()
                } else {
                    (1.0 / inp as f64).sqrt()
                };
                let normal = Normal::new(0.0, std).expect("positive std");
                Dense {
                    w: Array2::from_shape_fn((out, inp), |_| normal.sample(&mut rng)),
                    b: Array1::zeros(out),
                }
            })
            .collect();
        let mut model = Self {
            k,
            user_emb: init.user_factors.clone(),
            poi_emb: init.poi_factors.clone(),
            layers,
            seed,
            loss_trace: Vec::new(),
            adam_states: Vec::new(),
            adam_t: 0,
        };
        model.adam_states = model
            .parameter_lengths()
            .into_iter()
            .map(AdamState::zeros)
            .collect();
        model
    }

    fn parameter_lengths(&self) -> Vec<usize> {
        let mut lens = vec![self.user_emb.len(), self.poi_emb.len()];
        for l in &self.layers {
            lens.push(l.w.len());
            lens.push(l.b.len());
        }
        lens
    }

    /// Raw output-layer logit for (user, POI).
    fn logit(&self, user: UserId, poi: PoiId) -> Result<f64> {
        let (_, _, z) = self.forward(user, poi)?;
        Ok(z)
    }

    /// Forward pass keeping pre- and post-activation vectors for backprop.
    #[allow(clippy::type_complexity)]
    fn forward(&self, user: UserId, poi: PoiId) -> Result<(Vec<Array1<f64>>, Vec<Array1<f64>>, f64)> {
        if user.index() >= self.user_emb.nrows() {
            return Err(CoreError::UnknownUser(user.0));
        }
        if poi.index() >= self.poi_emb.nrows() {
            return Err(CoreError::UnknownPoiIndex(poi.0));
        }
        let mut input = Array1::zeros(2 * self.k);
        input
            .slice_mut(ndarray::s![..self.k])
            .assign(&self.user_emb.row(user.index()));
        input
            .slice_mut(ndarray::s![self.k..])
            .assign(&self.poi_emb.row(poi.index()));

        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = vec![input];
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.w.dot(post.last().expect("nonempty")) + &layer.b;
            if i + 1 < self.layers.len() {
                let a = z.mapv(|x| x.max(0.0));
                pre.push(z);
                post.push(a);
            } else {
                let logit = z[0];
                pre.push(z);
                return Ok((pre, post, logit));
            }
        }
        unreachable!("network always has an output layer")
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable binary cross-entropy from the logit.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (1.0 + (-z.abs()).exp()).ln()
}

/// Gradient tensors mirroring the parameter layout.
#[derive(Debug, Clone)]
pub struct NcfGrads {
    pub user_emb: Array2<f64>,
    pub poi_emb: Array2<f64>,
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl NcfGrads {
    fn zeros_like(model: &NcfModel) -> Self {
        Self {
            user_emb: Array2::zeros(model.user_emb.raw_dim()),
            poi_emb: Array2::zeros(model.poi_emb.raw_dim()),
            layers: model
                .layers
                .iter()
                .map(|l| (Array2::zeros(l.w.raw_dim()), Array1::zeros(l.b.raw_dim())))
                .collect(),
        }
    }
}

/// Mean BCE loss and its gradients over a batch of samples.
pub fn loss_and_grads(model: &NcfModel, batch: &[InteractionSample]) -> Result<(f64, NcfGrads)> {
    let mut grads = NcfGrads::zeros_like(model);
    let mut loss = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for sample in batch {
        let (pre, post, logit) = model.forward(sample.user, sample.poi)?;
        let y = sample.label as f64;
        loss += bce_from_logit(logit, y) * scale;

        // Output layer.
        let mut delta = Array1::from_elem(1, (sigmoid(logit) - y) * scale);
        for li in (0..model.layers.len()).rev() {
            let input = &post[li];
            let (gw, gb) = &mut grads.layers[li];
            for (o, &d) in delta.iter().enumerate() {
                gb[o] += d;
                let mut gw_row = gw.row_mut(o);
                gw_row.scaled_add(d, input);
            }
            if li == 0 {
                let dinput = model.layers[li].w.t().dot(&delta);
                let k = model.k;
                grads
                    .user_emb
                    .row_mut(sample.user.index())
                    .scaled_add(1.0, &dinput.slice(ndarray::s![..k]));
                grads
                    .poi_emb
                    .row_mut(sample.poi.index())
                    .scaled_add(1.0, &dinput.slice(ndarray::s![k..]));
            } else {
                let mut dprev = model.layers[li].w.t().dot(&delta);
                // ReLU mask of the previous layer's pre-activation.
                for (d, &z) in dprev.iter_mut().zip(pre[li - 1].iter()) {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                }
                delta = dprev;
            }
        }
    }
    Ok((loss, grads))
}

/// Train the network; deterministic under `seed` (fixed shuffle and batch
/// order). Errors if the loss goes non-finite or dimensions mismatch.
pub fn train_ncf(
    samples: &[InteractionSample],
    init: &MfModel,
    arch: &NcfArch,
    config: &NcfTrainConfig,
    seed: u64,
) -> Result<NcfModel> {
    if samples.is_empty() {
        return Err(CoreError::InvalidConfig("no training samples".into()));
    }
    let has_pos = samples.iter().any(|s| s.label == 1);
    let has_neg = samples.iter().any(|s| s.label == 0);
    if !has_pos || !has_neg {
        return Err(CoreError::InvalidConfig(
            "training samples must contain both labels".into(),
        ));
    }
    if config.batch_size == 0 {
        return Err(CoreError::InvalidConfig("batch_size must be ≥ 1".into()));
    }
    let mut model = NcfModel::initialize(init, arch, seed);

    let mut order: Vec<usize> = (0..samples.len()).collect();
    for epoch in 0..config.epochs {
        use rand::seq::SliceRandom;
        let mut rng = rng_from_seed(child_seed_indexed(seed, "ncf-epoch", epoch as u64));
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        let mut n_batches = 0usize;
        // TODO: batch the per-sample matvecs into one matmul per layer;
        // full-scale runs spend most of their time in this loop.
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<InteractionSample> = chunk.iter().map(|&i| samples[i]).collect();
            let (loss, grads) = loss_and_grads(&model, &batch)?;
            if !loss.is_finite() {
                return Err(CoreError::Divergence { iteration: epoch });
            }
            epoch_loss += loss;
            n_batches += 1;
            model.adam_t += 1;
            let t = model.adam_t;

            let states = &mut model.adam_states;
            let mut idx = 0;
            let mut apply = |params: &mut [f64], grads: &[f64]| {
                adam_step(params, grads, &mut states[idx], t, &config.adam);
                idx += 1;
            };
            apply(
                model.user_emb.as_slice_mut().expect("contiguous"),
                grads.user_emb.as_slice().expect("contiguous"),
            );
            apply(
                model.poi_emb.as_slice_mut().expect("contiguous"),
                grads.poi_emb.as_slice().expect("contiguous"),
            );
            for (layer, (gw, gb)) in model.layers.iter_mut().zip(&grads.layers) {
                apply(
                    layer.w.as_slice_mut().expect("contiguous"),
                    gw.as_slice().expect("contiguous"),
                );
                apply(
                    layer.b.as_slice_mut().expect("contiguous"),
                    gb.as_slice().expect("contiguous"),
                );
            }
        }
        model.loss_trace.push(epoch_loss / n_batches as f64);
    }
    Ok(model)
}

/// Visit probability in (0, 1).
pub fn ncf_predict(model: &NcfModel, user: UserId, poi: PoiId) -> Result<f64> {
    let z = model.logit(user, poi)?;
    Ok(sigmoid(z).clamp(1e-15, 1.0 - 1e-15))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::pfm::PfmHyperparams;
    use ndarray::Array2;

    fn mf_stub(n_users: usize, n_pois: usize, k: usize, seed: u64) -> MfModel {
        let mut rng = rng_from_seed(seed);
        use rand::Rng;
        MfModel {
            user_factors: Array2::from_shape_fn((n_users, k), |_| rng.random_range(0.01..0.5)),
            poi_factors: Array2::from_shape_fn((n_pois, k), |_| rng.random_range(0.01..0.5)),
            hyper: PfmHyperparams::with_k(k),
            objective_trace: vec![],
            seed,
        }
    }

    fn sample(u: u32, l: u32, label: u8) -> InteractionSample {
        InteractionSample {
            user: UserId(u),
            poi: PoiId(l),
            label,
        }
    }

    #[test]
    fn zeroed_network_predicts_one_half() {
        let init = mf_stub(2, 2, 3, 1);
        let mut model = NcfModel::initialize(&init, &NcfArch { hidden: vec![4] }, 0);
        for layer in &mut model.layers {
            layer.w.fill(0.0);
            layer.b.fill(0.0);
        }
        assert_eq!(ncf_predict(&model, UserId(0), PoiId(1)).unwrap(), 0.5);
    }

    #[test]
    fn predictions_stay_in_open_unit_interval_and_are_pure() {
        let init = mf_stub(30, 40, 4, 3);
        let model = NcfModel::initialize(&init, &NcfArch::default(), 9);
        use rand::Rng;
        let mut rng = rng_from_seed(17);
        for _ in 0..10_000 {
            let u = UserId(rng.random_range(0..30));
            let l = PoiId(rng.random_range(0..40));
            let p = ncf_predict(&model, u, l).unwrap();
            assert!(p > 0.0 && p < 1.0);
            let q = ncf_predict(&model, u, l).unwrap();
            assert_eq!(p.to_bits(), q.to_bits());
        }
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        let init = mf_stub(3, 4, 2, 11);
        let model = NcfModel::initialize(
            &init,
            &NcfArch {
                hidden: vec![5, 3],
            },
            21,
        );
        let batch = vec![
            sample(0, 1, 1),
            sample(1, 2, 0),
            sample(2, 0, 1),
            sample(0, 3, 0),
        ];
        let (_, grads) = loss_and_grads(&model, &batch).unwrap();

        let loss_of = |m: &NcfModel| loss_and_grads(m, &batch).unwrap().0;
        let mut checked = 0usize;
        let mut check = |get: &dyn Fn(&NcfModel) -> f64,
                         set: &dyn Fn(&mut NcfModel, f64),
                         analytic: f64| {
            let h = 1e-5;
            let base = get(&model);
            let mut plus = model.clone();
            set(&mut plus, base + h);
            let mut minus = model.clone();
            set(&mut minus, base - h);
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let rel = (fd - analytic).abs() / (analytic.abs() + fd.abs()).max(1e-8);
            assert!(rel < 1e-3, "param: analytic {analytic} vs fd {fd}, rel {rel}");
            checked += 1;
        };

        for r in 0..3 {
            for c in 0..2 {
                check(
                    &|m| m.user_emb[[r, c]],
                    &|m, v| m.user_emb[[r, c]] = v,
                    grads.user_emb[[r, c]],
                );
            }
        }
        for r in 0..4 {
            for c in 0..2 {
                check(
                    &|m| m.poi_emb[[r, c]],
                    &|m, v| m.poi_emb[[r, c]] = v,
                    grads.poi_emb[[r, c]],
                );
            }
        }
        for li in 0..3 {
            let (rows, cols) = grads.layers[li].0.dim();
            for r in 0..rows {
                for c in 0..cols {
                    check(
                        &|m| m.layers[li].w[[r, c]],
                        &|m, v| m.layers[li].w[[r, c]] = v,
                        grads.layers[li].0[[r, c]],
                    );
                }
                check(
                    &|m| m.layers[li].b[r],
                    &|m, v| m.layers[li].b[r] = v,
                    grads.layers[li].1[r],
                );
            }
        }
        assert!(checked > 50, "checked only {checked} parameters");
    }

    /// 100 samples over a 10×10 grid where label = same block; separable
    /// from the planted embeddings.
    fn separable_toy() -> (Vec<InteractionSample>, MfModel) {
        let k = 2;
        let mut user_factors = Array2::zeros((10, k));
        let mut poi_factors = Array2::zeros((10, k));
        for i in 0..10 {
            user_factors[[i, i % 2]] = 1.0;
            poi_factors[[i, i % 2]] = 1.0;
        }
        let mf = MfModel {
            user_factors,
            poi_factors,
            hyper: PfmHyperparams::with_k(k),
            objective_trace: vec![],
            seed: 0,
        };
        let mut samples = Vec::new();
        for u in 0..10u32 {
            for l in 0..10u32 {
                samples.push(sample(u, l, (u % 2 == l % 2) as u8));
            }
        }
        (samples, mf)
    }

    #[test]
    fn separable_toy_trains_below_loss_threshold() {
        let (samples, mf) = separable_toy();
        let config = NcfTrainConfig {
            adam: AdamHyperparams {
                learning_rate: 0.01,
                ..Default::default()
            },
            epochs: 200,
            batch_size: 16,
        };
        let model = train_ncf(&samples, &mf, &NcfArch { hidden: vec![16, 8] }, &config, 4).unwrap();
        let last = *model.loss_trace.last().unwrap();
        assert!(last < 0.1, "final loss {last}");

        let mean = |label: u8| {
            let vals: Vec<f64> = samples
                .iter()
                .filter(|s| s.label == label)
                .map(|s| ncf_predict(&model, s.user, s.poi).unwrap())
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        assert!(mean(1) > mean(0), "positives should outscore negatives");
    }

    #[test]
    fn deterministic_under_seed_and_single_label_rejected() {
        let (samples, mf) = separable_toy();
        let config = NcfTrainConfig {
            epochs: 3,
            batch_size: 32,
            ..Default::default()
        };
        let arch = NcfArch { hidden: vec![8] };
        let a = train_ncf(&samples, &mf, &arch, &config, 5).unwrap();
        let b = train_ncf(&samples, &mf, &arch, &config, 5).unwrap();
        assert_eq!(a.loss_trace, b.loss_trace);
        assert_eq!(a.user_emb, b.user_emb);

        let positives: Vec<InteractionSample> =
            samples.iter().copied().filter(|s| s.label == 1).collect();
        assert!(train_ncf(&positives, &mf, &arch, &config, 5).is_err());
    }

    #[test]
    fn serialization_round_trip() {
        let init = mf_stub(3, 3, 2, 2);
        let model = NcfModel::initialize(&init, &NcfArch { hidden: vec![4] }, 8);
        let json = crate::scorers::ModelArtifact::new("ncf", model.clone())
            .to_json()
            .unwrap();
        let back = crate::scorers::ModelArtifact::<NcfModel>::from_json(&json).unwrap();
        assert_eq!(back.model, model);
    }

    #[test]
    fn parameter_count_matches_architecture() {
        let init = mf_stub(7, 9, 30, 2);
        let model = NcfModel::initialize(&init, &NcfArch::default(), 8);
        // embeddings + (128×60 + 128) + (64×128 + 64) + (1×64 + 1)
        let expected = 7 * 30 + 9 * 30 + (128 * 60 + 128) + (64 * 128 + 64) + (64 + 1);
        assert_eq!(model.n_parameters(), expected);
    }
}
