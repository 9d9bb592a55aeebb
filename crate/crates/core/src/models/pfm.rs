//! Poisson probabilistic matrix factorization trained by projected
//! gradient ascent on the log-posterior.
//!
//! The objective over non-negative factor matrices U (users×K) and
//! L (POIs×K) with prior shape σ and scale ρ:
//!
//!   J = Σ_{u,k} ((σ_k−1)·ln(U_uk/ρ_k) − U_uk/ρ_k)
//!     + Σ_{l,k} ((σ_k−1)·ln(L_lk/ρ_k) − L_lk/ρ_k)
//!     + Σ_{u,l} (R_ul·ln(U_u·L_l) − U_u·L_l)
//!
//! The interaction term runs over all (u, l) pairs, but only nonzero counts
//! contribute the log part, and Σ_{u,l} U_u·L_l collapses to
//! colsum(U)·colsum(L), so one iteration is O(nnz·K + (|U|+|L|)·K).

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{FrequencyMatrix, PoiId, UserId};
use crate::error::{CoreError, Result};
use crate::rng::rng_from_seed;

const FACTOR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PfmHyperparams {
    /// Latent dimension.
    pub k: usize,
    /// Prior shape per latent dimension.
    pub sigma: Vec<f64>,
    /// Prior scale per latent dimension.
    pub rho: Vec<f64>,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Halve the step until the objective does not decrease.
    pub line_search: bool,
}

impl Default for PfmHyperparams {
    fn default() -> Self {
        Self {
            k: 30,
            sigma: vec![2.0; 30],
            rho: vec![0.5; 30],
            learning_rate: 1e-3,
            iterations: 300,
            line_search: true,
        }
    }
}

impl PfmHyperparams {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            sigma: vec![2.0; k],
            rho: vec![0.5; k],
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(CoreError::InvalidConfig("PFM needs K ≥ 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(CoreError::InvalidConfig(
                "PFM learning rate must be positive".into(),
            ));
        }
        if self.sigma.len() != self.k || self.rho.len() != self.k {
            return Err(CoreError::InvalidConfig(format!(
                "prior vectors must have length K={}, got σ:{} ρ:{}",
                self.k,
                self.sigma.len(),
                self.rho.len()
            )));
        }
        if self.rho.iter().any(|&r| r <= 0.0) {
            return Err(CoreError::InvalidConfig("prior scales must be positive".into()));
        }
        Ok(())
    }
}

/// Trained factorization; all factor entries stay strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfModel {
    /// |U|×K.
    pub user_factors: Array2<f64>,
    /// |L|×K.
    pub poi_factors: Array2<f64>,
    pub hyper: PfmHyperparams,
    /// Objective value before training and after every iteration.
    pub objective_trace: Vec<f64>,
    pub seed: u64,
}

impl MfModel {
    pub fn k(&self) -> usize {
        self.hyper.k
    }
}

/// Dot product of user and POI latent vectors; ≥ 0 by positivity.
pub fn mf_predict(model: &MfModel, user: UserId, poi: PoiId) -> Result<f64> {
    if user.index() >= model.user_factors.nrows() {
        return Err(CoreError::UnknownUser(user.0));
    }
    if poi.index() >= model.poi_factors.nrows() {
        return Err(CoreError::UnknownPoiIndex(poi.0));
    }
    Ok(model
        .user_factors
        .row(user.index())
        .dot(&model.poi_factors.row(poi.index())))
}

struct Objective<'a> {
    nonzeros: Vec<(usize, usize, f64)>,
    hyper: &'a PfmHyperparams,
}

impl Objective<'_> {
    fn value(&self, u: &Array2<f64>, l: &Array2<f64>) -> f64 {
        let prior = |m: &Array2<f64>| -> f64 {
            let mut acc = 0.0;
            for row in m.rows() {
                for (k, &x) in row.iter().enumerate() {
                    let rho = self.hyper.rho[k];
                    acc += (self.hyper.sigma[k] - 1.0) * (x / rho).ln() - x / rho;
                }
            }
            acc
        };
        let mut interaction = 0.0;
        for &(i, j, r) in &self.nonzeros {
            interaction += r * u.row(i).dot(&l.row(j)).ln();
        }
        let colsum_u = u.sum_axis(Axis(0));
        let colsum_l = l.sum_axis(Axis(0));
        interaction -= colsum_u.dot(&colsum_l);
        prior(u) + prior(l) + interaction
    }

    fn gradients(&self, u: &Array2<f64>, l: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let k = self.hyper.k;
        let colsum_u = u.sum_axis(Axis(0));
        let colsum_l = l.sum_axis(Axis(0));

        let prior_grad = |m: &Array2<f64>, colsum_other: &Array1<f64>| -> Array2<f64> {
            let mut g = Array2::zeros(m.raw_dim());
            for (mut grow, mrow) in g.rows_mut().into_iter().zip(m.rows()) {
                for kk in 0..k {
                    grow[kk] = (self.hyper.sigma[kk] - 1.0) / mrow[kk] - 1.0 / self.hyper.rho[kk]
                        - colsum_other[kk];
                }
            }
            g
        };
        let mut grad_u = prior_grad(u, &colsum_l);
        let mut grad_l = prior_grad(l, &colsum_u);

        for &(i, j, r) in &self.nonzeros {
            let pred = u.row(i).dot(&l.row(j));
            let scale = r / pred;
            let urow = u.row(i).to_owned();
            let lrow = l.row(j).to_owned();
            grad_u.row_mut(i).scaled_add(scale, &lrow);
            grad_l.row_mut(j).scaled_add(scale, &urow);
        }
        (grad_u, grad_l)
    }
}

fn clamped_step(m: &Array2<f64>, grad: &Array2<f64>, lr: f64) -> Array2<f64> {
    let mut next = m + &(grad * lr);
    next.mapv_inplace(|x| x.max(FACTOR_FLOOR));
    next
}

/// Train by projected gradient ascent; factors init uniform in (0.01, 0.1).
///
/// With `line_search` on, each iteration halves the step until the
/// objective does not decrease, so the recorded trace is non-decreasing.
pub fn train_pfm(matrix: &FrequencyMatrix, hyper: PfmHyperparams, seed: u64) -> Result<MfModel> {
    hyper.validate()?;
    let nonzeros: Vec<(usize, usize, f64)> = (0..matrix.n_users())
        .flat_map(|u| {
            matrix
                .user_row(UserId(u as u32))
                .map(move |(l, c)| (u, l.index(), c as f64))
        })
        .collect();
    if nonzeros.is_empty() {
        return Err(CoreError::EmptyMatrix);
    }

    let mut rng = rng_from_seed(seed);
    let mut init = |rows: usize| {
        Array2::from_shape_fn((rows, hyper.k), |_| rng.random_range(0.01..0.1))
    };
    let mut u = init(matrix.n_users());
    let mut l = init(matrix.n_pois());

    let objective = Objective {
        nonzeros,
        hyper: &hyper,
    };
    let mut current = objective.value(&u, &l);
    if !current.is_finite() {
        return Err(CoreError::Divergence { iteration: 0 });
    }
    let mut trace = Vec::with_capacity(hyper.iterations + 1);
    trace.push(current);

    for iteration in 1..=hyper.iterations {
        let (grad_u, grad_l) = objective.gradients(&u, &l);
        let mut lr = hyper.learning_rate;
        let mut accepted = false;
        for _ in 0..40 {
            let next_u = clamped_step(&u, &grad_u, lr);
            let next_l = clamped_step(&l, &grad_l, lr);
            let next_value = objective.value(&next_u, &next_l);
            if !next_value.is_finite() {
                return Err(CoreError::Divergence { iteration });
            }
            if !hyper.line_search || next_value >= current {
                u = next_u;
                l = next_l;
                current = next_value;
                accepted = true;
                break;
            }
            lr /= 2.0;
        }
        // Line search exhausted: stationary for this gradient scale; the
        // parameters stay put and the trace stays flat.
        let _ = accepted;
        trace.push(current);
    }

    Ok(MfModel {
        user_factors: u,
        poi_factors: l,
        hyper,
        objective_trace: trace,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::CheckinEvent;
    use ndarray::array;

    fn matrix_for(counts: &[&[u32]]) -> FrequencyMatrix {
        let n_users = counts.len();
        let n_pois = counts[0].len();
        let mut lists = vec![Vec::new(); n_users];
        for (u, row) in counts.iter().enumerate() {
            for (l, &c) in row.iter().enumerate() {
                for t in 0..c {
                    lists[u].push(CheckinEvent {
                        user: UserId(u as u32),
                        poi: PoiId(l as u32),
                        timestamp: t as i64,
                    });
                }
            }
        }
        FrequencyMatrix::from_checkins(n_users, n_pois, &lists)
    }

    #[test]
    fn predict_is_the_dot_product() {
        let model = MfModel {
            user_factors: array![[1.0, 2.0]],
            poi_factors: array![[3.0, 4.0]],
            hyper: PfmHyperparams::with_k(2),
            objective_trace: vec![],
            seed: 0,
        };
        assert_eq!(mf_predict(&model, UserId(0), PoiId(0)).unwrap(), 11.0);
        assert!(mf_predict(&model, UserId(1), PoiId(0)).is_err());
        assert!(mf_predict(&model, UserId(0), PoiId(1)).is_err());
    }

    #[test]
    fn unit_basis_vectors_predict_one() {
        let model = MfModel {
            user_factors: array![[0.0, 1.0, 0.0]],
            poi_factors: array![[0.0, 1.0, 0.0]],
            hyper: PfmHyperparams::with_k(3),
            objective_trace: vec![],
            seed: 0,
        };
        assert_eq!(mf_predict(&model, UserId(0), PoiId(0)).unwrap(), 1.0);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let matrix = matrix_for(&[&[3, 0, 1], &[0, 2, 0], &[1, 1, 4]]);
        let hyper = PfmHyperparams::with_k(3);
        let nonzeros: Vec<(usize, usize, f64)> = (0..3)
            .flat_map(|u| {
                matrix
                    .user_row(UserId(u as u32))
                    .map(move |(l, c)| (u, l.index(), c as f64))
            })
            .collect();
        let objective = Objective {
            nonzeros,
            hyper: &hyper,
        };
        let mut rng = rng_from_seed(42);
        let u = Array2::from_shape_fn((3, 3), |_| rng.random_range(0.01..0.1));
        let l = Array2::from_shape_fn((3, 3), |_| rng.random_range(0.01..0.1));
        let (grad_u, grad_l) = objective.gradients(&u, &l);

        let check = |m: &Array2<f64>, other: &Array2<f64>, grad: &Array2<f64>, is_user: bool| {
            for i in 0..m.nrows() {
                for k in 0..m.ncols() {
                    let h = 1e-7 * m[[i, k]].abs().max(1e-3);
                    let mut plus = m.clone();
                    plus[[i, k]] += h;
                    let mut minus = m.clone();
                    minus[[i, k]] -= h;
                    let (vp, vm) = if is_user {
                        (objective.value(&plus, other), objective.value(&minus, other))
                    } else {
                        (objective.value(other, &plus), objective.value(other, &minus))
                    };
                    let fd = (vp - vm) / (2.0 * h);
                    let analytic = grad[[i, k]];
                    let rel = (fd - analytic).abs() / analytic.abs().max(1.0);
                    assert!(
                        rel < 1e-4,
                        "entry ({i},{k}): analytic {analytic} vs fd {fd}, rel {rel}"
                    );
                }
            }
        };
        check(&u, &l, &grad_u, true);
        check(&l, &u, &grad_l, false);
    }

    #[test]
    fn objective_trace_is_monotone_at_small_plain_step() {
        let matrix = matrix_for(&[
            &[5, 0, 1, 0, 2],
            &[0, 3, 0, 1, 0],
            &[2, 0, 4, 0, 0],
            &[0, 1, 0, 2, 1],
            &[1, 0, 0, 0, 3],
        ]);
        let hyper = PfmHyperparams {
            learning_rate: 1e-4,
            iterations: 150,
            line_search: false,
            ..PfmHyperparams::with_k(4)
        };
        let model = train_pfm(&matrix, hyper, 7).unwrap();
        for w in model.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "trace decreased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn positivity_preserved_after_training() {
        let matrix = matrix_for(&[&[2, 0], &[0, 5]]);
        let hyper = PfmHyperparams {
            iterations: 50,
            ..PfmHyperparams::with_k(2)
        };
        let model = train_pfm(&matrix, hyper, 1).unwrap();
        assert!(model.user_factors.iter().all(|&x| x > 0.0));
        assert!(model.poi_factors.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn empty_matrix_errors() {
        let matrix = FrequencyMatrix::new(2, 2);
        assert!(matches!(
            train_pfm(&matrix, PfmHyperparams::with_k(2), 0),
            Err(CoreError::EmptyMatrix)
        ));
    }

    #[test]
    fn default_k_is_thirty() {
        assert_eq!(PfmHyperparams::default().k, 30);
    }

    #[test]
    fn deterministic_under_seed() {
        let matrix = matrix_for(&[&[2, 1], &[0, 3]]);
        let hyper = PfmHyperparams {
            iterations: 20,
            ..PfmHyperparams::with_k(2)
        };
        let a = train_pfm(&matrix, hyper.clone(), 5).unwrap();
        let b = train_pfm(&matrix, hyper, 5).unwrap();
        assert_eq!(a.user_factors, b.user_factors);
        assert_eq!(a.objective_trace, b.objective_trace);
    }
}
