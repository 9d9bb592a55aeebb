//! Adam optimizer with bias-corrected moment estimates.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamHyperparams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment buffers for one parameter tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn zeros(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// One Adam descent step over a flat parameter tensor.
///
/// `t` is the 1-based global step count (shared across tensors):
///   m ← β1·m + (1−β1)·g,  v ← β2·v + (1−β2)·g²,
///   θ ← θ − lr · m̂ / (√v̂ + ε)  with  m̂ = m/(1−β1^t),  v̂ = v/(1−β2^t).
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    t: usize,
    hyper: &AdamHyperparams,
) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), state.m.len());
    let bc1 = 1.0 - hyper.beta1.powi(t as i32);
    let bc2 = 1.0 - hyper.beta2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g;
        state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= hyper.learning_rate * m_hat / (v_hat.sqrt() + hyper.epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_steps_match_hand_stepped_recurrence() {
        let hyper = AdamHyperparams {
            learning_rate: 0.1,
            ..Default::default()
        };
        let grads = [0.1, -0.2, 0.3];
        let mut theta = [1.0];
        let mut state = AdamState::zeros(1);
        for (i, &g) in grads.iter().enumerate() {
            adam_step(&mut theta, &[g], &mut state, i + 1, &hyper);
        }

        // Straight-line restatement of the recurrence, no shared code.
        let (b1, b2, lr, eps) = (0.9, 0.999, 0.1, 1e-8);
        let mut m = 0.0;
        let mut v = 0.0;
        let mut x: f64 = 1.0;
        m = b1 * m + (1.0 - b1) * 0.1;
        v = b2 * v + (1.0 - b2) * 0.1 * 0.1;
        x -= lr * (m / (1.0 - b1_pow(b1, 1))) / ((v / (1.0 - b2_pow(b2, 1))).sqrt() + eps);
        m = b1 * m + (1.0 - b1) * -0.2;
        v = b2 * v + (1.0 - b2) * 0.2 * 0.2;
        x -= lr * (m / (1.0 - b1_pow(b1, 2))) / ((v / (1.0 - b2_pow(b2, 2))).sqrt() + eps);
        m = b1 * m + (1.0 - b1) * 0.3;
        v = b2 * v + (1.0 - b2) * 0.3 * 0.3;
        x -= lr * (m / (1.0 - b1_pow(b1, 3))) / ((v / (1.0 - b2_pow(b2, 3))).sqrt() + eps);

        assert!((theta[0] - x).abs() < 1e-15, "{} vs {}", theta[0], x);
    }

    fn b1_pow(b: f64, t: i32) -> f64 {
        b.powi(t)
    }
    fn b2_pow(b: f64, t: i32) -> f64 {
        b.powi(t)
    }
}
