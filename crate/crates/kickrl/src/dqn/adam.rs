//! Adaptive-moment gradient updates with bias correction.

use crate::dqn::network::{NetGradients, QNetwork};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First/second moment estimates for one parameter array.
#[derive(Debug, Clone)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Optimizer state paired with a network: one moment pair per parameter
/// array, plus the shared step counter used for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    moments: Vec<Moments>,
    t: u64,
}

impl AdamState {
    pub fn new(net: &QNetwork) -> Self {
        let mut moments = Vec::new();
        for l in 0..net.dims().len() - 1 {
            let layer = net.layer(l);
            for len in [layer.w.len(), layer.b.len()] {
                moments.push(Moments {
                    m: vec![0.0; len],
                    v: vec![0.0; len],
                });
            }
        }
        Self { moments, t: 0 }
    }

    pub fn step(&self) -> u64 {
        self.t
    }

    /// Applies one update to every parameter of `net` from `grads`.
    pub fn apply(&mut self, net: &mut QNetwork, grads: &NetGradients, learning_rate: f64) {
        self.t += 1;
        let t = self.t;
        let n_layers = net.dims().len() - 1;
        for l in 0..n_layers {
            let g = grads.layer(l);
            let layer = net.layer_mut(l);
            let mom = &mut self.moments[2 * l];
            adam_update(&mut layer.w, &g.w, &mut mom.m, &mut mom.v, t, learning_rate);
            let mom = &mut self.moments[2 * l + 1];
            adam_update(&mut layer.b, &g.b, &mut mom.m, &mut mom.v, t, learning_rate);
        }
    }
}

/// In-place adaptive-moment update of one parameter array.
///
/// `t` is the 1-based update count shared by all arrays of a network.
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    t: u64,
    learning_rate: f64,
) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), m.len());
    assert_eq!(params.len(), v.len());
    let bc1 = 1.0 - BETA1.powi(t as i32);
    let bc2 = 1.0 - BETA2.powi(t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
        v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= learning_rate * m_hat / (v_hat.sqrt() + EPSILON);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_gradient_is_a_no_op_on_fresh_state() {
        let mut p = vec![1.5, -0.25];
        let mut m = vec![0.0; 2];
        let mut v = vec![0.0; 2];
        adam_update(&mut p, &[0.0, 0.0], &mut m, &mut v, 1, 0.1);
        assert_eq!(p, vec![1.5, -0.25]);
        assert_eq!(m, vec![0.0, 0.0]);
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn moments_decay_without_gradient() {
        let mut p = vec![0.0];
        let mut m = vec![1.0];
        let mut v = vec![1.0];
        adam_update(&mut p, &[0.0], &mut m, &mut v, 5, 0.0);
        assert_abs_diff_eq!(m[0], BETA1, epsilon = 1e-15);
        assert_abs_diff_eq!(v[0], BETA2, epsilon = 1e-15);
    }

    #[test]
    fn first_step_moves_by_learning_rate_times_sign() {
        for &g in &[0.3, -0.007, 12.0] {
            let mut p = vec![2.0];
            let mut m = vec![0.0];
            let mut v = vec![0.0];
            adam_update(&mut p, &[g], &mut m, &mut v, 1, 0.01);
            // Bias-corrected first step: -lr * g / (|g| + eps).
            assert_abs_diff_eq!(p[0], 2.0 - 0.01 * g.signum(), epsilon = 1e-6);
        }
    }

    #[test]
    fn update_is_deterministic() {
        let run = || {
            let mut p = vec![1.0, 2.0, 3.0];
            let mut m = vec![0.0; 3];
            let mut v = vec![0.0; 3];
            for t in 1..=10 {
                adam_update(&mut p, &[0.5, -0.1, 0.0], &mut m, &mut v, t, 0.05);
            }
            (p, m, v)
        };
        assert_eq!(run(), run());
    }
}
