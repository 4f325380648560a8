use super::model::Model;
use super::{LstmError, Scalar};

/// Triangular cyclical learning rate. One cycle spans `period` steps: the
/// rate rises linearly from `lr_min` to `lr_max` over the first half and
/// falls back over the second.
pub fn cyclical_lr(step: u64, period: u64, lr_min: f64, lr_max: f64) -> f64 {
    if period < 2 {
        return lr_max;
    }
    let half = period as f64 / 2.0;
    let pos = (step % period) as f64;
    let frac = if pos <= half { pos / half } else { (period as f64 - pos) / half };
    lr_min + (lr_max - lr_min) * frac
}

/// Adam with bias-corrected moment estimates.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
}

impl<F: Scalar> Adam<F> {
    pub fn new(model: &Model<F>, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let zeros = |t: &[F]| vec![F::zero(); t.len()];
        Self {
            beta1,
            beta2,
            epsilon,
            step: 0,
            m: model.tensors().into_iter().map(zeros).collect(),
            v: model.tensors().into_iter().map(zeros).collect(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Apply one update with learning rate `lr`.
    pub fn step(&mut self, model: &mut Model<F>, grads: &Model<F>, lr: f64) -> Result<(), LstmError> {
        let grads = grads.tensors();
        let params = model.tensors_mut();
        if grads.len() != params.len() || params.len() != self.m.len() {
            return Err(LstmError::ShapeMismatch {
                what: "optimizer tensors",
                expected: self.m.len(),
                got: params.len(),
            });
        }
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (F::of(self.beta1), F::of(self.beta2));
        let (one_b1, one_b2) = (F::of(1.0 - self.beta1), F::of(1.0 - self.beta2));
        let step_size = F::of(lr / (1.0 - self.beta1.powi(t)));
        let bc2 = F::of(1.0 / (1.0 - self.beta2.powi(t)));
        let eps = F::of(self.epsilon);
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            if p.len() != g.len() || p.len() != m.len() {
                return Err(LstmError::ShapeMismatch {
                    what: "optimizer tensor",
                    expected: m.len(),
                    got: g.len(),
                });
            }
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + one_b1 * gi;
                v[i] = b2 * v[i] + one_b2 * gi * gi;
                p[i] = p[i] - step_size * m[i] / ((v[i] * bc2).sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Scale `grads` so their global L2 norm is at most `max_norm`. Returns the
/// norm before clipping.
pub(crate) fn clip_global_norm<F: Scalar>(grads: &mut Model<F>, max_norm: f64) -> f64 {
    let norm = grads
        .tensors()
        .iter()
        .flat_map(|t| t.iter())
        .map(|g| g.as_f64() * g.as_f64())
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let k = F::of(max_norm / norm);
        for t in grads.tensors_mut() {
            t.iter_mut().for_each(|g| *g = *g * k);
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::init_model;

    #[test]
    fn triangle_shape() {
        let (lo, hi) = (1e-7, 1e-3);
        assert_eq!(cyclical_lr(0, 8, lo, hi), lo);
        assert!((cyclical_lr(4, 8, lo, hi) - hi).abs() < 1e-18);
        assert!((cyclical_lr(2, 8, lo, hi) - (lo + hi) / 2.0).abs() < 1e-15);
        assert!((cyclical_lr(6, 8, lo, hi) - (lo + hi) / 2.0).abs() < 1e-15);
        assert_eq!(cyclical_lr(8, 8, lo, hi), lo);
        for s in 0..100 {
            let lr = cyclical_lr(s, 10, lo, hi);
            assert!(lr >= lo && lr <= hi);
        }
    }

    #[test]
    fn first_adam_step_moves_by_lr() {
        // With bias correction the first update is lr * g / (|g| + eps).
        let mut m: crate::lstm::Model<f64> = init_model(2, 1, &[1], 0).unwrap();
        let before = m.clone();
        let mut g = m.zeros_like();
        g.head_bias[0] = 0.5;
        g.head_bias[1] = -2.0;
        let mut adam = Adam::new(&m, 0.9, 0.999, 1e-8);
        adam.step(&mut m, &g, 0.01).unwrap();
        assert!((m.head_bias[0] - (before.head_bias[0] - 0.01 * 0.5 / (0.5 + 1e-8))).abs() < 1e-15);
        assert!((m.head_bias[1] - (before.head_bias[1] + 0.01 * 2.0 / (2.0 + 1e-8))).abs() < 1e-15);
        assert_eq!(m.layers, before.layers);
        assert_eq!(adam.steps_taken(), 1);
    }

    #[test]
    fn adam_matches_scalar_recurrence() {
        let mut m: crate::lstm::Model<f64> = init_model(1, 1, &[1], 0).unwrap();
        let mut adam = Adam::new(&m, 0.9, 0.999, 1e-8);
        let (mut mm, mut vv, mut p) = (0.0f64, 0.0f64, m.head_bias[0]);
        for t in 1..=5 {
            let gi = 0.3 * t as f64 - 1.0;
            let mut g = m.zeros_like();
            g.head_bias[0] = gi;
            adam.step(&mut m, &g, 1e-3).unwrap();
            mm = 0.9 * mm + 0.1 * gi;
            vv = 0.999 * vv + 0.001 * gi * gi;
            let mh = mm / (1.0 - 0.9f64.powi(t));
            let vh = vv / (1.0 - 0.999f64.powi(t));
            p -= 1e-3 * mh / (vh.sqrt() + 1e-8);
            assert!((m.head_bias[0] - p).abs() < 1e-12);
        }
    }

    #[test]
    fn clipping_caps_norm() {
        let m: crate::lstm::Model<f64> = init_model(2, 1, &[1], 0).unwrap();
        let mut g = m.zeros_like();
        g.head_bias[0] = 3.0;
        g.head_bias[1] = 4.0;
        assert_eq!(clip_global_norm(&mut g, 1.0), 5.0);
        assert!((g.head_bias[0] - 0.6).abs() < 1e-15);
        assert!((g.head_bias[1] - 0.8).abs() < 1e-15);
    }
}
