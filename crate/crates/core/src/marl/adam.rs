use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Adaptive-moment optimiser state for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub t: u64,
    pub hp: AdamParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl<T: Real> Adam<T> {
    pub fn new(n: usize, hp: AdamParams) -> Self {
        Adam { m: vec![T::zero(); n], v: vec![T::zero(); n], t: 0, hp }
    }

    /// One descent step on `params` along `grad`. A zero learning rate
    /// leaves everything, including the moments, untouched.
    pub fn step(&mut self, params: &mut [T], grad: &[T], lr: f64) {
        assert_eq!(params.len(), grad.len(), "adam shape");
        if lr == 0.0 {
            return;
        }
        self.t += 1;
        let b1 = T::of(self.hp.beta1);
        let b2 = T::of(self.hp.beta2);
        let one = T::one();
        let c1 = one - b1.powi(self.t.min(i32::MAX as u64) as i32);
        let c2 = one - b2.powi(self.t.min(i32::MAX as u64) as i32);
        let lr = T::of(lr);
        let eps = T::of(self.hp.eps);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + (one - b1) * g;
            self.v[i] = b2 * self.v[i] + (one - b2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut opt = Adam::<f64>::new(2, AdamParams::default());
        let mut p = vec![1.0, -1.0];
        opt.step(&mut p, &[0.5, -2.0], 0.01);
        assert!((p[0] - 0.99).abs() < 1e-6);
        assert!((p[1] + 0.99).abs() < 1e-6);
    }

    #[test]
    fn zero_rate_is_a_no_op() {
        let mut opt = Adam::<f64>::new(1, AdamParams::default());
        let mut p = vec![0.25];
        opt.step(&mut p, &[3.0], 0.0);
        assert_eq!(p, vec![0.25]);
        assert_eq!(opt.t, 0);
    }

    #[test]
    fn minimises_quadratic() {
        let mut opt = Adam::<f64>::new(1, AdamParams::default());
        let mut p = vec![5.0];
        for _ in 0..5000 {
            let g = 2.0 * (p[0] - 2.0);
            opt.step(&mut p, &[g], 0.01);
        }
        assert!((p[0] - 2.0).abs() < 1e-3);
    }
}
