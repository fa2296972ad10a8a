//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::params::ParamStore;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// First/second moment state, one pair of buffers per parameter tensor,
/// aligned with the store order.
#[derive(Debug, Clone)]
pub struct Adam {
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(store: &ParamStore) -> Self {
        let sizes: Vec<usize> = store.iter().map(|(_, t)| t.len()).collect();
        Adam {
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update: theta -= lr * m_hat / (sqrt(v_hat) + eps).
    pub fn step(&mut self, store: &mut ParamStore, grads: &[Vec<f64>], lr: f64) -> Result<()> {
        if grads.len() != self.m.len() {
            return Err(Error::InvalidArg(format!(
                "adam: {} gradient buffers for {} parameters",
                grads.len(),
                self.m.len()
            )));
        }
        self.step += 1;
        let bc1 = 1.0 - BETA1.powi(self.step as i32);
        let bc2 = 1.0 - BETA2.powi(self.step as i32);
        for (pi, tensor) in store.tensors_mut().enumerate() {
            let g = &grads[pi];
            if g.len() != tensor.len() {
                return Err(Error::InvalidArg(format!(
                    "adam: gradient {pi} has {} values for a {}-value parameter",
                    g.len(),
                    tensor.len()
                )));
            }
            let m = &mut self.m[pi];
            let v = &mut self.v[pi];
            let data = tensor.data_mut();
            for i in 0..g.len() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                data[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn store_with_one(value: f64) -> ParamStore {
        let mut s = ParamStore::new();
        s.add("theta", Tensor::scalar(value));
        s
    }

    #[test]
    fn first_step_moves_by_roughly_lr() {
        // Bias correction makes the first update lr * g / (|g| + eps).
        let mut store = store_with_one(1.0);
        let mut opt = Adam::new(&store);
        opt.step(&mut store, &[vec![0.5]], 1e-3).unwrap();
        let theta = store.value(crate::params::ParamId(0)).data()[0];
        assert!((theta - (1.0 - 1e-3)).abs() < 1e-9, "theta {theta}");
    }

    #[test]
    fn zero_gradient_keeps_parameter_fixed() {
        let mut store = store_with_one(2.5);
        let mut opt = Adam::new(&store);
        opt.step(&mut store, &[vec![0.0]], 1e-3).unwrap();
        assert_eq!(store.value(crate::params::ParamId(0)).data()[0], 2.5);
    }

    #[test]
    fn constant_gradient_keeps_step_size_near_lr() {
        let mut store = store_with_one(0.0);
        let mut opt = Adam::new(&store);
        opt.step(&mut store, &[vec![0.5]], 1e-3).unwrap();
        let after_one = store.value(crate::params::ParamId(0)).data()[0];
        opt.step(&mut store, &[vec![0.5]], 1e-3).unwrap();
        let after_two = store.value(crate::params::ParamId(0)).data()[0];
        let second_move = (after_two - after_one).abs();
        assert!(
            (second_move - 1e-3).abs() < 1e-5,
            "second step moved {second_move}"
        );
    }

    #[test]
    fn mismatched_gradient_layout_is_rejected() {
        let mut store = store_with_one(1.0);
        let mut opt = Adam::new(&store);
        assert!(opt.step(&mut store, &[], 1e-3).is_err());
        assert!(opt.step(&mut store, &[vec![0.0, 1.0]], 1e-3).is_err());
    }
}
