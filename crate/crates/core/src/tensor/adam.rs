use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment estimates for every parameter, plus the step count
/// used for bias correction.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
    step: u64,
}

impl AdamState {
    pub fn new(params: &[Tensor], config: AdamConfig) -> Self {
        let zeros = || params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        Self {
            config,
            first: zeros(),
            second: zeros(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moments(&self) -> &[Tensor] {
        &self.first
    }

    pub fn second_moments(&self) -> &[Tensor] {
        &self.second
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != params.len() {
            return Err(Error::Dimension(format!(
                "adam: {} params, {} grads, {} moment slots",
                params.len(),
                grads.len(),
                self.first.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != g.shape() || p.shape() != self.first[i].shape() {
                return Err(Error::Dimension(format!(
                    "adam: parameter {i} shape {:?}, gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
            }
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
        {
            for (((pv, &gv), mv), vv) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mv = beta1 * *mv + (1.0 - beta1) * gv;
                *vv = beta2 * *vv + (1.0 - beta2) * gv * gv;
                let m_hat = *mv / c1;
                let v_hat = *vv / c2;
                *pv -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut params = vec![Tensor::vector(vec![0.3, -1.2]).unwrap()];
        let before = params.clone();
        let mut adam = AdamState::new(&params, AdamConfig::default());
        adam.step(&mut params, &[Tensor::zeros(&[2])]).unwrap();
        assert_eq!(params, before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // t = 1: m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
        let mut params = vec![Tensor::scalar(0.5)];
        let mut adam = AdamState::new(&params, AdamConfig::default());
        adam.step(&mut params, &[Tensor::scalar(1.0)]).unwrap();
        let expected = 0.5 - 1e-3 * 1.0 / (1.0 + 1e-8);
        assert!((params[0].data()[0] - expected).abs() < 1e-15);
        assert!((params[0].data()[0] - 0.5 + 0.001).abs() < 1e-10);
    }

    #[test]
    fn step_counter_increments() {
        let mut params = vec![Tensor::scalar(0.0)];
        let mut adam = AdamState::new(&params, AdamConfig::default());
        for k in 1..=4 {
            adam.step(&mut params, &[Tensor::scalar(0.1)]).unwrap();
            assert_eq!(adam.step_count(), k);
        }
    }

    #[test]
    fn shape_mismatch_is_dimension_error() {
        let mut params = vec![Tensor::zeros(&[2])];
        let mut adam = AdamState::new(&params, AdamConfig::default());
        let err = adam.step(&mut params, &[Tensor::zeros(&[3])]).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
        assert_eq!(adam.step_count(), 0);
    }

    #[test]
    fn moments_match_parameter_shapes() {
        let params = vec![Tensor::zeros(&[3, 2]), Tensor::zeros(&[5])];
        let adam = AdamState::new(&params, AdamConfig::default());
        for (p, (m, v)) in params
            .iter()
            .zip(adam.first_moments().iter().zip(adam.second_moments()))
        {
            assert_eq!(p.shape(), m.shape());
            assert_eq!(p.shape(), v.shape());
        }
    }
}
