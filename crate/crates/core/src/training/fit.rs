use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{joint_loss_on_tape, BatchLabels, LossBreakdown, LossWeights};
use super::Variant;
use crate::datagen::FeatureRow;
use crate::labels::{IclMode, LabeledExample};
use crate::model::Model;
use crate::tensor::{AdamConfig, AdamState, Tape};
use crate::{Error, Result};

/// Flags a run as not converged after `patience` consecutive epochs that fail
/// to beat the best epoch loss so far by a relative margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceRule {
    pub patience: usize,
    pub min_rel_improvement: f64,
}

impl Default for ConvergenceRule {
    fn default() -> Self {
        Self {
            patience: 3,
            min_rel_improvement: 1e-3,
        }
    }
}

impl ConvergenceRule {
    /// Epoch (0-based) at which the rule fires, if it does.
    pub fn first_stall(&self, epoch_losses: &[f64]) -> Option<usize> {
        if self.patience == 0 {
            return None;
        }
        let mut best = f64::INFINITY;
        let mut stalled = 0;
        for (e, &loss) in epoch_losses.iter().enumerate() {
            let improved = best.is_infinite() || loss < best - self.min_rel_improvement * best.abs();
            if improved {
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= self.patience {
                    return Some(e);
                }
            }
            best = best.min(loss);
        }
        None
    }

    pub fn converged(&self, epoch_losses: &[f64]) -> bool {
        self.first_stall(epoch_losses).is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub stop_gradient: bool,
    pub icl_mode: IclMode,
    pub variant: Variant,
    pub convergence: ConvergenceRule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 1.0,
            batch_size: 384,
            epochs: 5,
            adam: AdamConfig::default(),
            seed: 2024,
            stop_gradient: true,
            icl_mode: IclMode::Standard,
            variant: Variant::Full,
            convergence: ConvergenceRule::default(),
        }
    }
}

impl TrainConfig {
    pub fn weights(&self) -> LossWeights {
        LossWeights::new(self.lambda1, self.lambda2, self.lambda3)
    }

    pub fn validate(&self) -> Result<()> {
        self.weights().validate()?;
        if self.batch_size == 0 {
            return Err(Error::Config("train.batch_size must be >= 1".into()));
        }
        let a = &self.adam;
        if !(a.learning_rate > 0.0) || !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || !(a.epsilon > 0.0) {
            return Err(Error::Config(
                "train.adam needs learning_rate > 0, betas in [0, 1) and epsilon > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Weighted joint loss, averaged over each epoch's samples.
    pub epoch_losses: Vec<f64>,
    /// Per-term averages for each epoch.
    pub epoch_terms: Vec<LossBreakdown>,
    pub steps: usize,
    pub converged: bool,
}

/// A labeled training set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>) -> Self {
        Self { examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn batch(&self, indices: &[usize]) -> (Vec<FeatureRow>, BatchLabels) {
        let mut rows = Vec::with_capacity(indices.len());
        let mut labels = BatchLabels::default();
        for &i in indices {
            let ex = &self.examples[i];
            rows.push(ex.features);
            labels.y_t.push(ex.y_t);
            labels.y_s.push(ex.y_s);
            labels.y_icl.push(ex.y_icl);
        }
        (rows, labels)
    }
}

/// Mini-batch Adam over shuffled epochs. Deterministic in `cfg.seed`.
pub fn fit(model: &mut Model, data: &Dataset, cfg: &TrainConfig) -> Result<FitReport> {
    cfg.validate()?;
    let weights = cfg.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x05ee_df17);
    let mut adam = AdamState::new(model.params().tensors(), cfg.adam);
    let mut report = FitReport::default();
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sum = LossBreakdown::default();
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let (rows, labels) = data.batch(chunk);
            let mut tape = Tape::new();
            let bound = model.bind(&mut tape, true);
            let state = model.forward(&mut tape, &bound, &rows, cfg.stop_gradient)?;
            let (loss, parts) = joint_loss_on_tape(&mut tape, &state, &labels, &weights)
                .map_err(|e| diverged(e, epoch, b))?;
            if let Some(term) = parts.non_finite_term() {
                return Err(Error::NonFinite(format!(
                    "loss term `{term}` diverged at epoch {epoch}, batch {b}"
                )));
            }
            tape.backward(loss).map_err(|e| diverged(e, epoch, b))?;
            let grads: Vec<_> = bound.vars().iter().map(|&v| tape.grad_or_zeros(v)).collect();
            adam.step(model.params_mut().tensors_mut(), &grads)?;
            sum.scaled_add(&parts, chunk.len() as f64);
            report.steps += 1;
        }
        let mut mean = LossBreakdown::default();
        if !data.is_empty() {
            mean.scaled_add(&sum, 1.0 / data.len() as f64);
        }
        report.epoch_losses.push(mean.total(&weights));
        report.epoch_terms.push(mean);
    }
    report.converged = cfg.convergence.converged(&report.epoch_losses);
    Ok(report)
}

fn diverged(e: Error, epoch: usize, batch: usize) -> Error {
    match e {
        Error::NonFinite(msg) => Error::NonFinite(format!("{msg} (epoch {epoch}, batch {batch})")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stall_rule() {
        let rule = ConvergenceRule::default();
        assert!(rule.converged(&[1.0, 0.9, 0.8, 0.7, 0.6]));
        assert!(rule.converged(&[1.0, 1.0, 1.0]));
        assert_eq!(rule.first_stall(&[1.0, 1.0, 1.0, 1.0]), Some(3));
        assert_eq!(rule.first_stall(&[1.0, 0.5, 0.9, 0.8, 0.7]), Some(4));
        assert!(rule.converged(&[1.0, 0.9995, 0.999, 0.5]));
        assert!(rule.converged(&[]));
    }

    #[test]
    fn negative_lambda_is_config_error() {
        let cfg = TrainConfig {
            lambda2: -1.0,
            ..TrainConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
