use serde::{Deserialize, Serialize};

use crate::model::{combine_values, ForwardState};
use crate::tensor::{Tape, Var};
use crate::{Error, Result};

/// Weights of the three loss terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::new(1.0, 1.0, 1.0)
    }
}

impl LossWeights {
    pub const fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Self {
        Self {
            lambda1,
            lambda2,
            lambda3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2), ("lambda3", self.lambda3)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn all_zero(&self) -> bool {
        self.lambda1 == 0.0 && self.lambda2 == 0.0 && self.lambda3 == 0.0
    }
}

/// Batch-mean value of each term, unweighted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub ce_target: f64,
    pub ce_source: f64,
    pub icl_l1: f64,
}

impl LossBreakdown {
    pub fn total(&self, w: &LossWeights) -> f64 {
        w.lambda1 * self.ce_target + w.lambda2 * self.ce_source + w.lambda3 * self.icl_l1
    }

    /// Name of the first non-finite term, if any.
    pub fn non_finite_term(&self) -> Option<&'static str> {
        [
            ("ce_target", self.ce_target),
            ("ce_source", self.ce_source),
            ("icl_l1", self.icl_l1),
        ]
        .into_iter()
        .find(|(_, v)| !v.is_finite())
        .map(|(n, _)| n)
    }

    pub(crate) fn scaled_add(&mut self, other: &LossBreakdown, weight: f64) {
        self.ce_target += other.ce_target * weight;
        self.ce_source += other.ce_source * weight;
        self.icl_l1 += other.icl_l1 * weight;
    }
}

/// Labels of one batch, column-wise.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BatchLabels {
    pub y_t: Vec<f64>,
    pub y_s: Vec<f64>,
    pub y_icl: Vec<f64>,
}

impl BatchLabels {
    pub fn len(&self) -> usize {
        self.y_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_t.is_empty()
    }
}

/// Joint loss over plain numbers, for reporting and checks.
///
/// `preds` holds `(P_target, P_source, P_trans)` per sample.
pub fn joint_loss(preds: &[(f64, f64, f64)], labels: &BatchLabels, w: &LossWeights) -> Result<(f64, LossBreakdown)> {
    w.validate()?;
    let n = labels.len();
    if preds.len() != n || labels.y_s.len() != n || labels.y_icl.len() != n {
        return Err(Error::Dimension(format!(
            "joint loss: {} predictions for {n} labels",
            preds.len()
        )));
    }
    if n == 0 {
        return Err(Error::Contract("joint loss of an empty batch".into()));
    }
    let pt: Vec<f64> = preds.iter().map(|p| p.0).collect();
    let ps: Vec<f64> = preds.iter().map(|p| p.1).collect();
    let l1 = preds
        .iter()
        .zip(&labels.y_icl)
        .map(|(&(a, b, c), &y)| (y - combine_values(a, b, c)).abs())
        .sum::<f64>()
        / n as f64;
    let parts = LossBreakdown {
        ce_target: crate::tensor::tape::mean_binary_cross_entropy(&pt, &labels.y_t),
        ce_source: crate::tensor::tape::mean_binary_cross_entropy(&ps, &labels.y_s),
        icl_l1: l1,
    };
    Ok((parts.total(w), parts))
}

/// Joint loss on the tape. `state.p_whole` already carries the stop-gradient
/// choice made in the forward pass.
pub fn joint_loss_on_tape(
    tape: &mut Tape,
    state: &ForwardState,
    labels: &BatchLabels,
    w: &LossWeights,
) -> Result<(Var, LossBreakdown)> {
    w.validate()?;
    let ce_t = tape.cross_entropy(state.ipn.p_target, &labels.y_t)?;
    let ce_s = tape.cross_entropy(state.ipn.p_source, &labels.y_s)?;
    let l1 = tape.l1_loss(state.p_whole, &labels.y_icl)?;
    let parts = LossBreakdown {
        ce_target: tape.value(ce_t).item()?,
        ce_source: tape.value(ce_s).item()?,
        icl_l1: tape.value(l1).item()?,
    };
    let total = tape.weighted_sum(&[(ce_t, w.lambda1), (ce_s, w.lambda2), (l1, w.lambda3)])?;
    Ok((total, parts))
}
