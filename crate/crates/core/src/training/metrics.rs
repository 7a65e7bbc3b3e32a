use crate::tensor::tape::mean_binary_cross_entropy;
use crate::{Error, Result};

fn check_inputs(what: &str, scores: &[f64], labels: &[f64]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{what}: {} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("{what}: score {s}")));
    }
    if let Some(y) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
        return Err(Error::Contract(format!("{what}: label {y} is not 0 or 1")));
    }
    Ok(())
}

/// Area under the ROC curve by rank sum; tied scores share their mean rank.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    check_inputs("auc", scores, labels)?;
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "auc needs both classes ({n_pos} positive, {n_neg} negative)"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; the tie group i..=j shares their mean
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        let positives = order[i..=j].iter().filter(|&&k| labels[k] == 1.0).count();
        pos_rank_sum += mean_rank * positives as f64;
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Mean binary cross-entropy with scores clipped to `[1e-7, 1 - 1e-7]`.
pub fn logloss(scores: &[f64], labels: &[f64]) -> Result<f64> {
    check_inputs("logloss", scores, labels)?;
    Ok(mean_binary_cross_entropy(scores, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_edges() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(auc(&[0.3; 6], &[0.0, 1.0, 0.0, 1.0, 1.0, 0.0]).unwrap(), 0.5);
        assert!(matches!(auc(&[0.1, 0.2], &[1.0, 1.0]), Err(Error::UndefinedMetric(_))));
        assert!(auc(&[0.1, f64::NAN], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn logloss_half_is_ln2() {
        let l = logloss(&[0.5; 4], &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(logloss(&[0.0, 1.0], &[0.0, 1.0]).unwrap() < 1e-6);
    }
}
