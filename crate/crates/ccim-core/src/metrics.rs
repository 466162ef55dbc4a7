//! Ranking and classification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluation summary for one trained model on one split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub per_class_ap: Vec<f64>,
    /// Arithmetic mean of `per_class_ap`.
    pub map: f64,
    /// Mean train loss per epoch, copied from the training run.
    pub loss_curve: Vec<f64>,
}

/// Average precision: mean of precision-at-rank over the positive items,
/// ranked by descending score with ties broken by original index. No
/// positives yields 0 by convention.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::Size("average_precision needs at least one element".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("scores".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    if n_pos == 0 {
        return Ok(0.0);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| {
        scores[j]
            .partial_cmp(&scores[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut seen_pos = 0usize;
    let mut acc = 0.0;
    for (rank0, &idx) in order.iter().enumerate() {
        if labels[idx] {
            seen_pos += 1;
            acc += seen_pos as f64 / (rank0 + 1) as f64;
        }
    }
    Ok(acc / n_pos as f64)
}
