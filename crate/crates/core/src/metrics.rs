//! Binary classification metrics.
//!
//! Labels are in `{0, 1}` with 1 the positive class. Ratios with an empty
//! denominator (no predicted positives, no actual positives, ...) are
//! reported as 0.0 rather than NaN so downstream tables stay finite;
//! callers that need to distinguish "no positives" from "all wrong" can
//! read the raw confusion counts.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

fn check_labels(name: &str, y: &[u8]) -> Result<()> {
    if let Some(pos) = y.iter().position(|&v| v > 1) {
        return Err(Error::Data(format!("{name} label at row {pos} is {}, expected 0 or 1", y[pos])));
    }
    Ok(())
}

/// Confusion-matrix metrics for predictions against true labels.
pub fn classification_metrics(y_true: &[u8], y_pred: &[u8]) -> Result<ClassificationMetrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Usage(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Data("no samples to score".into()));
    }
    check_labels("true", y_true)?;
    check_labels("predicted", y_pred)?;

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fn_ = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (0, 0) => tn += 1,
            _ => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ClassificationMetrics {
        accuracy: ratio(tp + tn, y_true.len()),
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
    })
}

/// Area under the ROC curve from continuous class-1 scores.
///
/// Computed by the rank statistic: with ascending mid-ranks (ties get the
/// average of their rank range), `AUC = (R_pos - n_pos (n_pos + 1)/2) /
/// (n_pos n_neg)`, which equals the probability that a random positive
/// outranks a random negative, counting ties as half. Requires both
/// classes to be present.
pub fn auroc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::Usage(format!(
            "{} labels but {} scores",
            y_true.len(),
            scores.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Data("no samples to score".into()));
    }
    check_labels("true", y_true)?;
    if let Some(pos) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Data(format!("score at row {pos} is not finite")));
    }
    let n_pos = y_true.iter().filter(|&&v| v == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Data("auroc is undefined when only one class is present".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // mid-ranks: every member of a tie group gets the group's average rank
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j average to (i + j + 1) / 2
        let mid_rank = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            if y_true[idx] == 1 {
                rank_sum_pos += mid_rank;
            }
        }
        i = j;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

/// One model's full evaluation row: thresholded metrics, ranking quality,
/// and the raw confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auroc: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub n: usize,
}

/// Runs a trained model over a labelled dataset and assembles the report.
/// `predict` maps a feature row to a class in `{0, 1}`; `score` maps it to
/// a real value where larger means more class 1 (a decision value or a
/// probability both work, since AUROC only uses the ordering).
pub fn evaluate_model<P, S>(
    predict: P,
    score: S,
    x: &Array2<f64>,
    y: &[u8],
) -> Result<MetricsReport>
where
    P: Fn(&[f64]) -> Result<u8>,
    S: Fn(&[f64]) -> Result<f64>,
{
    if x.nrows() != y.len() {
        return Err(Error::Usage(format!("{} feature rows but {} labels", x.nrows(), y.len())));
    }
    let mut predictions = Vec::with_capacity(y.len());
    let mut scores = Vec::with_capacity(y.len());
    for row in x.rows() {
        let row = row.to_vec();
        predictions.push(predict(&row)?);
        scores.push(score(&row)?);
    }
    let m = classification_metrics(y, &predictions)?;
    let auroc = auroc(y, &scores)?;
    Ok(MetricsReport {
        accuracy: m.accuracy,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        auroc,
        true_positives: m.true_positives,
        false_positives: m.false_positives,
        true_negatives: m.true_negatives,
        false_negatives: m.false_negatives,
        n: y.len(),
    })
}
