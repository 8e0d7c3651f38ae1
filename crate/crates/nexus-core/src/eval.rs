//! Precision/recall/F1 of a decided join graph against ground truth,
//! compared as undirected column pairs.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Error;
use crate::ingest::GroundTruth;
use crate::model::JoinGraphMatrix;

/// Exact confusion counts and the derived metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalResult {
    /// Derives the metrics from counts, with every zero denominator read as 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, denom: usize| {
            if denom == 0 {
                0.0
            } else {
                num as f64 / denom as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        EvalResult {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1,
        }
    }
}

/// Scores predicted edges against the ground truth. Known and completed
/// positives count alike; both sides are treated as undirected pairs.
pub fn evaluate(predicted: &JoinGraphMatrix, truth: &GroundTruth) -> Result<EvalResult, Error> {
    let n = predicted.n();
    if let Some(&(i, j)) = truth.edges.iter().find(|&&(i, j)| i >= n || j >= n) {
        return Err(Error::Shape(format!(
            "truth edge ({i}, {j}) outside the {n}-column matrix"
        )));
    }
    let predicted: BTreeSet<(usize, usize)> = predicted.edges().into_iter().collect();
    let tp = predicted.intersection(&truth.edges).count();
    Ok(EvalResult::from_counts(
        tp,
        predicted.len() - tp,
        truth.edges.len() - tp,
    ))
}
