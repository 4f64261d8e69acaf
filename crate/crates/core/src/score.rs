//! Edge-recovery scores of an estimated graph against the truth.

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeScores {
    pub f1: f64,
    /// Recall: fraction of true edges recovered.
    pub tpr: f64,
    /// Fraction of estimated edges that are false.
    pub fdr: f64,
}

/// F1, true-positive rate and false-discovery rate with the conventions
/// that an empty estimate of an empty truth is perfect, an empty estimate of
/// a non-empty truth scores 0, and any estimate of an empty truth has FDR 1.
pub fn f1_score(estimate: &Graph, truth: &Graph) -> Result<EdgeScores> {
    if estimate.p() != truth.p() {
        return Err(Error::DimensionMismatch { expected: truth.p(), found: estimate.p() });
    }
    let tp = estimate.edges().filter(|&(i, j)| truth.contains(i, j)).count() as f64;
    let est = estimate.len() as f64;
    let tru = truth.len() as f64;
    Ok(match (est == 0.0, tru == 0.0) {
        (true, true) => EdgeScores { f1: 1.0, tpr: 1.0, fdr: 0.0 },
        (true, false) => EdgeScores { f1: 0.0, tpr: 0.0, fdr: 0.0 },
        (false, true) => EdgeScores { f1: 0.0, tpr: 0.0, fdr: 1.0 },
        (false, false) => {
            let precision = tp / est;
            let recall = tp / tru;
            let f1 = if tp == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            EdgeScores { f1, tpr: recall, fdr: 1.0 - precision }
        }
    })
}
