use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::peakpipe::PeakMask;

/// Tolerance-window peak matching counts.
///
/// Precision and recall sides are counted independently: `tp` predicted
/// peaks have a reference peak within the window, `tp_ref` reference peaks
/// have a predicted peak within the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakMetricReport {
    pub tp: usize,
    pub fp: usize,
    pub tp_ref: usize,
    pub fn_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PeakMetricReport {
    /// Both masks empty scores 1 across the board; any other 0/0 scores 0.
    fn from_counts(tp: usize, fp: usize, tp_ref: usize, fn_count: usize) -> Self {
        let (n_pred, n_ref) = (tp + fp, tp_ref + fn_count);
        if n_pred == 0 && n_ref == 0 {
            return Self { tp, fp, tp_ref, fn_count, precision: 1.0, recall: 1.0, f1: 1.0 };
        }
        let ratio = |a: usize, n: usize| if n == 0 { 0.0 } else { a as f64 / n as f64 };
        let precision = ratio(tp, n_pred);
        let recall = ratio(tp_ref, n_ref);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { tp, fp, tp_ref, fn_count, precision, recall, f1 }
    }
}

/// Box dilation by `tol` in both axes.
fn dilate(m: &PeakMask, tol: usize) -> Vec<bool> {
    let (rows, cols) = m.shape();
    let mut horiz = vec![false; rows * cols];
    for (t, f) in m.coords() {
        for k in f.saturating_sub(tol)..(f + tol + 1).min(cols) {
            horiz[t * cols + k] = true;
        }
    }
    let mut out = vec![false; rows * cols];
    for t in 0..rows {
        for f in 0..cols {
            if horiz[t * cols + f] {
                for n in t.saturating_sub(tol)..(t + tol + 1).min(rows) {
                    out[n * cols + f] = true;
                }
            }
        }
    }
    out
}

/// Precision/recall/F1 with a `(2 tol + 1)^2` matching window.
pub fn peak_prf(pred: &PeakMask, reference: &PeakMask, tol: usize) -> Result<PeakMetricReport> {
    if pred.shape() != reference.shape() {
        return Err(Error::invalid(format!(
            "mask shapes differ: {:?} vs {:?}",
            pred.shape(),
            reference.shape()
        )));
    }
    let cols = pred.shape().1;
    let near_ref = dilate(reference, tol);
    let near_pred = dilate(pred, tol);
    let tp = pred.coords().filter(|&(t, f)| near_ref[t * cols + f]).count();
    let tp_ref = reference.coords().filter(|&(t, f)| near_pred[t * cols + f]).count();
    Ok(PeakMetricReport::from_counts(
        tp,
        pred.count() - tp,
        tp_ref,
        reference.count() - tp_ref,
    ))
}
