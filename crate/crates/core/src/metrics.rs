//! Classification metrics over +/-1 labels.

use crate::data::Label;
use crate::{Error, Result};

fn check(preds: &[Label], labels: &[Label]) -> Result<()> {
    if preds.len() != labels.len() {
        return Err(Error::invalid("predictions and labels differ in length"));
    }
    if preds.is_empty() {
        return Err(Error::invalid("metrics need at least one sample"));
    }
    Ok(())
}

pub fn accuracy(preds: &[Label], labels: &[Label]) -> Result<f64> {
    check(preds, labels)?;
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// F1 of the `positive` class; 0 when precision + recall is 0.
pub fn f1_score(preds: &[Label], labels: &[Label], positive: Label) -> Result<f64> {
    check(preds, labels)?;
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&p, &l) in preds.iter().zip(labels) {
        match (p == positive, l == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fneg) as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}
