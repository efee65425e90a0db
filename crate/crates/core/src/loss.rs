//! Regression and classification losses and their joint weighting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{softmax, Matrix};

/// Probabilities are clamped below at this value before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Weight of the MSE term in `lambda * mse + (1 - lambda) * ce`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLossConfig {
    pub lambda: f64,
}

impl JointLossConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("lambda {lambda} is outside [0, 1]")));
        }
        Ok(JointLossConfig { lambda })
    }
}

impl Default for JointLossConfig {
    fn default() -> Self {
        JointLossConfig { lambda: 0.5 }
    }
}

pub fn mse(pred: &Matrix, target: &Matrix) -> Result<f64> {
    let diff = pred.sub(target)?;
    Ok(diff.as_slice().iter().map(|d| d * d).sum::<f64>() / diff.len() as f64)
}

/// `d mse / d pred = 2 (pred - target) / n`.
pub fn mse_grad(pred: &Matrix, target: &Matrix) -> Result<Matrix> {
    let n = pred.len() as f64;
    pred.zip_with(target, "mse grad", |p, t| 2.0 * (p - t) / n)
}

fn check_label(logits: &Matrix, label: usize) -> Result<()> {
    if logits.cols() != 1 {
        return Err(Error::shape("cross entropy", logits.shape(), (logits.rows(), 1)));
    }
    if label >= logits.rows() {
        return Err(Error::invalid(format!(
            "label {label} is out of range for {} classes",
            logits.rows()
        )));
    }
    Ok(())
}

/// `-ln(max(softmax(logits)[label], 1e-12))`.
pub fn cross_entropy(logits: &Matrix, label: usize) -> Result<f64> {
    check_label(logits, label)?;
    let p = softmax(logits).get(label, 0);
    Ok(-p.max(PROB_FLOOR).ln())
}

/// `softmax(logits) - onehot(label)`. Exact wherever the clamp is inactive.
pub fn cross_entropy_grad(logits: &Matrix, label: usize) -> Result<Matrix> {
    check_label(logits, label)?;
    let mut g = softmax(logits);
    let v = g.get(label, 0);
    g.set(label, 0, v - 1.0);
    Ok(g)
}

pub fn joint_loss(mse_val: f64, ce_val: f64, cfg: JointLossConfig) -> f64 {
    cfg.lambda * mse_val + (1.0 - cfg.lambda) * ce_val
}
