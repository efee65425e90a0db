use serde::{Deserialize, Serialize};

use super::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output `y = f(x)`.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Logistic function evaluated without overflowing `exp` for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn activate(kind: Activation, x: &Matrix) -> Matrix {
    x.map(|v| kind.apply(v))
}

/// Softmax over every entry of `logits` (normally an `n x 1` column).
///
/// The maximum is subtracted before exponentiating.
pub fn softmax(logits: &Matrix) -> Matrix {
    let max = logits
        .as_slice()
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exps = logits.map(|v| (v - max).exp());
    let total = exps.sum();
    exps.map(|v| v / total)
}
