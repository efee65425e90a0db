//! Gradient-descent parameter updates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub alpha: f64,
    /// L2 coefficient, added to the gradient as `weight_decay * param`.
    pub weight_decay: f64,
}

impl SgdConfig {
    pub fn new(alpha: f64, weight_decay: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("learning rate {alpha} must be positive")));
        }
        if !(weight_decay >= 0.0 && weight_decay.is_finite()) {
            return Err(Error::invalid(format!("weight decay {weight_decay} must be >= 0")));
        }
        Ok(SgdConfig {
            alpha,
            weight_decay,
        })
    }
}

/// `param - alpha * (grad + weight_decay * param)`.
pub fn sgd_step(param: &Matrix, grad: &Matrix, cfg: &SgdConfig) -> Result<Matrix> {
    let mut next = param.clone();
    sgd_update(&mut next, grad, cfg)?;
    Ok(next)
}

pub fn sgd_update(param: &mut Matrix, grad: &Matrix, cfg: &SgdConfig) -> Result<()> {
    if param.shape() != grad.shape() {
        return Err(Error::shape("sgd step", param.shape(), grad.shape()));
    }
    for (w, g) in param.as_mut_slice().iter_mut().zip(grad.as_slice()) {
        *w -= cfg.alpha * (g + cfg.weight_decay * *w);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate {lr} must be positive")));
        }
        Ok(AdamConfig {
            lr,
            ..AdamConfig::default()
        })
    }
}

/// First and second moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Matrix,
    pub v: Matrix,
    pub t: u64,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize) -> Self {
        AdamState {
            m: Matrix::zeros(rows, cols),
            v: Matrix::zeros(rows, cols),
            t: 0,
        }
    }

    pub fn for_param(param: &Matrix) -> Self {
        AdamState::new(param.rows(), param.cols())
    }
}

/// One bias-corrected Adam step, returning the new parameter and state.
pub fn adam_step(
    param: &Matrix,
    grad: &Matrix,
    state: &AdamState,
    cfg: &AdamConfig,
) -> Result<(Matrix, AdamState)> {
    let mut next = param.clone();
    let mut st = state.clone();
    adam_update(&mut next, grad, &mut st, cfg)?;
    Ok((next, st))
}

pub fn adam_update(
    param: &mut Matrix,
    grad: &Matrix,
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<()> {
    if param.shape() != grad.shape() {
        return Err(Error::shape("adam step", param.shape(), grad.shape()));
    }
    if state.m.shape() != param.shape() || state.v.shape() != param.shape() {
        return Err(Error::shape("adam state", state.m.shape(), param.shape()));
    }
    state.t += 1;
    let bc1 = 1.0 - cfg.beta1.powi(state.t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(state.t as i32);
    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for (i, (w, &g0)) in param
        .as_mut_slice()
        .iter_mut()
        .zip(grad.as_slice())
        .enumerate()
    {
        let g = g0 + cfg.weight_decay * *w;
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        *w -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}
