use rand::Rng;

use super::init::glorot_uniform;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Fully connected layer `y = W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub w: Matrix,
    pub b: Matrix,
}

impl DenseParams {
    pub fn new(w: Matrix, b: Matrix) -> Result<Self> {
        if b.shape() != (w.rows(), 1) {
            return Err(Error::shape("dense", w.shape(), b.shape()));
        }
        Ok(DenseParams { w, b })
    }

    /// Glorot weights, zero bias.
    pub fn init<R: Rng + ?Sized>(outputs: usize, inputs: usize, rng: &mut R) -> Self {
        DenseParams {
            w: glorot_uniform(outputs, inputs, inputs, outputs, rng),
            b: Matrix::zeros(outputs, 1),
        }
    }

    pub fn zeros(outputs: usize, inputs: usize) -> Self {
        DenseParams {
            w: Matrix::zeros(outputs, inputs),
            b: Matrix::zeros(outputs, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        DenseParams::zeros(self.outputs(), self.inputs())
    }

    pub fn inputs(&self) -> usize {
        self.w.cols()
    }

    pub fn outputs(&self) -> usize {
        self.w.rows()
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        dense_forward(self, x)
    }

    /// Returns `Wᵀ dy`; accumulates `dy xᵀ` and `dy` into `grads`.
    pub fn backward(&self, x: &Matrix, d_y: &Matrix, grads: &mut DenseParams) -> Result<Matrix> {
        if d_y.shape() != (self.outputs(), 1) {
            return Err(Error::shape("dense backward", d_y.shape(), (self.outputs(), 1)));
        }
        grads.w.add_outer(d_y, x, 1.0)?;
        grads.b.add_assign(d_y)?;
        self.w.t_matmul(d_y)
    }
}

pub fn dense_forward(params: &DenseParams, x: &Matrix) -> Result<Matrix> {
    if x.shape() != (params.inputs(), 1) {
        return Err(Error::shape("dense", params.w.shape(), x.shape()));
    }
    let mut y = params.w.matmul(x)?;
    y.add_assign(&params.b)?;
    Ok(y)
}
