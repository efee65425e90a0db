//! Additive attention pooling over a hidden-state sequence:
//! `score_i = uᵀ tanh(W_a h_i)`, `alpha = softmax(score)`, `context = Σ alpha_i h_i`.

use rand::Rng;

use super::init::glorot_uniform;
use crate::error::{Error, Result};
use crate::numeric::{softmax, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    /// `attention_dim x hidden`
    pub w_a: Matrix,
    /// `attention_dim x 1` context vector
    pub u: Matrix,
}

#[derive(Debug, Clone)]
pub struct AttentionCache {
    pub hiddens: Vec<Matrix>,
    /// `tanh(W_a h_i)` per position.
    pub projections: Vec<Matrix>,
    pub weights: Vec<f64>,
}

impl AttentionParams {
    pub fn new(w_a: Matrix, u: Matrix) -> Result<Self> {
        if u.shape() != (w_a.rows(), 1) {
            return Err(Error::shape("attention", w_a.shape(), u.shape()));
        }
        Ok(AttentionParams { w_a, u })
    }

    pub fn init<R: Rng + ?Sized>(attention_dim: usize, hidden: usize, rng: &mut R) -> Self {
        AttentionParams {
            w_a: glorot_uniform(attention_dim, hidden, hidden, attention_dim, rng),
            u: glorot_uniform(attention_dim, 1, attention_dim, 1, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        AttentionParams {
            w_a: Matrix::zeros(self.w_a.rows(), self.w_a.cols()),
            u: Matrix::zeros(self.u.rows(), 1),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_a.cols()
    }

    pub fn pool(&self, hiddens: &[Matrix]) -> Result<(Matrix, Vec<f64>, AttentionCache)> {
        attention_pool(self, hiddens)
    }

    /// Returns one gradient per hidden state and accumulates parameter
    /// gradients into `grads`.
    pub fn backward(
        &self,
        cache: &AttentionCache,
        d_context: &Matrix,
        grads: &mut AttentionParams,
    ) -> Result<Vec<Matrix>> {
        let h = self.hidden_size();
        if d_context.shape() != (h, 1) {
            return Err(Error::shape("attention backward", d_context.shape(), (h, 1)));
        }
        let n = cache.hiddens.len();
        if cache.weights.len() != n || cache.projections.len() != n {
            return Err(Error::invalid("attention cache is inconsistent"));
        }
        let d_alpha: Vec<f64> = cache
            .hiddens
            .iter()
            .map(|hi| dot(d_context.as_slice(), hi.as_slice()))
            .collect();
        let mean: f64 = cache
            .weights
            .iter()
            .zip(&d_alpha)
            .map(|(a, d)| a * d)
            .sum();
        let mut d_hiddens = Vec::with_capacity(n);
        for i in 0..n {
            let alpha = cache.weights[i];
            let d_score = alpha * (d_alpha[i] - mean);
            let proj = &cache.projections[i];
            grads.u.axpy(d_score, proj)?;
            let d_pre = self.u.zip_with(proj, "attention backward", |u, p| {
                d_score * u * (1.0 - p * p)
            })?;
            grads.w_a.add_outer(&d_pre, &cache.hiddens[i], 1.0)?;
            let mut d_h = self.w_a.t_matmul(&d_pre)?;
            d_h.axpy(alpha, d_context)?;
            d_hiddens.push(d_h);
        }
        Ok(d_hiddens)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn attention_pool(
    params: &AttentionParams,
    hiddens: &[Matrix],
) -> Result<(Matrix, Vec<f64>, AttentionCache)> {
    if hiddens.is_empty() {
        return Err(Error::invalid("attention needs a non-empty sequence"));
    }
    let h = params.hidden_size();
    let mut projections = Vec::with_capacity(hiddens.len());
    let mut scores = Vec::with_capacity(hiddens.len());
    for hi in hiddens {
        if hi.shape() != (h, 1) {
            return Err(Error::shape("attention", hi.shape(), (h, 1)));
        }
        let proj = params.w_a.matmul(hi)?.map(f64::tanh);
        scores.push(dot(params.u.as_slice(), proj.as_slice()));
        projections.push(proj);
    }
    let weights = softmax(&Matrix::column(&scores)?).into_vec();
    let mut context = Matrix::zeros(h, 1);
    for (alpha, hi) in weights.iter().zip(hiddens) {
        context.axpy(*alpha, hi)?;
    }
    let cache = AttentionCache {
        hiddens: hiddens.to_vec(),
        projections,
        weights: weights.clone(),
    };
    Ok((context, weights, cache))
}
