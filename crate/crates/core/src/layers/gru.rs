//! Gated recurrent unit without bias terms.
//!
//! With the concatenation `c = [h_prev; x_t]` (hidden state first):
//!
//! ```text
//! z_t  = sigmoid(W_z c)
//! r_t  = sigmoid(W_r c)
//! h~_t = tanh(W [r_t * h_prev; x_t])
//! h_t  = (1 - z_t) * h_prev + z_t * h~_t
//! ```

use rand::Rng;

use super::init::glorot_uniform;
use crate::error::{Error, Result};
use crate::numeric::{sigmoid, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    pub w_z: Matrix,
    pub w_r: Matrix,
    pub w: Matrix,
}

#[derive(Debug, Clone)]
pub struct GruStepCache {
    pub x_t: Matrix,
    pub h_prev: Matrix,
    pub z_t: Matrix,
    pub r_t: Matrix,
    pub h_tilde: Matrix,
    pub h_t: Matrix,
}

impl GruParams {
    pub fn new(w_z: Matrix, w_r: Matrix, w: Matrix) -> Result<Self> {
        let (h, total) = w_z.shape();
        if total <= h {
            return Err(Error::invalid(format!(
                "gate matrix {h}x{total} leaves no room for an input"
            )));
        }
        for m in [&w_r, &w] {
            if m.shape() != w_z.shape() {
                return Err(Error::shape("gru gates", w_z.shape(), m.shape()));
            }
        }
        Ok(GruParams { w_z, w_r, w })
    }

    pub fn init<R: Rng + ?Sized>(hidden: usize, input: usize, rng: &mut R) -> Self {
        let cols = hidden + input;
        let mut gate = || glorot_uniform(hidden, cols, cols, hidden, rng);
        GruParams {
            w_z: gate(),
            w_r: gate(),
            w: gate(),
        }
    }

    pub fn zeros(hidden: usize, input: usize) -> Self {
        GruParams {
            w_z: Matrix::zeros(hidden, hidden + input),
            w_r: Matrix::zeros(hidden, hidden + input),
            w: Matrix::zeros(hidden, hidden + input),
        }
    }

    pub fn zeros_like(&self) -> Self {
        GruParams::zeros(self.hidden_size(), self.input_size())
    }

    pub fn hidden_size(&self) -> usize {
        self.w_z.rows()
    }

    pub fn input_size(&self) -> usize {
        self.w_z.cols() - self.w_z.rows()
    }

    /// Always `3 * h * (h + d)`.
    pub fn param_count(&self) -> usize {
        self.w_z.len() + self.w_r.len() + self.w.len()
    }

    pub fn step(&self, h_prev: &Matrix, x_t: &Matrix) -> Result<(Matrix, GruStepCache)> {
        gru_step(self, h_prev, x_t)
    }

    /// Backward through one step. Accumulates weight gradients into `grads`
    /// and returns `(dL/dh_prev, dL/dx_t)`.
    pub fn step_backward(
        &self,
        cache: &GruStepCache,
        d_h: &Matrix,
        grads: &mut GruParams,
    ) -> Result<(Matrix, Matrix)> {
        let h = self.hidden_size();
        if d_h.shape() != (h, 1) {
            return Err(Error::shape("gru backward", d_h.shape(), (h, 1)));
        }
        if grads.w_z.shape() != self.w_z.shape() {
            return Err(Error::shape("gru gradient buffer", grads.w_z.shape(), self.w_z.shape()));
        }
        let hp = cache.h_prev.as_slice();
        let z = cache.z_t.as_slice();
        let r = cache.r_t.as_slice();
        let ht = cache.h_tilde.as_slice();
        let dh = d_h.as_slice();

        let mut d_h_prev = Matrix::zeros(h, 1);
        let mut d_a_z = Matrix::zeros(h, 1);
        let mut d_a_h = Matrix::zeros(h, 1);
        for i in 0..h {
            d_h_prev.as_mut_slice()[i] = dh[i] * (1.0 - z[i]);
            d_a_z.as_mut_slice()[i] = dh[i] * (ht[i] - hp[i]) * z[i] * (1.0 - z[i]);
            d_a_h.as_mut_slice()[i] = dh[i] * z[i] * (1.0 - ht[i] * ht[i]);
        }

        // candidate path
        let rh = cache.r_t.hadamard(&cache.h_prev)?;
        let cat_reset = Matrix::vstack(&rh, &cache.x_t)?;
        grads.w.add_outer(&d_a_h, &cat_reset, 1.0)?;
        let d_cat_reset = self.w.t_matmul(&d_a_h)?;
        let (d_rh, mut d_x) = d_cat_reset.split_column(h)?;
        let mut d_a_r = Matrix::zeros(h, 1);
        for i in 0..h {
            let drh = d_rh.as_slice()[i];
            d_h_prev.as_mut_slice()[i] += drh * r[i];
            d_a_r.as_mut_slice()[i] = drh * hp[i] * r[i] * (1.0 - r[i]);
        }

        // gates
        let cat = Matrix::vstack(&cache.h_prev, &cache.x_t)?;
        grads.w_z.add_outer(&d_a_z, &cat, 1.0)?;
        grads.w_r.add_outer(&d_a_r, &cat, 1.0)?;
        let mut d_cat = self.w_z.t_matmul(&d_a_z)?;
        d_cat.add_assign(&self.w_r.t_matmul(&d_a_r)?)?;
        let (d_hp_gates, d_x_gates) = d_cat.split_column(h)?;
        d_h_prev.add_assign(&d_hp_gates)?;
        d_x.add_assign(&d_x_gates)?;
        Ok((d_h_prev, d_x))
    }

    pub fn forward(&self, inputs: &[Matrix], h0: Option<&Matrix>) -> Result<GruTrace> {
        gru_forward(self, inputs, h0)
    }

    /// Backpropagation through time. `d_hiddens[t]` is the loss gradient
    /// arriving at `h_t` from outside the recurrence (zeros where unused).
    /// Returns the input gradients and the gradient with respect to `h0`.
    pub fn backward(
        &self,
        caches: &[GruStepCache],
        d_hiddens: &[Matrix],
        grads: &mut GruParams,
    ) -> Result<(Vec<Matrix>, Matrix)> {
        if caches.len() != d_hiddens.len() || caches.is_empty() {
            return Err(Error::invalid(format!(
                "{} step caches but {} upstream gradients",
                caches.len(),
                d_hiddens.len()
            )));
        }
        let mut d_inputs = vec![Matrix::zeros(1, 1); caches.len()];
        let mut carry = Matrix::zeros(self.hidden_size(), 1);
        for t in (0..caches.len()).rev() {
            let mut d_h = d_hiddens[t].clone();
            d_h.add_assign(&carry)?;
            let (d_prev, d_x) = self.step_backward(&caches[t], &d_h, grads)?;
            d_inputs[t] = d_x;
            carry = d_prev;
        }
        Ok((d_inputs, carry))
    }
}

pub fn gru_step(params: &GruParams, h_prev: &Matrix, x_t: &Matrix) -> Result<(Matrix, GruStepCache)> {
    let h = params.hidden_size();
    let d = params.input_size();
    if h_prev.shape() != (h, 1) {
        return Err(Error::shape("gru step h_prev", h_prev.shape(), (h, 1)));
    }
    if x_t.shape() != (d, 1) {
        return Err(Error::shape("gru step x_t", x_t.shape(), (d, 1)));
    }
    let cat = Matrix::vstack(h_prev, x_t)?;
    let z_t = params.w_z.matmul(&cat)?.map(sigmoid);
    let r_t = params.w_r.matmul(&cat)?.map(sigmoid);
    let rh = r_t.hadamard(h_prev)?;
    let h_tilde = params.w.matmul(&Matrix::vstack(&rh, x_t)?)?.map(f64::tanh);
    let mut h_t = Matrix::zeros(h, 1);
    for i in 0..h {
        let zi = z_t.get(i, 0);
        h_t.set(i, 0, (1.0 - zi) * h_prev.get(i, 0) + zi * h_tilde.get(i, 0));
    }
    let cache = GruStepCache {
        x_t: x_t.clone(),
        h_prev: h_prev.clone(),
        z_t,
        r_t,
        h_tilde,
        h_t: h_t.clone(),
    };
    Ok((h_t, cache))
}

/// Hidden states and per-step caches of an unrolled GRU.
#[derive(Debug, Clone)]
pub struct GruTrace {
    pub hiddens: Vec<Matrix>,
    pub caches: Vec<GruStepCache>,
}

pub fn gru_forward(params: &GruParams, inputs: &[Matrix], h0: Option<&Matrix>) -> Result<GruTrace> {
    if inputs.is_empty() {
        return Err(Error::invalid("gru needs a non-empty input sequence"));
    }
    let mut h = match h0 {
        Some(h0) => h0.clone(),
        None => Matrix::zeros(params.hidden_size(), 1),
    };
    let mut hiddens = Vec::with_capacity(inputs.len());
    let mut caches = Vec::with_capacity(inputs.len());
    for x in inputs {
        let (next, cache) = gru_step(params, &h, x)?;
        hiddens.push(next.clone());
        caches.push(cache);
        h = next;
    }
    Ok(GruTrace { hiddens, caches })
}
