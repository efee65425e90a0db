use rand::Rng;

use super::init::glorot_uniform;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// 1-D convolution over the time axis of a `len x in_channels` input.
///
/// No bias and no activation: the model applies ReLU between this layer and
/// global max pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dParams {
    /// One `kernel_width x in_channels` matrix per filter.
    pub kernels: Vec<Matrix>,
    pub stride: usize,
}

#[derive(Debug, Clone)]
pub struct Conv1dCache {
    pub input: Matrix,
}

impl Conv1dParams {
    pub fn new(kernels: Vec<Matrix>, stride: usize) -> Result<Self> {
        let first = kernels
            .first()
            .ok_or_else(|| Error::invalid("convolution needs at least one filter"))?;
        if stride == 0 {
            return Err(Error::invalid("convolution stride must be at least 1"));
        }
        if let Some(k) = kernels.iter().find(|k| k.shape() != first.shape()) {
            return Err(Error::shape("conv1d kernels", first.shape(), k.shape()));
        }
        Ok(Conv1dParams { kernels, stride })
    }

    pub fn init<R: Rng + ?Sized>(
        num_filters: usize,
        kernel_width: usize,
        in_channels: usize,
        stride: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let fan_in = kernel_width * in_channels;
        let kernels = (0..num_filters)
            .map(|_| glorot_uniform(kernel_width, in_channels, fan_in, num_filters, rng))
            .collect();
        Conv1dParams::new(kernels, stride)
    }

    pub fn zeros_like(&self) -> Self {
        Conv1dParams {
            kernels: self
                .kernels
                .iter()
                .map(|k| Matrix::zeros(k.rows(), k.cols()))
                .collect(),
            stride: self.stride,
        }
    }

    pub fn num_filters(&self) -> usize {
        self.kernels.len()
    }

    pub fn kernel_width(&self) -> usize {
        self.kernels[0].rows()
    }

    pub fn in_channels(&self) -> usize {
        self.kernels[0].cols()
    }

    /// `floor((len - kernel_width) / stride) + 1`, or `None` when the input is
    /// shorter than the kernel.
    pub fn output_len(&self, len: usize) -> Option<usize> {
        conv_output_len(len, self.kernel_width(), self.stride)
    }

    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, Conv1dCache)> {
        conv1d_forward(self, input)
    }

    /// Returns the input gradient and accumulates kernel gradients into `grads`.
    pub fn backward(
        &self,
        cache: &Conv1dCache,
        upstream: &Matrix,
        grads: &mut Conv1dParams,
    ) -> Result<Matrix> {
        let input = &cache.input;
        let width = self.kernel_width();
        let channels = self.in_channels();
        let out_len = self
            .output_len(input.rows())
            .ok_or_else(|| Error::invalid("conv cache shorter than kernel"))?;
        if upstream.shape() != (out_len, self.num_filters()) {
            return Err(Error::shape(
                "conv1d backward",
                upstream.shape(),
                (out_len, self.num_filters()),
            ));
        }
        if grads.kernels.len() != self.kernels.len() {
            return Err(Error::invalid("conv gradient buffer has wrong filter count"));
        }
        let mut d_input = Matrix::zeros(input.rows(), channels);
        for t in 0..out_len {
            let start = t * self.stride;
            for (f, kernel) in self.kernels.iter().enumerate() {
                let g = upstream.get(t, f);
                if g == 0.0 {
                    continue;
                }
                let dk = grads.kernels[f].as_mut_slice();
                for i in 0..width {
                    let in_row = input.row(start + i);
                    let k_row = kernel.row(i);
                    let dk_row = &mut dk[i * channels..(i + 1) * channels];
                    let di_row = d_input.row_mut(start + i);
                    for c in 0..channels {
                        dk_row[c] += g * in_row[c];
                        di_row[c] += g * k_row[c];
                    }
                }
            }
        }
        Ok(d_input)
    }
}

pub fn conv_output_len(len: usize, kernel_width: usize, stride: usize) -> Option<usize> {
    if len < kernel_width || stride == 0 {
        return None;
    }
    Some((len - kernel_width) / stride + 1)
}

pub fn conv1d_forward(params: &Conv1dParams, input: &Matrix) -> Result<(Matrix, Conv1dCache)> {
    let width = params.kernel_width();
    let channels = params.in_channels();
    if input.cols() != channels {
        return Err(Error::shape(
            "conv1d",
            input.shape(),
            (width, channels),
        ));
    }
    let out_len = params.output_len(input.rows()).ok_or_else(|| {
        Error::invalid(format!(
            "input length {} is shorter than kernel width {width}",
            input.rows()
        ))
    })?;
    let mut out = Matrix::zeros(out_len, params.num_filters());
    for t in 0..out_len {
        let start = t * params.stride;
        for (f, kernel) in params.kernels.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..width {
                for (x, k) in input.row(start + i).iter().zip(kernel.row(i)) {
                    acc += x * k;
                }
            }
            out.set(t, f, acc);
        }
    }
    Ok((
        out,
        Conv1dCache {
            input: input.clone(),
        },
    ))
}

/// Per-filter maximum over time. The memo holds the winning row for each
/// filter; ties go to the smallest index.
pub fn global_max_pool(featmap: &Matrix) -> Result<(Matrix, Vec<usize>)> {
    if featmap.is_empty() {
        return Err(Error::invalid("cannot pool an empty feature map"));
    }
    let filters = featmap.cols();
    let mut pooled = Matrix::zeros(filters, 1);
    let mut memo = vec![0usize; filters];
    for f in 0..filters {
        let mut best = featmap.get(0, f);
        for t in 1..featmap.rows() {
            let v = featmap.get(t, f);
            if v > best {
                best = v;
                memo[f] = t;
            }
        }
        pooled.set(f, 0, best);
    }
    Ok((pooled, memo))
}

/// Routes each pooled gradient back to the row that won the max.
pub fn global_max_pool_backward(
    memo: &[usize],
    out_len: usize,
    upstream: &Matrix,
) -> Result<Matrix> {
    if upstream.shape() != (memo.len(), 1) {
        return Err(Error::shape(
            "max pool backward",
            upstream.shape(),
            (memo.len(), 1),
        ));
    }
    let mut grad = Matrix::zeros(out_len, memo.len());
    for (f, &t) in memo.iter().enumerate() {
        if t >= out_len {
            return Err(Error::invalid(format!(
                "pool memo index {t} exceeds feature map length {out_len}"
            )));
        }
        grad.set(t, f, upstream.get(f, 0));
    }
    Ok(grad)
}
