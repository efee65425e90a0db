//! Forward and backward passes for every layer of the network.
//!
//! Each layer exposes a forward function that returns whatever cache its
//! backward pass needs, and a backward method that returns the input gradient
//! while accumulating parameter gradients into a buffer shaped like the
//! parameters themselves (`zeros_like`).

mod attention;
mod conv;
mod dense;
mod embedding;
mod gru;
mod init;

pub use attention::{attention_pool, AttentionCache, AttentionParams};
pub use conv::{
    conv1d_forward, conv_output_len, global_max_pool, global_max_pool_backward, Conv1dCache,
    Conv1dParams,
};
pub use dense::{dense_forward, DenseParams};
pub use embedding::{embed_lookup, EmbeddingTable};
pub use gru::{gru_forward, gru_step, GruParams, GruStepCache, GruTrace};
pub use init::glorot_uniform;

use crate::numeric::Matrix;

/// ReLU backward: passes `upstream` where the activation output was positive.
pub fn relu_backward(output: &Matrix, upstream: &Matrix) -> crate::Result<Matrix> {
    output.zip_with(upstream, "relu backward", |y, g| if y > 0.0 { g } else { 0.0 })
}
