//! Dense matrix arithmetic, activations, and the finite-difference oracle.

mod activation;
mod gradcheck;
mod matrix;

pub use activation::{activate, sigmoid, softmax, Activation};
pub use gradcheck::{finite_diff_grad, max_relative_error, relative_error, DEFAULT_STEP};
pub use matrix::{matmul, Matrix};
