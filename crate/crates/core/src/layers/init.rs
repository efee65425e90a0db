use rand::Rng;

use crate::numeric::Matrix;

/// Uniform Glorot initialization: values in `[-s, s]` with
/// `s = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    fan_in: usize,
    fan_out: usize,
    rng: &mut R,
) -> Matrix {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let mut m = Matrix::zeros(rows, cols);
    for v in m.as_mut_slice() {
        *v = rng.random_range(-limit..=limit);
    }
    m
}
