//! Central finite differences, the reference every analytic gradient in the
//! crate is checked against.

use super::Matrix;

pub const DEFAULT_STEP: f64 = 1e-5;

/// Gradient of a scalar function by central differences,
/// `(f(x + h e_ij) - f(x - h e_ij)) / 2h`, one coordinate at a time.
pub fn finite_diff_grad<F>(mut f: F, x: &Matrix, h: f64) -> Matrix
where
    F: FnMut(&Matrix) -> f64,
{
    assert!(h > 0.0, "finite difference step must be positive");
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = x.as_slice()[i];
        probe.as_mut_slice()[i] = orig + h;
        let plus = f(&probe);
        probe.as_mut_slice()[i] = orig - h;
        let minus = f(&probe);
        probe.as_mut_slice()[i] = orig;
        grad.as_mut_slice()[i] = (plus - minus) / (2.0 * h);
    }
    grad
}

/// `|a - b| / max(1e-8, |a| + |b|)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-8)
}

/// Largest [`relative_error`] over corresponding entries.
pub fn max_relative_error(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "gradient shapes differ");
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| relative_error(x, y))
        .fold(0.0, f64::max)
}
