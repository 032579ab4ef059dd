//! Small least-squares helpers.

use nalgebra::{DMatrix, DVector};

/// Linear least squares: coefficients and residual sum of squares.
pub fn least_squares(design: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let n = y.len();
    let p = design.first().map(|r| r.len()).unwrap_or(0);
    let a = DMatrix::from_fn(n, p, |i, j| design[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).expect("SVD computed with U and V");
    let r = &a * &x - &b;
    (x.iter().copied().collect(), r.norm_squared())
}

/// Akaike information criterion for a Gaussian residual model.
pub fn aic(rss: f64, n: usize, params: usize) -> f64 {
    let n = n as f64;
    n * (rss.max(1e-300) / n).ln() + 2.0 * params as f64
}

/// ln k!.
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}
