//! RBF kernel and numerically guarded Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, Dyn};

use super::ModelError;

/// RBF kernel hyperparameters. `noise_variance` only enters the regressor's
/// likelihood; the classifier ignores it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyperparams {
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl GpHyperparams {
    pub fn new(
        lengthscale: f64,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self, ModelError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(lengthscale) && ok(signal_variance) && ok(noise_variance) {
            Ok(Self {
                lengthscale,
                signal_variance,
                noise_variance,
            })
        } else {
            Err(ModelError::InvalidHyperparams)
        }
    }
}

/// Pairwise squared Euclidean distances between the rows of `a` and `b`.
pub(crate) fn squared_distances(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(
        a.ncols(),
        b.ncols(),
        "kernel inputs must share the feature dimension"
    );
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        (0..a.ncols())
            .map(|c| (a[(i, c)] - b[(j, c)]).powi(2))
            .sum()
    })
}

/// RBF (squared exponential) kernel matrix between the rows of `a` and `b`:
/// `K[i,j] = signal_variance * exp(-||a_i - b_j||^2 / (2 * lengthscale^2))`.
pub fn rbf_kernel(a: &DMatrix<f64>, b: &DMatrix<f64>, hp: &GpHyperparams) -> DMatrix<f64> {
    let mut k = squared_distances(a, b);
    let inv_two_ls2 = 1.0 / (2.0 * hp.lengthscale * hp.lengthscale);
    for v in k.iter_mut() {
        *v = hp.signal_variance * (-*v * inv_two_ls2).exp();
    }
    k
}

/// Cholesky factorization with escalating diagonal jitter.
///
/// Tries the matrix as-is, then adds `f * mean(trace)` for
/// `f = 1e-10, 1e-9, ..., 1e-4` until a factorization succeeds.
pub(crate) fn cholesky_with_jitter(a: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, ModelError> {
    if let Some(chol) = Cholesky::new(a.clone()) {
        return Ok(chol);
    }
    let trace_mean = a.trace() / a.nrows() as f64;
    let mut factor = 1e-10;
    while factor <= 1e-4 {
        let mut jittered = a.clone();
        for i in 0..a.nrows() {
            jittered[(i, i)] += factor * trace_mean;
        }
        if let Some(chol) = Cholesky::new(jittered) {
            return Ok(chol);
        }
        factor *= 10.0;
    }
    Err(ModelError::CholeskyFailure)
}
