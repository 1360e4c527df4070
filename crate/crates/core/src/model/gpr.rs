//! Exact Gaussian process regression with an RBF kernel.
//!
//! The posterior is computed through the Cholesky factor of
//! `K + noise_variance * I` with a zero prior mean. Reported predictive
//! variance is the latent-function variance: observation noise is excluded,
//! so the model is exact at its own training inputs when the noise is tiny.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dataset::Label;

use super::kernel::{cholesky_with_jitter, rbf_kernel, squared_distances};
use super::optim::{maximize, AscentConfig};
use super::{
    check_finite, GpHyperparams, ModelError, ModelManager, Posterior, RegressionPosterior,
};

const LN_2PI: f64 = 1.8378770664093453;

/// GP regressor; hyperparameters can optionally be tuned on each fit by
/// maximizing the log marginal likelihood.
#[derive(Debug, Clone)]
pub struct GpRegressor {
    hp_init: GpHyperparams,
    optimize: bool,
    ascent: AscentConfig,
    state: Option<GprState>,
    fits: usize,
}

#[derive(Debug, Clone)]
struct GprState {
    x: DMatrix<f64>,
    hp: GpHyperparams,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    log_marginal: f64,
}

impl GpRegressor {
    pub fn new(hp: GpHyperparams, optimize: bool) -> Self {
        Self {
            hp_init: hp,
            optimize,
            ascent: AscentConfig::default(),
            state: None,
            fits: 0,
        }
    }

    /// Seeds the log-uniform restart draws of the hyperparameter ascent.
    pub fn with_restart_seed(mut self, seed: u64) -> Self {
        self.ascent.seed = seed;
        self
    }

    /// Caps the hyperparameter ascent: total starting points and iterations
    /// per start. Trades optimization quality for fit time.
    pub fn with_ascent_budget(mut self, restarts: usize, max_iters: usize) -> Self {
        self.ascent.restarts = restarts.max(1);
        self.ascent.max_iters = max_iters;
        self
    }

    /// Hyperparameters of the current fit.
    pub fn hyperparams(&self) -> Option<GpHyperparams> {
        self.state.as_ref().map(|s| s.hp)
    }

    /// Log marginal likelihood of the current fit.
    pub fn log_marginal(&self) -> Option<f64> {
        self.state.as_ref().map(|s| s.log_marginal)
    }

    fn fit_real(&mut self, x: &DMatrix<f64>, y: &[f64]) -> Result<(), ModelError> {
        check_finite(x)?;
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFiniteInput);
        }

        let hp = if self.optimize {
            let x_ref = x;
            let y_ref = y;
            let objective = |logp: &[f64]| {
                let hp = GpHyperparams::new(logp[0].exp(), logp[1].exp(), logp[2].exp()).ok()?;
                gpr_log_marginal_and_grad(x_ref, y_ref, &hp).ok()
            };
            let start = [
                self.hp_init.lengthscale.ln(),
                self.hp_init.signal_variance.ln(),
                self.hp_init.noise_variance.ln(),
            ];
            let best = maximize(objective, &start, &self.ascent);
            GpHyperparams::new(best[0].exp(), best[1].exp(), best[2].exp()).unwrap_or(self.hp_init)
        } else {
            self.hp_init
        };

        let (chol, alpha, log_marginal) = factorize(x, y, &hp)?;
        self.state = Some(GprState {
            x: x.clone(),
            hp,
            chol,
            alpha,
            log_marginal,
        });
        self.fits += 1;
        Ok(())
    }
}

type Factorization = (Cholesky<f64, Dyn>, DVector<f64>, f64);

/// Builds the Cholesky factor of `K + noise * I`, the weight vector
/// `alpha = (K + noise I)^-1 y`, and the log marginal likelihood.
fn factorize(x: &DMatrix<f64>, y: &[f64], hp: &GpHyperparams) -> Result<Factorization, ModelError> {
    let n = y.len();
    let mut a = rbf_kernel(x, x, hp);
    for i in 0..n {
        a[(i, i)] += hp.noise_variance;
    }
    let chol = cholesky_with_jitter(&a)?;
    let y_vec = DVector::from_column_slice(y);
    let alpha = chol.solve(&y_vec);
    let log_det_half: f64 = (0..n).map(|i| chol.l_dirty()[(i, i)].ln()).sum();
    let log_marginal = -0.5 * y_vec.dot(&alpha) - log_det_half - 0.5 * n as f64 * LN_2PI;
    Ok((chol, alpha, log_marginal))
}

/// Log marginal likelihood and its gradient with respect to the log
/// hyperparameters `(ln lengthscale, ln signal_variance, ln noise_variance)`.
///
/// The gradient entries are `0.5 * tr((alpha alpha^T - A^-1) dA/dtheta)` for
/// `A = K + noise * I`, evaluated analytically.
pub fn gpr_log_marginal_and_grad(
    x: &DMatrix<f64>,
    y: &[f64],
    hp: &GpHyperparams,
) -> Result<(f64, Vec<f64>), ModelError> {
    let n = y.len();
    if n == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    let (chol, alpha, lml) = factorize(x, y, hp)?;
    let a_inv = chol.inverse();
    let sq = squared_distances(x, x);
    let k = {
        let mut k = sq.clone();
        let inv_two_ls2 = 1.0 / (2.0 * hp.lengthscale * hp.lengthscale);
        for v in k.iter_mut() {
            *v = hp.signal_variance * (-*v * inv_two_ls2).exp();
        }
        k
    };

    // W = alpha alpha^T - A^-1; grad_j = 0.5 * sum(W .* dA_j).
    let w = &alpha * alpha.transpose() - a_inv;
    let ls2 = hp.lengthscale * hp.lengthscale;

    let mut grad_ls = 0.0;
    let mut grad_sig = 0.0;
    let mut grad_noise = 0.0;
    for i in 0..n {
        for j in 0..n {
            let wij = w[(i, j)];
            grad_ls += wij * k[(i, j)] * sq[(i, j)] / ls2;
            grad_sig += wij * k[(i, j)];
        }
        grad_noise += w[(i, i)] * hp.noise_variance;
    }
    Ok((lml, vec![0.5 * grad_ls, 0.5 * grad_sig, 0.5 * grad_noise]))
}

impl ModelManager for GpRegressor {
    fn fit(&mut self, x: &DMatrix<f64>, y: &[Label]) -> Result<(), ModelError> {
        let y: Vec<f64> = y
            .iter()
            .map(|l| match l {
                Label::Real(v) => Ok(*v),
                Label::Class(_) => Err(ModelError::LabelKindMismatch),
            })
            .collect::<Result<_, _>>()?;
        self.fit_real(x, &y)
    }

    fn predict(&self, x: &DMatrix<f64>) -> Result<Posterior, ModelError> {
        let state = self.state.as_ref().ok_or(ModelError::NotFitted)?;
        check_finite(x)?;
        if x.ncols() != state.x.ncols() {
            return Err(ModelError::DimensionMismatch {
                fitted: state.x.ncols(),
                got: x.ncols(),
            });
        }
        let k_star = rbf_kernel(&state.x, x, &state.hp);
        let mean: Vec<f64> = (k_star.transpose() * &state.alpha)
            .iter()
            .copied()
            .collect();
        // v = L^-1 k*; latent variance = k(x,x) - ||v||^2.
        let v = state
            .chol
            .l_dirty()
            .solve_lower_triangular(&k_star)
            .ok_or(ModelError::CholeskyFailure)?;
        let variance: Vec<f64> = (0..x.nrows())
            .map(|j| {
                let reduction: f64 = (0..state.x.nrows()).map(|i| v[(i, j)].powi(2)).sum();
                (state.hp.signal_variance - reduction).max(0.0)
            })
            .collect();
        Ok(Posterior::Regression(RegressionPosterior {
            mean,
            variance,
            members: None,
        }))
    }

    fn fit_count(&self) -> usize {
        self.fits
    }
}
