//! Multi-restart quasi-Newton ascent for marginal-likelihood optimization.
//!
//! Works in log-parameter space, which keeps hyperparameters positive and
//! makes the objective better conditioned. The objective closure returns
//! `None` when an evaluation fails (e.g. an ill-conditioned kernel); the
//! line search then backtracks and the restart gives up gracefully.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ascent configuration shared by the GP managers.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AscentConfig {
    /// Total starting points: the supplied initial point plus
    /// `restarts - 1` log-uniform draws.
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            restarts: 3,
            max_iters: 200,
            grad_tol: 1e-5,
            seed: 0,
        }
    }
}

/// Log-uniform restart window for hyperparameters: `[1e-2, 1e2]`.
const LOG_LOW: f64 = -4.605170185988091; // ln 1e-2
const LOG_HIGH: f64 = 4.605170185988091; // ln 1e2

/// Maximizes `objective` (value and gradient in log-space) and returns the
/// best point found across restarts, or the initial point if every restart
/// fails to evaluate.
pub(crate) fn maximize<F>(objective: F, initial: &[f64], cfg: &AscentConfig) -> Vec<f64>
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let dim = initial.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![initial.to_vec()];
    for _ in 1..cfg.restarts.max(1) {
        starts.push(
            (0..dim)
                .map(|_| rng.random_range(LOG_LOW..LOG_HIGH))
                .collect(),
        );
    }

    let mut best_x = initial.to_vec();
    let mut best_f = f64::NEG_INFINITY;
    for start in starts {
        if let Some((x, f)) = bfgs_ascent(&objective, &start, cfg) {
            if f > best_f {
                best_f = f;
                best_x = x;
            }
        }
    }
    best_x
}

/// One BFGS run; returns the final point and objective value, or `None` if
/// the starting point cannot be evaluated.
fn bfgs_ascent<F>(objective: &F, start: &[f64], cfg: &AscentConfig) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let dim = start.len();
    let mut x = DVector::from_column_slice(start);
    let (mut f, grad) = objective(x.as_slice())?;
    let mut grad = DVector::from_vec(grad);
    let mut h_inv: DMatrix<f64> = DMatrix::identity(dim, dim);

    for _ in 0..cfg.max_iters {
        if grad.amax() < cfg.grad_tol {
            break;
        }
        let mut direction = &h_inv * &grad;
        if direction.dot(&grad) <= 0.0 {
            // Curvature update went bad; reset to steepest ascent.
            h_inv = DMatrix::identity(dim, dim);
            direction = grad.clone();
        }

        // Backtracking line search with the Armijo condition.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let candidate = &x + &direction * step;
            if let Some((f_new, g_new)) = objective(candidate.as_slice()) {
                if f_new >= f + 1e-4 * step * grad.dot(&direction) && f_new.is_finite() {
                    accepted = Some((candidate, f_new, DVector::from_vec(g_new)));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, grad_new)) = accepted else {
            break;
        };

        let s = &x_new - &x;
        let y = &grad_new - &grad;
        let sy = s.dot(&y);
        // BFGS update for the pair (s, -y) of the negated (convex) problem;
        // valid only while the curvature along the step stays concave.
        if sy < -1e-12 {
            let rho = -1.0 / sy;
            let identity = DMatrix::identity(dim, dim);
            let left = &identity + (&s * y.transpose()) * rho;
            let right = &identity + (&y * s.transpose()) * rho;
            h_inv = &left * h_inv * right + (&s * s.transpose()) * rho;
        }

        x = x_new;
        f = f_new;
        grad = grad_new;
    }
    Some((x.as_slice().to_vec(), f))
}
