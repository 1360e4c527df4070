//! Gaussian process classification with a logistic link and Laplace
//! approximation.
//!
//! The binary machine finds the posterior mode by Newton iteration on the
//! stabilized `B = I + W^1/2 K W^1/2` system, approximates the posterior by
//! a Gaussian at the mode, and averages the logistic likelihood over the
//! latent Gaussian with the probit-style approximation
//! `sigmoid(mu / sqrt(1 + pi * var / 8))`. Multiclass tasks are handled
//! one-vs-rest with probability renormalisation. `noise_variance` is unused
//! here; class noise is absorbed by the link.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dataset::Label;

use super::kernel::{rbf_kernel, squared_distances};
use super::optim::{maximize, AscentConfig};
use super::{check_finite, ClassPosterior, GpHyperparams, ModelError, ModelManager, Posterior};

/// Newton stops when the mode moves less than this in infinity norm.
const NEWTON_TOL: f64 = 1e-6;
const NEWTON_MAX_ITERS: usize = 100;

#[derive(Debug, Clone)]
pub struct GpClassifier {
    hp_init: GpHyperparams,
    optimize: bool,
    ascent: AscentConfig,
    state: Option<GpcState>,
    fits: usize,
}

#[derive(Debug, Clone)]
struct GpcState {
    x: DMatrix<f64>,
    hp: GpHyperparams,
    /// Observed class ids, ascending.
    classes: Vec<usize>,
    /// One machine per observed class (one-vs-rest), or a single machine
    /// for the higher class in the binary case.
    machines: Vec<BinaryMachine>,
    /// Width of the probability rows: highest observed class id + 1.
    n_columns: usize,
}

/// Converged Laplace quantities of one binary problem.
#[derive(Debug, Clone)]
struct BinaryMachine {
    /// `t - pi` at the mode; prediction means are `k*^T grad_ll`.
    grad_ll: DVector<f64>,
    sqrt_w: DVector<f64>,
    chol_b: Cholesky<f64, Dyn>,
    evidence: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log sigmoid(z)` without overflow.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Quantities produced by one Newton evaluation at a candidate mode.
struct NewtonStep {
    /// `a = b - W^1/2 B^-1 W^1/2 K b`; at a fixed point `f = K a`.
    a: DVector<f64>,
    sqrt_w: DVector<f64>,
    chol_b: Cholesky<f64, Dyn>,
    grad: DVector<f64>,
}

fn newton_step(
    k: &DMatrix<f64>,
    targets: &DVector<f64>,
    f: &DVector<f64>,
) -> Result<NewtonStep, ModelError> {
    let n = targets.len();
    let pi = f.map(sigmoid);
    let w = pi.map(|p| p * (1.0 - p));
    let sqrt_w = w.map(f64::sqrt);
    let mut b_mat = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            b_mat[(i, j)] += sqrt_w[i] * k[(i, j)] * sqrt_w[j];
        }
    }
    let chol_b = Cholesky::new(b_mat).ok_or(ModelError::CholeskyFailure)?;
    let grad = targets - &pi;
    let b = w.component_mul(f) + &grad;
    let kb = k * &b;
    let z = chol_b.solve(&sqrt_w.component_mul(&kb));
    let a = &b - sqrt_w.component_mul(&z);
    Ok(NewtonStep {
        a,
        sqrt_w,
        chol_b,
        grad,
    })
}

/// Newton iteration to the posterior mode of a binary logistic GP.
///
/// `targets` are 0/1. Returns the machine quantities at the converged mode
/// together with the mode itself and `a = K^-1 f`.
fn newton_mode(
    k: &DMatrix<f64>,
    targets: &DVector<f64>,
) -> Result<(BinaryMachine, DVector<f64>, DVector<f64>), ModelError> {
    let n = targets.len();
    let mut f = DVector::zeros(n);
    let mut a = DVector::zeros(n);
    for _ in 0..NEWTON_MAX_ITERS {
        let step = newton_step(k, targets, &f)?;
        let f_new = k * &step.a;
        if !f_new.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NewtonDivergence);
        }
        let delta = (&f_new - &f).amax();
        f = f_new;
        a = step.a;
        if delta < NEWTON_TOL {
            break;
        }
    }

    // Final quantities at the converged mode.
    let step = newton_step(k, targets, &f)?;
    let log_lik: f64 = (0..n)
        .map(|i| {
            let z = if targets[i] > 0.5 { f[i] } else { -f[i] };
            log_sigmoid(z)
        })
        .sum();
    let log_det_half: f64 = (0..n).map(|i| step.chol_b.l_dirty()[(i, i)].ln()).sum();
    let evidence = -0.5 * a.dot(&f) + log_lik - log_det_half;
    Ok((
        BinaryMachine {
            grad_ll: step.grad,
            sqrt_w: step.sqrt_w,
            chol_b: step.chol_b,
            evidence,
        },
        f,
        a,
    ))
}

/// Laplace approximation of the log marginal likelihood of a binary
/// logistic GP and its gradient with respect to
/// `(ln lengthscale, ln signal_variance)`.
pub fn gpc_laplace_evidence_and_grad(
    x: &DMatrix<f64>,
    targets01: &[f64],
    hp: &GpHyperparams,
) -> Result<(f64, Vec<f64>), ModelError> {
    let n = targets01.len();
    let t = DVector::from_column_slice(targets01);
    let sq = squared_distances(x, x);
    let k = rbf_kernel(x, x, hp);
    let (machine, f, a) = newton_mode(&k, &t)?;

    let pi = f.map(sigmoid);
    let sw = &machine.sqrt_w;
    // R = W^1/2 B^-1 W^1/2.
    let mut sw_diag = DMatrix::zeros(n, n);
    for i in 0..n {
        sw_diag[(i, i)] = sw[i];
    }
    let r = &sw_diag * machine.chol_b.solve(&sw_diag);
    // C = L^-1 W^1/2 K; posterior variance at train points is
    // diag(K) - diag(C^T C).
    let c = machine
        .chol_b
        .l_dirty()
        .solve_lower_triangular(&(&sw_diag * &k))
        .ok_or(ModelError::CholeskyFailure)?;
    let mut s2 = DVector::zeros(n);
    for i in 0..n {
        let reduced: f64 = (0..n).map(|m| c[(m, i)].powi(2)).sum();
        let post_var = k[(i, i)] - reduced;
        // dW_ii/df_i for the logistic likelihood; the evidence moves through
        // the determinant term as -1/2 * var_i * dW_ii/df_i.
        let dw = pi[i] * (1.0 - pi[i]) * (1.0 - 2.0 * pi[i]);
        s2[i] = -0.5 * post_var * dw;
    }

    let ls2 = hp.lengthscale * hp.lengthscale;
    let mut grads = Vec::with_capacity(2);
    for param in 0..2 {
        // dK for ln lengthscale is K .* sq/ls^2; for ln signal it is K.
        let dk = if param == 0 {
            DMatrix::from_fn(n, n, |i, j| k[(i, j)] * sq[(i, j)] / ls2)
        } else {
            k.clone()
        };
        let mut tr_r_dk = 0.0;
        for i in 0..n {
            for j in 0..n {
                tr_r_dk += r[(i, j)] * dk[(j, i)];
            }
        }
        let s1 = 0.5 * a.dot(&(&dk * &a)) - 0.5 * tr_r_dk;
        let b = &dk * &machine.grad_ll;
        let s3 = &b - &k * (&r * &b);
        grads.push(s1 + s2.dot(&s3));
    }
    Ok((machine.evidence, grads))
}

impl GpClassifier {
    pub fn new(hp: GpHyperparams, optimize: bool) -> Self {
        Self {
            hp_init: hp,
            optimize,
            ascent: AscentConfig::default(),
            state: None,
            fits: 0,
        }
    }

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

    pub fn hyperparams(&self) -> Option<GpHyperparams> {
        self.state.as_ref().map(|s| s.hp)
    }

    /// Sum of per-machine Laplace evidences of the current fit.
    pub fn evidence(&self) -> Option<f64> {
        self.state
            .as_ref()
            .map(|s| s.machines.iter().map(|m| m.evidence).sum())
    }

    fn fit_classes(&mut self, x: &DMatrix<f64>, y: &[usize]) -> Result<(), ModelError> {
        check_finite(x)?;
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        let mut classes: Vec<usize> = y.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(ModelError::SingleClass);
        }

        // One-vs-rest target vectors; a single machine suffices for binary.
        let target_sets: Vec<(usize, Vec<f64>)> = if classes.len() == 2 {
            let positive = classes[1];
            vec![(
                positive,
                y.iter().map(|&c| f64::from(c == positive)).collect(),
            )]
        } else {
            classes
                .iter()
                .map(|&class| (class, y.iter().map(|&c| f64::from(c == class)).collect()))
                .collect()
        };

        let hp = if self.optimize {
            let objective = |logp: &[f64]| {
                let hp = GpHyperparams::new(logp[0].exp(), logp[1].exp(), 1.0).ok()?;
                let mut total = 0.0;
                let mut grad = vec![0.0; 2];
                for (_, t) in &target_sets {
                    let (e, g) = gpc_laplace_evidence_and_grad(x, t, &hp).ok()?;
                    total += e;
                    grad[0] += g[0];
                    grad[1] += g[1];
                }
                Some((total, grad))
            };
            let start = [
                self.hp_init.lengthscale.ln(),
                self.hp_init.signal_variance.ln(),
            ];
            let best = maximize(objective, &start, &self.ascent);
            GpHyperparams::new(best[0].exp(), best[1].exp(), self.hp_init.noise_variance)
                .unwrap_or(self.hp_init)
        } else {
            self.hp_init
        };

        let k = rbf_kernel(x, x, &hp);
        let machines = target_sets
            .iter()
            .map(|(_, t)| newton_mode(&k, &DVector::from_column_slice(t)).map(|(m, _, _)| m))
            .collect::<Result<Vec<_>, _>>()?;

        self.state = Some(GpcState {
            x: x.clone(),
            hp,
            n_columns: classes.last().unwrap() + 1,
            classes,
            machines,
        });
        self.fits += 1;
        Ok(())
    }
}

impl ModelManager for GpClassifier {
    fn fit(&mut self, x: &DMatrix<f64>, y: &[Label]) -> Result<(), ModelError> {
        let y: Vec<usize> = y
            .iter()
            .map(|l| match l {
                Label::Class(c) => Ok(*c),
                Label::Real(_) => Err(ModelError::LabelKindMismatch),
            })
            .collect::<Result<_, _>>()?;
        self.fit_classes(x, &y)
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
        let q = x.nrows();
        let k_star = rbf_kernel(&state.x, x, &state.hp);

        // Averaged-logistic probability per machine and query point.
        let mut machine_probs = DMatrix::zeros(q, state.machines.len());
        for (m_idx, machine) in state.machines.iter().enumerate() {
            let mean = k_star.transpose() * &machine.grad_ll;
            let mut scaled = k_star.clone();
            for i in 0..state.x.nrows() {
                for j in 0..q {
                    scaled[(i, j)] *= machine.sqrt_w[i];
                }
            }
            let v = machine
                .chol_b
                .l_dirty()
                .solve_lower_triangular(&scaled)
                .ok_or(ModelError::CholeskyFailure)?;
            for j in 0..q {
                let reduction: f64 = (0..state.x.nrows()).map(|i| v[(i, j)].powi(2)).sum();
                let var = (state.hp.signal_variance - reduction).max(0.0);
                let kappa = 1.0 / (1.0 + std::f64::consts::PI * var / 8.0).sqrt();
                machine_probs[(j, m_idx)] = sigmoid(kappa * mean[j]);
            }
        }

        let mut probs = DMatrix::zeros(q, state.n_columns);
        if state.classes.len() == 2 {
            let (neg, pos) = (state.classes[0], state.classes[1]);
            for j in 0..q {
                probs[(j, pos)] = machine_probs[(j, 0)];
                probs[(j, neg)] = 1.0 - machine_probs[(j, 0)];
            }
        } else {
            for j in 0..q {
                let total: f64 = (0..state.machines.len())
                    .map(|m| machine_probs[(j, m)])
                    .sum();
                for (m_idx, &class) in state.classes.iter().enumerate() {
                    probs[(j, class)] = machine_probs[(j, m_idx)] / total;
                }
            }
        }
        Ok(Posterior::Classification(ClassPosterior {
            probs,
            members: None,
        }))
    }

    fn fit_count(&self) -> usize {
        self.fits
    }
}
