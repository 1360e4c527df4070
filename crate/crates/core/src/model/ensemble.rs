//! Bootstrap ensembles over simple deterministic base learners.
//!
//! Each member is trained on a with-replacement resample of the labelled
//! set; the spread of member predictions serves as the epistemic-uncertainty
//! proxy. Base learners are closed-form ridge regression and full-batch
//! gradient-descent multinomial logistic regression, both bit-deterministic
//! given the member seed.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Label;
use crate::seed::derive_seed;

use super::{
    check_finite, ClassPosterior, ModelError, ModelManager, Posterior, RegressionPosterior,
};

/// Base learner fitted inside each ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseRecipe {
    /// Closed-form ridge regression with an unpenalized intercept.
    Ridge { l2: f64 },
    /// Multinomial logistic regression trained by full-batch gradient
    /// descent.
    Logistic {
        l2: f64,
        learning_rate: f64,
        epochs: usize,
    },
}

impl BaseRecipe {
    fn is_regression(&self) -> bool {
        matches!(self, BaseRecipe::Ridge { .. })
    }
}

#[derive(Debug, Clone)]
enum Member {
    Ridge {
        weights: DVector<f64>,
        intercept: f64,
    },
    Logistic {
        /// Class-by-feature weight matrix.
        weights: DMatrix<f64>,
        bias: DVector<f64>,
    },
}

/// Bootstrap ensemble model manager.
#[derive(Debug, Clone)]
pub struct EnsembleModel {
    recipe: BaseRecipe,
    n_estimators: usize,
    seed: u64,
    /// Explicit per-member seeds override the derived stream (mainly useful
    /// to reproduce a run or force degenerate diversity).
    member_seeds: Option<Vec<u64>>,
    members: Vec<Member>,
    n_classes: usize,
    fits: usize,
}

impl EnsembleModel {
    pub fn new(recipe: BaseRecipe, n_estimators: usize, seed: u64) -> Result<Self, ModelError> {
        if n_estimators < 2 {
            return Err(ModelError::TooFewEstimators(n_estimators));
        }
        Ok(Self {
            recipe,
            n_estimators,
            seed,
            member_seeds: None,
            members: Vec::new(),
            n_classes: 0,
            fits: 0,
        })
    }

    /// Overrides the derived per-member bootstrap seeds.
    pub fn with_member_seeds(mut self, seeds: Vec<u64>) -> Result<Self, ModelError> {
        if seeds.len() != self.n_estimators {
            return Err(ModelError::TooFewEstimators(seeds.len()));
        }
        self.member_seeds = Some(seeds);
        Ok(self)
    }

    pub fn n_estimators(&self) -> usize {
        self.n_estimators
    }

    fn member_seed(&self, member: usize) -> u64 {
        match &self.member_seeds {
            Some(seeds) => seeds[member],
            None => derive_seed(self.seed, &[member as u64]),
        }
    }
}

fn bootstrap_rows(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn fit_ridge(x: &DMatrix<f64>, y: &[f64], l2: f64) -> Result<Member, ModelError> {
    let n = x.nrows();
    let d = x.ncols();
    // Centre features and targets so the intercept stays unpenalized.
    let x_mean: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let xc = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - x_mean[j]);
    let yc = DVector::from_fn(n, |i, _| y[i] - y_mean);
    let mut gram = xc.transpose() * &xc;
    for j in 0..d {
        gram[(j, j)] += l2.max(1e-12);
    }
    let chol = Cholesky::new(gram).ok_or(ModelError::CholeskyFailure)?;
    let weights = chol.solve(&(xc.transpose() * yc));
    let intercept = y_mean - weights.dot(&DVector::from_vec(x_mean));
    Ok(Member::Ridge { weights, intercept })
}

fn fit_logistic(
    x: &DMatrix<f64>,
    y: &[usize],
    n_classes: usize,
    l2: f64,
    learning_rate: f64,
    epochs: usize,
) -> Result<Member, ModelError> {
    let n = x.nrows();
    let d = x.ncols();
    let mut weights = DMatrix::zeros(n_classes, d);
    let mut bias = DVector::zeros(n_classes);
    for _ in 0..epochs {
        let probs = softmax_logits(x, &weights, &bias);
        // Gradient of mean cross-entropy plus the ridge penalty.
        let mut grad_w = DMatrix::zeros(n_classes, d);
        let mut grad_b = DVector::zeros(n_classes);
        for i in 0..n {
            for c in 0..n_classes {
                let delta = probs[(i, c)] - f64::from(y[i] == c);
                grad_b[c] += delta / n as f64;
                for j in 0..d {
                    grad_w[(c, j)] += delta * x[(i, j)] / n as f64;
                }
            }
        }
        grad_w += &weights * l2;
        weights -= grad_w * learning_rate;
        bias -= grad_b * learning_rate;
        if !weights.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NewtonDivergence);
        }
    }
    Ok(Member::Logistic { weights, bias })
}

fn softmax_logits(x: &DMatrix<f64>, weights: &DMatrix<f64>, bias: &DVector<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let k = weights.nrows();
    let mut out = DMatrix::zeros(n, k);
    for i in 0..n {
        let mut max_logit = f64::NEG_INFINITY;
        for c in 0..k {
            let z: f64 = (0..x.ncols())
                .map(|j| weights[(c, j)] * x[(i, j)])
                .sum::<f64>()
                + bias[c];
            out[(i, c)] = z;
            max_logit = max_logit.max(z);
        }
        let mut total = 0.0;
        for c in 0..k {
            out[(i, c)] = (out[(i, c)] - max_logit).exp();
            total += out[(i, c)];
        }
        for c in 0..k {
            out[(i, c)] /= total;
        }
    }
    out
}

impl ModelManager for EnsembleModel {
    fn fit(&mut self, x: &DMatrix<f64>, y: &[Label]) -> Result<(), ModelError> {
        check_finite(x)?;
        if y.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        if self.recipe.is_regression() {
            let targets: Vec<f64> = y
                .iter()
                .map(|l| match l {
                    Label::Real(v) if v.is_finite() => Ok(*v),
                    Label::Real(_) => Err(ModelError::NonFiniteInput),
                    Label::Class(_) => Err(ModelError::LabelKindMismatch),
                })
                .collect::<Result<_, _>>()?;
            let BaseRecipe::Ridge { l2 } = self.recipe else {
                unreachable!();
            };
            let mut members = Vec::with_capacity(self.n_estimators);
            for m in 0..self.n_estimators {
                let mut rng = ChaCha8Rng::seed_from_u64(self.member_seed(m));
                let rows = bootstrap_rows(y.len(), &mut rng);
                let xb = DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)]);
                let yb: Vec<f64> = rows.iter().map(|&r| targets[r]).collect();
                let member = fit_ridge(&xb, &yb, l2).map_err(|e| ModelError::Member {
                    id: m,
                    source: Box::new(e),
                })?;
                members.push(member);
            }
            self.members = members;
            self.n_classes = 0;
        } else {
            let targets: Vec<usize> = y
                .iter()
                .map(|l| match l {
                    Label::Class(c) => Ok(*c),
                    Label::Real(_) => Err(ModelError::LabelKindMismatch),
                })
                .collect::<Result<_, _>>()?;
            let n_classes = targets.iter().copied().max().unwrap_or(0) + 1;
            if targets
                .iter()
                .collect::<std::collections::BTreeSet<_>>()
                .len()
                < 2
            {
                return Err(ModelError::SingleClass);
            }
            let BaseRecipe::Logistic {
                l2,
                learning_rate,
                epochs,
            } = self.recipe
            else {
                unreachable!();
            };
            let mut members = Vec::with_capacity(self.n_estimators);
            for m in 0..self.n_estimators {
                let mut rng = ChaCha8Rng::seed_from_u64(self.member_seed(m));
                let rows = bootstrap_rows(y.len(), &mut rng);
                let xb = DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)]);
                let yb: Vec<usize> = rows.iter().map(|&r| targets[r]).collect();
                let member =
                    fit_logistic(&xb, &yb, n_classes, l2, learning_rate, epochs).map_err(|e| {
                        ModelError::Member {
                            id: m,
                            source: Box::new(e),
                        }
                    })?;
                members.push(member);
            }
            self.members = members;
            self.n_classes = n_classes;
        }
        self.fits += 1;
        Ok(())
    }

    fn predict(&self, x: &DMatrix<f64>) -> Result<Posterior, ModelError> {
        if self.members.is_empty() {
            return Err(ModelError::NotFitted);
        }
        check_finite(x)?;
        let q = x.nrows();
        if self.recipe.is_regression() {
            // Member predictions, one row per member.
            let mut member_preds = DMatrix::zeros(self.n_estimators, q);
            for (m, member) in self.members.iter().enumerate() {
                let Member::Ridge { weights, intercept } = member else {
                    unreachable!();
                };
                if weights.len() != x.ncols() {
                    return Err(ModelError::DimensionMismatch {
                        fitted: weights.len(),
                        got: x.ncols(),
                    });
                }
                for i in 0..q {
                    let z: f64 =
                        (0..x.ncols()).map(|j| weights[j] * x[(i, j)]).sum::<f64>() + intercept;
                    member_preds[(m, i)] = z;
                }
            }
            let mean: Vec<f64> = (0..q)
                .map(|i| member_preds.column(i).sum() / self.n_estimators as f64)
                .collect();
            // Population variance across members.
            let variance: Vec<f64> = (0..q)
                .map(|i| {
                    member_preds
                        .column(i)
                        .iter()
                        .map(|v| (v - mean[i]).powi(2))
                        .sum::<f64>()
                        / self.n_estimators as f64
                })
                .collect();
            Ok(Posterior::Regression(RegressionPosterior {
                mean,
                variance,
                members: Some(member_preds),
            }))
        } else {
            let mut member_probs = Vec::with_capacity(self.n_estimators);
            for member in &self.members {
                let Member::Logistic { weights, bias } = member else {
                    unreachable!();
                };
                if weights.ncols() != x.ncols() {
                    return Err(ModelError::DimensionMismatch {
                        fitted: weights.ncols(),
                        got: x.ncols(),
                    });
                }
                member_probs.push(softmax_logits(x, weights, bias));
            }
            let mut probs = DMatrix::zeros(q, self.n_classes);
            for p in &member_probs {
                probs += p;
            }
            probs /= self.n_estimators as f64;
            Ok(Posterior::Classification(ClassPosterior {
                probs,
                members: Some(member_probs),
            }))
        }
    }

    fn fit_count(&self) -> usize {
        self.fits
    }
}
