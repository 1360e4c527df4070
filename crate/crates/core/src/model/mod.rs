//! Model managers: trainable predictors that expose a posterior per query
//! point.
//!
//! Three concrete managers ship with the toolkit: an exact GP regressor, a
//! Laplace-approximated GP classifier, and a bootstrap ensemble over simple
//! base learners. All of them re-fit from scratch on every call to
//! [`ModelManager::fit`]; a fitted manager is immutable and can be shared
//! read-only.

mod ensemble;
mod gpc;
mod gpr;
mod kernel;
mod metrics;
mod optim;

pub use ensemble::{BaseRecipe, EnsembleModel};
pub use gpc::{gpc_laplace_evidence_and_grad, GpClassifier};
pub use gpr::{gpr_log_marginal_and_grad, GpRegressor};
pub use kernel::{rbf_kernel, GpHyperparams};
pub use metrics::{
    argmax_classes, balanced_accuracy, evaluate, mean_squared_error, TestMetrics,
    BALANCED_ACCURACY, MSE,
};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::dataset::Label;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("hyperparameters must be strictly positive and finite")]
    InvalidHyperparams,
    #[error("non-finite value in model input")]
    NonFiniteInput,
    #[error("Cholesky factorization failed after jitter escalation (ill-conditioned kernel)")]
    CholeskyFailure,
    #[error("Newton iteration diverged to a non-finite posterior mode")]
    NewtonDivergence,
    #[error("model has not been fitted")]
    NotFitted,
    #[error("labelled set is empty")]
    EmptyTrainingSet,
    #[error("evaluation set is empty")]
    EmptyEvalSet,
    #[error("classification fit needs at least two distinct classes")]
    SingleClass,
    #[error("label kind does not match the model task")]
    LabelKindMismatch,
    #[error("feature dimension mismatch: fitted with {fitted}, got {got}")]
    DimensionMismatch { fitted: usize, got: usize },
    #[error("ensemble needs at least 2 estimators, got {0}")]
    TooFewEstimators(usize),
    #[error("ensemble member {id}: {source}")]
    Member {
        id: usize,
        #[source]
        source: Box<ModelError>,
    },
}

/// Gaussian predictive marginals for a batch of query points.
#[derive(Debug, Clone)]
pub struct RegressionPosterior {
    /// Posterior mean per query point.
    pub mean: Vec<f64>,
    /// Latent-function variance per query point (no observation noise),
    /// clamped at zero.
    pub variance: Vec<f64>,
    /// Per-member predictions (members x points) when the model is an
    /// ensemble.
    pub members: Option<DMatrix<f64>>,
}

impl RegressionPosterior {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Class-probability rows (points x classes) for a batch of query points.
#[derive(Debug, Clone)]
pub struct ClassPosterior {
    /// Each row lies on the probability simplex.
    pub probs: DMatrix<f64>,
    /// Per-member probability matrices when the model is an ensemble.
    pub members: Option<Vec<DMatrix<f64>>>,
}

impl ClassPosterior {
    pub fn len(&self) -> usize {
        self.probs.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.probs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.nrows() == 0
    }
}

/// Posterior over query points, one variant per task kind.
#[derive(Debug, Clone)]
pub enum Posterior {
    Regression(RegressionPosterior),
    Classification(ClassPosterior),
}

impl Posterior {
    pub fn len(&self) -> usize {
        match self {
            Posterior::Regression(p) => p.len(),
            Posterior::Classification(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A trainable predictor with a per-point posterior.
///
/// `fit` replaces any previous state ("train anew"); `predict` requires a
/// prior successful `fit`. `fit_count` exposes how many times the model has
/// been trained, which lets callers verify that model-free strategies never
/// touch the model.
pub trait ModelManager: Send {
    fn fit(&mut self, x: &DMatrix<f64>, y: &[Label]) -> Result<(), ModelError>;

    fn predict(&self, x: &DMatrix<f64>) -> Result<Posterior, ModelError>;

    fn fit_count(&self) -> usize;
}

pub(crate) fn check_finite(x: &DMatrix<f64>) -> Result<(), ModelError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFiniteInput)
    }
}
