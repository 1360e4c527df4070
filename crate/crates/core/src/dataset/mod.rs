//! Dataset representation, synthetic generators, CSV ingestion, and
//! train/validation/test splitting.
//!
//! A [`Dataset`] is an immutable table of feature vectors with either class
//! or real-valued targets. Generators and loaders construct datasets; the
//! splitting helpers produce the index bookkeeping consumed by the rest of
//! the pipeline.

mod csv;
mod generate;
mod split;

pub use csv::{load_csv, CsvSchema};
pub use generate::{
    generate_checkerboard, generate_gaussian_clouds, generate_synth_regression, RegressionVariant,
};
pub use split::{initial_labels, split};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("feature rows ({rows}) do not match target count ({targets})")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("classification needs at least two classes")]
    TooFewClasses,
    #[error("class label {label} out of range for {n_classes} classes")]
    ClassOutOfRange { label: usize, n_classes: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("checkerboard grid must be 2 or 4, got {0}")]
    InvalidGrid(usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("need at least 2 clouds, got {0}")]
    TooFewClouds(usize),
    #[error("noise standard deviation must be finite and >= 0, got {0}")]
    InvalidNoise(f64),
    #[error("split fractions must be non-negative with train > 0 and test > 0")]
    InvalidFractions,
    #[error("split fractions sum to {0}, expected 1")]
    FractionSum(f64),
    #[error("stratified split needs >= {subsets} samples in every class, class {class} has {got}")]
    StratifyTooSmall {
        class: usize,
        got: usize,
        subsets: usize,
    },
    #[error("warm-start fraction must be in (0, 1], got {0}")]
    InvalidWarmFraction(f64),
    #[error("cold-start regression needs at least 2 train points")]
    ColdRegressionTooSmall,
    #[error("index subsets must be pairwise disjoint")]
    OverlappingSubsets,
    #[error("index {index} out of bounds for {n_samples} samples")]
    IndexOutOfBounds { index: usize, n_samples: usize },
    #[error("train and test subsets must be non-empty")]
    EmptySubset,
    #[error("{path}: file contains no data rows")]
    EmptyFile { path: String },
    #[error("{path}: missing column {column:?}")]
    MissingColumn { path: String, column: String },
    #[error("{path}: cell at row {row}, column {column:?} is not a finite number")]
    NonNumericCell {
        path: String,
        row: usize,
        column: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed CSV: {source}")]
    MalformedCsv {
        path: String,
        #[source]
        source: ::csv::Error,
    },
}

/// Learning task attached to a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Classification { n_classes: usize },
    Regression,
}

impl TaskKind {
    pub fn is_classification(&self) -> bool {
        matches!(self, TaskKind::Classification { .. })
    }
}

/// Target kind without the class count, used where the number of classes is
/// not yet known (e.g. CSV schemas and experiment configuration).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Classification,
    Regression,
}

/// Full target column of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Class(Vec<usize>),
    Real(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Class(v) => v.len(),
            Targets::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A single target value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    Class(usize),
    Real(f64),
}

/// Immutable table of feature vectors and targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    features: DMatrix<f64>,
    targets: Targets,
    task_kind: TaskKind,
}

impl Dataset {
    /// Builds a classification dataset with class indices in `0..n_classes`.
    pub fn classification(
        name: impl Into<String>,
        features: DMatrix<f64>,
        labels: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self, DatasetError> {
        if features.nrows() != labels.len() {
            return Err(DatasetError::LengthMismatch {
                rows: features.nrows(),
                targets: labels.len(),
            });
        }
        if n_classes < 2 {
            return Err(DatasetError::TooFewClasses);
        }
        if let Some(&label) = labels.iter().find(|&&c| c >= n_classes) {
            return Err(DatasetError::ClassOutOfRange { label, n_classes });
        }
        if !features.iter().all(|v| v.is_finite()) {
            return Err(DatasetError::NonFinite("features"));
        }
        Ok(Self {
            name: name.into(),
            features,
            targets: Targets::Class(labels),
            task_kind: TaskKind::Classification { n_classes },
        })
    }

    /// Builds a regression dataset with real-valued targets.
    pub fn regression(
        name: impl Into<String>,
        features: DMatrix<f64>,
        targets: Vec<f64>,
    ) -> Result<Self, DatasetError> {
        if features.nrows() != targets.len() {
            return Err(DatasetError::LengthMismatch {
                rows: features.nrows(),
                targets: targets.len(),
            });
        }
        if !features.iter().all(|v| v.is_finite()) {
            return Err(DatasetError::NonFinite("features"));
        }
        if !targets.iter().all(|v| v.is_finite()) {
            return Err(DatasetError::NonFinite("targets"));
        }
        Ok(Self {
            name: name.into(),
            features,
            targets: Targets::Real(targets),
            task_kind: TaskKind::Regression,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn task_kind(&self) -> TaskKind {
        self.task_kind
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    /// Target of sample `index`.
    ///
    /// Panics if `index` is out of bounds.
    pub fn label(&self, index: usize) -> Label {
        match &self.targets {
            Targets::Class(v) => Label::Class(v[index]),
            Targets::Real(v) => Label::Real(v[index]),
        }
    }

    /// Gathers the feature rows of `indices` into a new matrix.
    pub fn feature_rows(&self, indices: &[usize]) -> DMatrix<f64> {
        let d = self.n_features();
        DMatrix::from_fn(indices.len(), d, |i, j| self.features[(indices[i], j)])
    }
}

/// Disjoint train/validation/test index sets over a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    /// Validates disjointness, bounds, and that train and test are non-empty.
    pub fn new(
        train: Vec<usize>,
        validation: Vec<usize>,
        test: Vec<usize>,
        n_samples: usize,
    ) -> Result<Self, DatasetError> {
        if train.is_empty() || test.is_empty() {
            return Err(DatasetError::EmptySubset);
        }
        let mut seen = vec![false; n_samples];
        for &idx in train.iter().chain(&validation).chain(&test) {
            if idx >= n_samples {
                return Err(DatasetError::IndexOutOfBounds {
                    index: idx,
                    n_samples,
                });
            }
            if seen[idx] {
                return Err(DatasetError::OverlappingSubsets);
            }
            seen[idx] = true;
        }
        Ok(Self {
            train,
            validation,
            test,
        })
    }
}

/// How the initial labelled set is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// Minimal seed labels: one per class (classification) or the farthest
    /// pair of train points (regression).
    Cold,
    /// A random fraction of the train set is labelled up front.
    Warm,
}

/// Initial-labelling configuration for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskConfig {
    pub start_mode: StartMode,
    /// Fraction of the train set labelled in warm starts; ignored for cold.
    pub warm_fraction: f64,
    pub rng_seed: u64,
}

impl TaskConfig {
    pub const DEFAULT_WARM_FRACTION: f64 = 0.10;

    pub fn cold(rng_seed: u64) -> Self {
        Self {
            start_mode: StartMode::Cold,
            warm_fraction: Self::DEFAULT_WARM_FRACTION,
            rng_seed,
        }
    }

    pub fn warm(warm_fraction: f64, rng_seed: u64) -> Self {
        Self {
            start_mode: StartMode::Warm,
            warm_fraction,
            rng_seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_rejects_out_of_range_label() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let err = Dataset::classification("t", x, vec![0, 2], 2).unwrap_err();
        assert!(matches!(
            err,
            DatasetError::ClassOutOfRange {
                label: 2,
                n_classes: 2
            }
        ));
    }

    #[test]
    fn classification_rejects_single_class() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(matches!(
            Dataset::classification("t", x, vec![0, 0], 1),
            Err(DatasetError::TooFewClasses)
        ));
    }

    #[test]
    fn regression_rejects_non_finite() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(matches!(
            Dataset::regression("t", x.clone(), vec![0.0, f64::NAN]),
            Err(DatasetError::NonFinite("targets"))
        ));
        let bad = DMatrix::from_row_slice(2, 1, &[f64::INFINITY, 1.0]);
        assert!(matches!(
            Dataset::regression("t", bad, vec![0.0, 1.0]),
            Err(DatasetError::NonFinite("features"))
        ));
    }

    #[test]
    fn split_indices_rejects_overlap_and_bounds() {
        assert!(matches!(
            SplitIndices::new(vec![0, 1], vec![], vec![1], 3),
            Err(DatasetError::OverlappingSubsets)
        ));
        assert!(matches!(
            SplitIndices::new(vec![0], vec![], vec![5], 3),
            Err(DatasetError::IndexOutOfBounds { index: 5, .. })
        ));
        assert!(matches!(
            SplitIndices::new(vec![], vec![], vec![1], 3),
            Err(DatasetError::EmptySubset)
        ));
    }
}
