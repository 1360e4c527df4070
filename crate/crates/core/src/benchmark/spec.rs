//! Experiment configuration: the JSON-facing description of a benchmark
//! sweep and its translation into datasets and models.

use serde::{Deserialize, Serialize};

use crate::dataset::{
    generate_checkerboard, generate_gaussian_clouds, generate_synth_regression, load_csv,
    CsvSchema, Dataset, RegressionVariant, StartMode, TargetKind, TaskConfig,
};
use crate::model::{
    BaseRecipe, EnsembleModel, GpClassifier, GpHyperparams, GpRegressor, ModelManager,
};
use crate::seed::derive_seed;
use crate::strategy::StrategyKind;

use super::{BenchmarkError, TAG_DATASET};

fn default_folds() -> usize {
    5
}

fn default_m() -> usize {
    1
}

fn default_warm_fraction() -> f64 {
    TaskConfig::DEFAULT_WARM_FRACTION
}

fn default_lengthscale() -> f64 {
    1.0
}

fn default_signal_variance() -> f64 {
    1.0
}

fn default_noise_variance() -> f64 {
    0.1
}

/// Everything needed to reproduce one benchmark sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub dataset: DatasetSpec,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub start: StartSpec,
    pub strategies: Vec<StrategySpec>,
    pub model: ModelSpec,
    #[serde(default = "default_m")]
    pub m_per_iteration: usize,
    /// Maximum query iterations per run; `null` runs until the pool drains.
    #[serde(default)]
    pub budget: Option<usize>,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), BenchmarkError> {
        if self.folds < 2 {
            return Err(BenchmarkError::InvalidSpec(format!(
                "folds must be at least 2, got {}",
                self.folds
            )));
        }
        if self.strategies.is_empty() {
            return Err(BenchmarkError::InvalidSpec(
                "at least one strategy is required".to_owned(),
            ));
        }
        if self.m_per_iteration == 0 {
            return Err(BenchmarkError::InvalidSpec(
                "m_per_iteration must be at least 1".to_owned(),
            ));
        }
        Ok(())
    }
}

/// Dataset source: a seeded generator or a CSV file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Checkerboard {
        n_samples: usize,
        grid: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    GaussianClouds {
        n_samples: usize,
        n_clouds: usize,
        overlap_sigma: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    SynthRegression {
        variant: RegressionVariant,
        n_samples: usize,
        noise_sd: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    Csv {
        path: String,
        target_column: String,
        target_kind: TargetKind,
    },
}

impl DatasetSpec {
    /// Builds the dataset; generator seeds left unset derive from the
    /// master seed.
    pub fn build(&self, master_seed: u64) -> Result<Dataset, BenchmarkError> {
        let derived = derive_seed(master_seed, &[TAG_DATASET]);
        let ds = match self {
            DatasetSpec::Checkerboard {
                n_samples,
                grid,
                seed,
            } => generate_checkerboard(*n_samples, *grid, seed.unwrap_or(derived))?,
            DatasetSpec::GaussianClouds {
                n_samples,
                n_clouds,
                overlap_sigma,
                seed,
            } => generate_gaussian_clouds(
                *n_samples,
                *n_clouds,
                *overlap_sigma,
                seed.unwrap_or(derived),
            )?,
            DatasetSpec::SynthRegression {
                variant,
                n_samples,
                noise_sd,
                seed,
            } => {
                generate_synth_regression(*variant, *n_samples, *noise_sd, seed.unwrap_or(derived))?
            }
            DatasetSpec::Csv {
                path,
                target_column,
                target_kind,
            } => load_csv(
                path,
                &CsvSchema {
                    target_column: target_column.clone(),
                    target_kind: *target_kind,
                },
            )?,
        };
        Ok(ds)
    }
}

/// Initial-labelling mode of every fold.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StartSpec {
    pub mode: StartMode,
    #[serde(default = "default_warm_fraction")]
    pub warm_fraction: f64,
}

impl StartSpec {
    pub fn task_config(&self, rng_seed: u64) -> TaskConfig {
        TaskConfig {
            start_mode: self.mode,
            warm_fraction: self.warm_fraction,
            rng_seed,
        }
    }
}

/// One strategy entry of the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategySpec {
    /// Display name; defaults to a label derived from the rule.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: StrategyKind,
    /// Explicit seed base for this entry. When set, the per-fold seed is
    /// derived from it alone, so two entries with equal bases run
    /// identically; when unset, seeds derive from the master seed and the
    /// entry's position.
    #[serde(default)]
    pub rng_seed: Option<u64>,
}

impl StrategySpec {
    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| crate::strategy::StrategyConfig::new(self.kind, 0).label())
    }
}

/// Model manager configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    GpRegressor {
        #[serde(default = "default_lengthscale")]
        lengthscale: f64,
        #[serde(default = "default_signal_variance")]
        signal_variance: f64,
        #[serde(default = "default_noise_variance")]
        noise_variance: f64,
        #[serde(default)]
        optimize: bool,
        /// Ascent budget override: [restarts, max_iters].
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ascent: Option<[usize; 2]>,
    },
    GpClassifier {
        #[serde(default = "default_lengthscale")]
        lengthscale: f64,
        #[serde(default = "default_signal_variance")]
        signal_variance: f64,
        #[serde(default)]
        optimize: bool,
        /// Ascent budget override: [restarts, max_iters].
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ascent: Option<[usize; 2]>,
    },
    EnsembleRidge {
        l2: f64,
        n_estimators: usize,
    },
    EnsembleLogistic {
        l2: f64,
        learning_rate: f64,
        epochs: usize,
        n_estimators: usize,
    },
}

impl ModelSpec {
    /// Instantiates the model manager with its seed stream.
    pub fn build(&self, seed: u64) -> Result<Box<dyn ModelManager>, BenchmarkError> {
        Ok(match *self {
            ModelSpec::GpRegressor {
                lengthscale,
                signal_variance,
                noise_variance,
                optimize,
                ascent,
            } => {
                let hp = GpHyperparams::new(lengthscale, signal_variance, noise_variance)?;
                let mut model = GpRegressor::new(hp, optimize).with_restart_seed(seed);
                if let Some([restarts, iters]) = ascent {
                    model = model.with_ascent_budget(restarts, iters);
                }
                Box::new(model)
            }
            ModelSpec::GpClassifier {
                lengthscale,
                signal_variance,
                optimize,
                ascent,
            } => {
                let hp = GpHyperparams::new(lengthscale, signal_variance, 1.0)?;
                let mut model = GpClassifier::new(hp, optimize).with_restart_seed(seed);
                if let Some([restarts, iters]) = ascent {
                    model = model.with_ascent_budget(restarts, iters);
                }
                Box::new(model)
            }
            ModelSpec::EnsembleRidge { l2, n_estimators } => Box::new(EnsembleModel::new(
                BaseRecipe::Ridge { l2 },
                n_estimators,
                seed,
            )?),
            ModelSpec::EnsembleLogistic {
                l2,
                learning_rate,
                epochs,
                n_estimators,
            } => Box::new(EnsembleModel::new(
                BaseRecipe::Logistic {
                    l2,
                    learning_rate,
                    epochs,
                },
                n_estimators,
                seed,
            )?),
        })
    }
}
