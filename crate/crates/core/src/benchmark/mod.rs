//! Benchmark harness: K-fold cross-validation, cold/warm task
//! configurations, strategy sweeps, and IPAUC aggregation.
//!
//! A sweep runs every configured strategy on every fold. Strategies within a
//! fold share the fold's split and initial labelled set, so they are
//! compared from identical starting states. Every seed derives from the
//! master seed, making the whole sweep reproducible; independent
//! (strategy, fold) cells run in parallel with results identical to
//! sequential execution.

mod ipauc;
mod output;
mod spec;

pub use ipauc::ipauc;
pub use output::{write_results, RunLine};
pub use spec::{DatasetSpec, ExperimentSpec, ModelSpec, StartSpec, StrategySpec};

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_manager::{DataManager, DataManagerError};
use crate::dataset::{initial_labels, Dataset, DatasetError, SplitIndices, Targets, TaskKind};
use crate::model::{ModelError, BALANCED_ACCURACY, MSE};
use crate::pipeline::{Oracle, Pipeline, RunLog};
use crate::seed::derive_seed;
use crate::strategy::{Strategy, StrategyConfig};

// Seed-derivation tags; distinct per purpose so streams never collide.
pub(crate) const TAG_DATASET: u64 = 1;
const TAG_FOLDS: u64 = 2;
const TAG_INIT: u64 = 3;
const TAG_CELL: u64 = 4;
const TAG_MODEL: u64 = 5;

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("ipauc needs at least 2 curve points")]
    CurveTooShort,
    #[error("ipauc curve iterations must be strictly increasing and finite")]
    BadCurve,
    #[error("metric {0:?} missing from a run log")]
    MissingMetric(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    DataManager(#[from] DataManagerError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Run(String),
}

/// The metric a task's performance curves are built from.
pub fn metric_name(task: TaskKind) -> &'static str {
    match task {
        TaskKind::Classification { .. } => BALANCED_ACCURACY,
        TaskKind::Regression => MSE,
    }
}

/// Seeded K-fold split: fold `i` uses chunk `i` as the test set and the rest
/// as train (validation stays empty). Stratified for classification.
pub fn kfold_splits(
    dataset: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<Vec<SplitIndices>, BenchmarkError> {
    let n = dataset.n_samples();
    if folds < 2 || folds > n {
        return Err(BenchmarkError::InvalidSpec(format!(
            "cannot make {folds} folds from {n} samples"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chunks: Vec<Vec<usize>> = vec![Vec::new(); folds];
    match dataset.targets() {
        Targets::Class(labels) => {
            let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (idx, &class) in labels.iter().enumerate() {
                by_class.entry(class).or_default().push(idx);
            }
            // Per class, deal shuffled members round-robin across folds so
            // class proportions stay within one sample per fold.
            for members in by_class.values() {
                let mut members = members.clone();
                members.shuffle(&mut rng);
                for (pos, idx) in members.into_iter().enumerate() {
                    chunks[pos % folds].push(idx);
                }
            }
        }
        Targets::Real(_) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            for (pos, idx) in order.into_iter().enumerate() {
                chunks[pos % folds].push(idx);
            }
        }
    }
    (0..folds)
        .map(|f| {
            let mut test = chunks[f].clone();
            let mut train: Vec<usize> = (0..folds)
                .filter(|&c| c != f)
                .flat_map(|c| chunks[c].iter().copied())
                .collect();
            train.sort_unstable();
            test.sort_unstable();
            SplitIndices::new(train, Vec::new(), test, n).map_err(BenchmarkError::from)
        })
        .collect()
}

/// One (strategy, fold) cell of the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: String,
    pub fold: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log: Option<RunLog>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// IPAUC aggregation for one strategy across folds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyIpauc {
    pub strategy: String,
    /// One entry per fold; `None` marks a failed cell.
    pub fold_ipauc: Vec<Option<f64>>,
    pub mean_ipauc: f64,
    pub std_ipauc: f64,
}

/// Per-strategy IPAUC summary of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IpaucSummary {
    pub metric: String,
    pub strategies: Vec<StrategyIpauc>,
}

/// Everything a sweep produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// Echo of the spec that ran (after any seed override).
    pub spec: ExperimentSpec,
    pub summary: IpaucSummary,
    /// Strategy-major, fold-minor order.
    pub runs: Vec<RunRecord>,
}

/// Runs the whole sweep: K folds x all strategies, IPAUC per cell, mean and
/// standard deviation per strategy. Failed cells are recorded, not fatal.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome, BenchmarkError> {
    spec.validate()?;
    let master = spec.master_seed;
    let dataset = Arc::new(spec.dataset.build(master)?);
    let task = dataset.task_kind();
    let metric = metric_name(task);

    let splits = kfold_splits(&dataset, spec.folds, derive_seed(master, &[TAG_FOLDS]))?;
    let initials: Vec<Vec<usize>> = splits
        .iter()
        .enumerate()
        .map(|(fold, split)| {
            let cfg = spec
                .start
                .task_config(derive_seed(master, &[TAG_INIT, fold as u64]));
            initial_labels(&dataset, &split.train, &cfg).map_err(BenchmarkError::from)
        })
        .collect::<Result<_, _>>()?;

    let cells: Vec<(usize, usize)> = (0..spec.strategies.len())
        .flat_map(|s| (0..spec.folds).map(move |f| (s, f)))
        .collect();
    let runs: Vec<RunRecord> = cells
        .par_iter()
        .map(|&(s, f)| {
            let label = spec.strategies[s].label();
            match run_cell(spec, &dataset, &splits[f], &initials[f], s, f) {
                Ok(log) => RunRecord {
                    strategy: label,
                    fold: f,
                    log: Some(log),
                    error: None,
                },
                Err(e) => RunRecord {
                    strategy: label,
                    fold: f,
                    log: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut strategies = Vec::with_capacity(spec.strategies.len());
    for (s, entry) in spec.strategies.iter().enumerate() {
        let fold_ipauc: Vec<Option<f64>> = (0..spec.folds)
            .map(|f| {
                runs[s * spec.folds + f]
                    .log
                    .as_ref()
                    .and_then(|log| ipauc(&log.curve(metric)).ok())
            })
            .collect();
        let present: Vec<f64> = fold_ipauc.iter().flatten().copied().collect();
        let (mean, std) = mean_std(&present);
        strategies.push(StrategyIpauc {
            strategy: entry.label(),
            fold_ipauc,
            mean_ipauc: mean,
            std_ipauc: std,
        });
    }

    Ok(ExperimentOutcome {
        spec: spec.clone(),
        summary: IpaucSummary {
            metric: metric.to_owned(),
            strategies,
        },
        runs,
    })
}

fn run_cell(
    spec: &ExperimentSpec,
    dataset: &Arc<Dataset>,
    split: &SplitIndices,
    initial: &[usize],
    strategy_idx: usize,
    fold: usize,
) -> Result<RunLog, BenchmarkError> {
    let master = spec.master_seed;
    let mgr = DataManager::new(dataset.clone(), split.clone(), initial.to_vec())?;
    // Harness contract: every strategy in a fold starts from the same
    // labelled set.
    assert_eq!(mgr.labelled(), initial);

    let entry = &spec.strategies[strategy_idx];
    let strategy_seed = match entry.rng_seed {
        Some(base) => derive_seed(base, &[fold as u64]),
        None => derive_seed(master, &[TAG_CELL, fold as u64, strategy_idx as u64]),
    };
    // The model stream hangs off the cell seed, so strategy entries with
    // equal explicit seeds reproduce each other exactly.
    let model_seed = derive_seed(strategy_seed, &[TAG_MODEL]);
    let model = spec.model.build(model_seed)?;
    let strategy = Strategy::new(StrategyConfig::new(entry.kind, strategy_seed));

    let echo = serde_json::json!({
        "strategy": entry.label(),
        "strategy_kind": entry.kind,
        "strategy_seed": strategy_seed,
        "fold": fold,
        "model": spec.model,
        "model_seed": model_seed,
        "m_per_iteration": spec.m_per_iteration,
        "budget": spec.budget,
        "master_seed": master,
        "ipauc_normalised_by_span": true,
    });
    let pipeline = Pipeline::new(mgr, model, strategy, Oracle::benchmark(dataset.clone()))
        .with_config_echo(echo);
    pipeline
        .full_run(spec.m_per_iteration, spec.budget)
        .map_err(|failure| BenchmarkError::Run(failure.to_string()))
}

/// Mean and sample standard deviation; `(NaN, NaN)` for empty input, zero
/// deviation for a single value.
fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_checkerboard, StartMode, Targets};

    #[test]
    fn kfold_partitions_and_stratifies() {
        let ds = generate_checkerboard(103, 2, 3).unwrap();
        let splits = kfold_splits(&ds, 5, 9).unwrap();
        assert_eq!(splits.len(), 5);
        let Targets::Class(labels) = ds.targets() else {
            panic!("expected class targets");
        };
        let total_ones = labels.iter().filter(|&&c| c == 1).count();
        let mut seen = vec![0usize; 103];
        for split in &splits {
            for &i in &split.test {
                seen[i] += 1;
            }
            assert_eq!(split.train.len() + split.test.len(), 103);
            // Test-chunk class balance within one of proportional.
            let ones = split.test.iter().filter(|&&i| labels[i] == 1).count();
            let expected = total_ones as f64 * split.test.len() as f64 / 103.0;
            assert!(
                (ones as f64 - expected).abs() <= 1.5,
                "ones {ones} vs {expected}"
            );
        }
        // Every index lands in exactly one test chunk.
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn kfold_is_seeded() {
        let ds = generate_checkerboard(50, 2, 3).unwrap();
        assert_eq!(
            kfold_splits(&ds, 5, 1).unwrap(),
            kfold_splits(&ds, 5, 1).unwrap()
        );
        assert_ne!(
            kfold_splits(&ds, 5, 1).unwrap(),
            kfold_splits(&ds, 5, 2).unwrap()
        );
    }

    #[test]
    fn mean_std_behaviour() {
        let (m, s) = mean_std(&[0.5]);
        assert_eq!((m, s), (0.5, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(mean_std(&[]).0.is_nan());
    }

    fn tiny_spec() -> ExperimentSpec {
        serde_json::from_value(serde_json::json!({
            "dataset": {"kind": "checkerboard", "n_samples": 60, "grid": 2, "seed": 2},
            "folds": 3,
            "start": {"mode": "warm", "warm_fraction": 0.2},
            "strategies": [
                {"kind": "random"},
                {"kind": "top_m", "measure": {"name": "entropy"}}
            ],
            "model": {"kind": "ensemble_logistic", "l2": 1e-4, "learning_rate": 0.5,
                       "epochs": 40, "n_estimators": 2},
            "budget": 3,
            "master_seed": 11
        }))
        .unwrap()
    }

    #[test]
    fn experiment_produces_all_cells() {
        let outcome = run_experiment(&tiny_spec()).unwrap();
        assert_eq!(outcome.runs.len(), 6);
        assert!(outcome.runs.iter().all(|r| r.log.is_some()));
        assert_eq!(outcome.summary.strategies.len(), 2);
        assert_eq!(outcome.summary.metric, "balanced_accuracy");
        for s in &outcome.summary.strategies {
            assert_eq!(s.fold_ipauc.len(), 3);
            assert!(s.std_ipauc >= 0.0);
            let vals: Vec<f64> = s.fold_ipauc.iter().flatten().copied().collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(s.mean_ipauc >= lo - 1e-12 && s.mean_ipauc <= hi + 1e-12);
        }
    }

    #[test]
    fn experiment_is_reproducible() {
        let a = run_experiment(&tiny_spec()).unwrap();
        let b = run_experiment(&tiny_spec()).unwrap();
        for (ra, rb) in a.runs.iter().zip(&b.runs) {
            assert_eq!(ra.log, rb.log);
        }
        for (sa, sb) in a.summary.strategies.iter().zip(&b.summary.strategies) {
            assert_eq!(sa.fold_ipauc, sb.fold_ipauc);
        }
    }

    #[test]
    fn same_strategy_same_explicit_seed_gives_identical_columns() {
        let mut spec = tiny_spec();
        spec.strategies = vec![
            serde_json::from_value(serde_json::json!({"kind": "random", "rng_seed": 99})).unwrap(),
            serde_json::from_value(
                serde_json::json!({"kind": "random", "rng_seed": 99, "name": "random_b"}),
            )
            .unwrap(),
        ];
        let outcome = run_experiment(&spec).unwrap();
        let a = &outcome.summary.strategies[0];
        let b = &outcome.summary.strategies[1];
        assert_eq!(a.fold_ipauc, b.fold_ipauc);
        assert_eq!(a.mean_ipauc, b.mean_ipauc);
    }

    #[test]
    fn strategies_share_initial_labels_within_fold() {
        let outcome = run_experiment(&tiny_spec()).unwrap();
        for f in 0..3 {
            let baseline_counts: Vec<usize> = outcome
                .runs
                .iter()
                .filter(|r| r.fold == f)
                .map(|r| r.log.as_ref().unwrap().iterations[0].labelled_count)
                .collect();
            assert!(baseline_counts.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn cold_start_classification_sweep_runs() {
        let mut spec = tiny_spec();
        spec.start = StartSpec {
            mode: StartMode::Cold,
            warm_fraction: 0.1,
        };
        let outcome = run_experiment(&spec).unwrap();
        for r in &outcome.runs {
            let log = r.log.as_ref().unwrap();
            // Cold start: one label per class.
            assert_eq!(log.iterations[0].labelled_count, 2);
        }
    }

    #[test]
    fn parallel_and_sequential_execution_agree() {
        let parallel = run_experiment(&tiny_spec()).unwrap();
        let sequential = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_experiment(&tiny_spec()))
            .unwrap();
        for (a, b) in parallel.runs.iter().zip(&sequential.runs) {
            assert_eq!(a.strategy, b.strategy);
            assert_eq!(a.fold, b.fold);
            assert_eq!(a.log, b.log);
        }
    }

    #[test]
    fn mismatched_model_records_cell_errors_without_aborting() {
        let mut spec = tiny_spec();
        // Regression model on a classification dataset fails per cell.
        spec.model =
            serde_json::from_value(serde_json::json!({"kind": "gp_regressor", "lengthscale": 0.5}))
                .unwrap();
        let outcome = run_experiment(&spec).unwrap();
        assert!(outcome.runs.iter().all(|r| r.error.is_some()));
        for s in &outcome.summary.strategies {
            assert!(s.fold_ipauc.iter().all(Option::is_none));
            assert!(s.mean_ipauc.is_nan());
        }
    }
}
