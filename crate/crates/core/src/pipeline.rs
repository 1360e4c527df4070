//! The active learning cycle: query, annotate, update, retrain, log.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data_manager::{DataManager, DataManagerError};
use crate::dataset::{Dataset, Label};
use crate::model::{evaluate, ModelError, ModelManager, TestMetrics};
use crate::strategy::{QuerySet, Strategy, StrategyError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unlabelled pool is exhausted")]
    PoolExhausted,
    #[error("oracle does not know index {0}")]
    UnknownIndex(usize),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    DataManager(#[from] DataManagerError),
}

/// A full run that failed part-way; everything logged before the failure is
/// preserved.
#[derive(Debug, Error)]
#[error("run aborted at iteration {}: {source}", partial.iterations.len())
]
pub struct RunFailure {
    pub partial: RunLog,
    #[source]
    pub source: PipelineError,
}

/// Label source for queried indices.
#[derive(Debug, Clone)]
pub enum Oracle {
    /// Answers every index with the hidden ground truth of the dataset;
    /// the oracle used for benchmarking strategies.
    Benchmark { dataset: Arc<Dataset> },
}

impl Oracle {
    pub fn benchmark(dataset: Arc<Dataset>) -> Self {
        Oracle::Benchmark { dataset }
    }

    /// Looks up labels for `indices`; a pure lookup for the benchmark kind.
    pub fn annotate(&self, indices: &[usize]) -> Result<Vec<(usize, Label)>, PipelineError> {
        match self {
            Oracle::Benchmark { dataset } => indices
                .iter()
                .map(|&i| {
                    if i < dataset.n_samples() {
                        Ok((i, dataset.label(i)))
                    } else {
                        Err(PipelineError::UnknownIndex(i))
                    }
                })
                .collect(),
        }
    }
}

/// One row of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Indices queried at this iteration; empty for the baseline row.
    pub query_indices: Vec<usize>,
    /// Labelled-set size after this iteration's annotations.
    pub labelled_count: usize,
    /// Test metrics of the model fitted on the post-iteration labelled set.
    pub metrics: TestMetrics,
}

/// Per-iteration history of one run plus an echo of its configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub iterations: Vec<IterationRecord>,
    /// Opaque echo of whatever configuration produced this run.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl RunLog {
    /// The (iteration, metric) curve for one metric name.
    pub fn curve(&self, metric: &str) -> Vec<(f64, f64)> {
        self.iterations
            .iter()
            .filter_map(|rec| rec.metrics.get(metric).map(|v| (rec.k as f64, v)))
            .collect()
    }
}

/// Owns one run: the data manager, model, strategy, and oracle.
pub struct Pipeline {
    mgr: DataManager,
    model: Box<dyn ModelManager>,
    strategy: Strategy,
    oracle: Oracle,
    iteration: usize,
    config_echo: serde_json::Value,
}

impl Pipeline {
    pub fn new(
        mgr: DataManager,
        model: Box<dyn ModelManager>,
        strategy: Strategy,
        oracle: Oracle,
    ) -> Self {
        Self {
            mgr,
            model,
            strategy,
            oracle,
            iteration: 0,
            config_echo: serde_json::Value::Null,
        }
    }

    /// Attaches a configuration echo that ends up in the run log.
    pub fn with_config_echo(mut self, echo: serde_json::Value) -> Self {
        self.config_echo = echo;
        self
    }

    pub fn data_manager(&self) -> &DataManager {
        &self.mgr
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    fn test_metrics(&self) -> Result<TestMetrics, ModelError> {
        let views = self.mgr.subset_views();
        evaluate(
            self.model.as_ref(),
            &views.test_xy,
            self.mgr.dataset().task_kind(),
        )
    }

    /// Fits the model on the initial labelled set and records the `k = 0`
    /// baseline row.
    fn baseline_record(&mut self) -> Result<IterationRecord, PipelineError> {
        let views = self.mgr.subset_views();
        self.model
            .fit(&views.labelled_xy.features, &views.labelled_xy.labels)?;
        Ok(IterationRecord {
            k: 0,
            query_indices: Vec::new(),
            labelled_count: self.mgr.labelled().len(),
            metrics: self.test_metrics()?,
        })
    }

    /// One full cycle: strategy proposes `min(m, pool)` queries, the oracle
    /// labels them, the manager updates, the model refits on the grown set,
    /// and test metrics are recorded.
    ///
    /// On error the data manager, iteration counter, and strategy seed
    /// stream are left exactly as they were (the model may have been
    /// refitted on the unchanged labelled set).
    pub fn step(&mut self, m: usize) -> Result<IterationRecord, PipelineError> {
        if self.mgr.unlabelled().is_empty() {
            return Err(PipelineError::PoolExhausted);
        }
        let rng_before = self.strategy.rng_snapshot();
        let result = self.step_inner(m);
        if result.is_err() {
            self.strategy.restore_rng(rng_before);
        }
        result
    }

    fn step_inner(&mut self, m: usize) -> Result<IterationRecord, PipelineError> {
        let k = self.iteration + 1;
        let query: QuerySet = self.strategy.run(&self.mgr, self.model.as_mut(), m, k)?;
        let annotations = self.oracle.annotate(&query.indices)?;
        self.mgr.apply_annotations(&annotations)?;

        let views = self.mgr.subset_views();
        self.model
            .fit(&views.labelled_xy.features, &views.labelled_xy.labels)?;
        let metrics = self.test_metrics()?;
        self.iteration = k;
        Ok(IterationRecord {
            k,
            query_indices: query.indices,
            labelled_count: self.mgr.labelled().len(),
            metrics,
        })
    }

    /// Runs the cycle until the pool is empty or `budget` iterations are
    /// done. The log always starts with the `k = 0` baseline row.
    pub fn full_run(mut self, m: usize, budget: Option<usize>) -> Result<RunLog, Box<RunFailure>> {
        let mut iterations = Vec::new();
        let fail = |iterations: Vec<IterationRecord>, config: serde_json::Value, source| {
            Box::new(RunFailure {
                partial: RunLog { iterations, config },
                source,
            })
        };

        match self.baseline_record() {
            Ok(record) => iterations.push(record),
            Err(e) => return Err(fail(iterations, self.config_echo, e)),
        }
        let mut steps = 0usize;
        while !self.mgr.unlabelled().is_empty() && budget.is_none_or(|b| steps < b) {
            match self.step(m) {
                Ok(record) => iterations.push(record),
                Err(e) => return Err(fail(iterations, self.config_echo, e)),
            }
            steps += 1;
        }
        Ok(RunLog {
            iterations,
            config: self.config_echo,
        })
    }
}
