//! Pool-based active learning toolkit.
//!
//! Five pieces cooperate in a pool-based active learning run: a [`dataset`]
//! provides the data, a [`data_manager`] tracks the labelled/unlabelled
//! partition, a [`model`] manager exposes posteriors, a [`strategy`] turns
//! [`informativeness`] scores into query sets, and the [`pipeline`]
//! arbitrates the query-annotate-retrain cycle. The [`benchmark`] harness
//! sweeps strategies over cross-validation folds and aggregates IPAUC
//! scores; `cli` exposes it as the `poolside` binary.

// Dense numeric kernels index several arrays in lockstep; plain indexed
// loops read better than zipped iterators there.
#![allow(clippy::needless_range_loop)]

pub use nalgebra;

pub mod benchmark;
pub mod cli;
pub mod data_manager;
pub mod dataset;
pub mod informativeness;
pub mod model;
pub mod pipeline;
pub mod seed;
pub mod strategy;

pub use data_manager::{DataManager, SubsetViews, XySet};
pub use dataset::{Dataset, Label, SplitIndices, StartMode, Targets, TaskConfig, TaskKind};
pub use model::{
    ClassPosterior, GpClassifier, GpHyperparams, GpRegressor, ModelManager, Posterior,
    RegressionPosterior, TestMetrics,
};
pub use pipeline::{Oracle, Pipeline, RunLog};
pub use strategy::{Measure, QuerySet, Strategy, StrategyConfig, StrategyKind};
