//! Test-set metrics: balanced accuracy for classification, mean squared
//! error for regression.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data_manager::XySet;
use crate::dataset::{Label, TaskKind};

use super::{ModelError, ModelManager, Posterior};

pub const BALANCED_ACCURACY: &str = "balanced_accuracy";
pub const MSE: &str = "mse";

/// Named metric values for one evaluation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TestMetrics {
    values: BTreeMap<String, f64>,
}

impl TestMetrics {
    pub fn singleton(name: &str, value: f64) -> Self {
        let mut values = BTreeMap::new();
        values.insert(name.to_owned(), value);
        Self { values }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Mean per-class recall over the classes present in the evaluation set.
pub fn balanced_accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    let mut per_class: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        let entry = per_class.entry(t).or_insert((0, 0));
        entry.1 += 1;
        if p == t {
            entry.0 += 1;
        }
    }
    let recalls: Vec<f64> = per_class
        .values()
        .map(|&(hit, total)| hit as f64 / total as f64)
        .collect();
    recalls.iter().sum::<f64>() / recalls.len() as f64
}

/// Mean squared residual of the posterior mean.
pub fn mean_squared_error(predicted_mean: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(predicted_mean.len(), truth.len());
    predicted_mean
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / truth.len() as f64
}

/// Predicted class per row: the argmax of the probability row, lowest class
/// id on ties.
pub fn argmax_classes(probs: &nalgebra::DMatrix<f64>) -> Vec<usize> {
    (0..probs.nrows())
        .map(|i| {
            let mut best = 0;
            for j in 1..probs.ncols() {
                if probs[(i, j)] > probs[(i, best)] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Fits nothing: predicts `eval_xy` with the given model and reports the
/// task's test metric.
pub fn evaluate(
    model: &dyn ModelManager,
    eval_xy: &XySet,
    task: TaskKind,
) -> Result<TestMetrics, ModelError> {
    if eval_xy.is_empty() {
        return Err(ModelError::EmptyEvalSet);
    }
    let posterior = model.predict(&eval_xy.features)?;
    match (task, posterior) {
        (TaskKind::Classification { .. }, Posterior::Classification(post)) => {
            let truth: Vec<usize> = eval_xy
                .labels
                .iter()
                .map(|l| match l {
                    Label::Class(c) => Ok(*c),
                    Label::Real(_) => Err(ModelError::LabelKindMismatch),
                })
                .collect::<Result<_, _>>()?;
            let predicted = argmax_classes(&post.probs);
            Ok(TestMetrics::singleton(
                BALANCED_ACCURACY,
                balanced_accuracy(&predicted, &truth),
            ))
        }
        (TaskKind::Regression, Posterior::Regression(post)) => {
            let truth: Vec<f64> = eval_xy
                .labels
                .iter()
                .map(|l| match l {
                    Label::Real(v) => Ok(*v),
                    Label::Class(_) => Err(ModelError::LabelKindMismatch),
                })
                .collect::<Result<_, _>>()?;
            Ok(TestMetrics::singleton(
                MSE,
                mean_squared_error(&post.mean, &truth),
            ))
        }
        _ => Err(ModelError::LabelKindMismatch),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn perfect_predictions_score_one() {
        assert_relative_eq!(balanced_accuracy(&[0, 1, 2], &[0, 1, 2]), 1.0);
    }

    #[test]
    fn recall_mix_averages() {
        // Class 0 recall 1.0 (2/2), class 1 recall 0.5 (1/2).
        let predicted = [0, 0, 1, 0];
        let truth = [0, 0, 1, 1];
        assert_relative_eq!(balanced_accuracy(&predicted, &truth), 0.75);
    }

    #[test]
    fn absent_classes_are_excluded() {
        // Only classes 0 and 2 appear in the truth.
        let predicted = [0, 2, 2];
        let truth = [0, 2, 2];
        assert_relative_eq!(balanced_accuracy(&predicted, &truth), 1.0);
    }

    #[test]
    fn zero_variance_targets_give_zero_mse() {
        assert_relative_eq!(mean_squared_error(&[3.0, 3.0], &[3.0, 3.0]), 0.0);
        assert_relative_eq!(mean_squared_error(&[1.0, 2.0], &[0.0, 0.0]), 2.5);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let probs = nalgebra::DMatrix::from_row_slice(1, 3, &[0.4, 0.4, 0.2]);
        assert_eq!(argmax_classes(&probs), vec![0]);
    }
}
