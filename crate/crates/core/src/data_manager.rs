//! Bookkeeping of the labelled set and the unlabelled pool over a run.
//!
//! The data manager is the only gateway through which ground-truth labels
//! reach models and strategies: labels enter via [`DataManager::apply_annotations`]
//! (the oracle path) and nothing else, which is the information barrier the
//! benchmark relies on. Validation and test targets stay accessible because
//! those subsets sit outside the learning loop.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::dataset::{Dataset, Label, SplitIndices, Targets, TaskKind};

#[derive(Debug, Error)]
pub enum DataManagerError {
    #[error("initial labelled set is empty")]
    EmptyInitialSet,
    #[error("index {0} is not part of the train subset")]
    NotInTrain(usize),
    #[error("index {0} is unknown to the unlabelled pool")]
    UnknownIndex(usize),
    #[error("index {0} is already labelled")]
    AlreadyLabelled(usize),
    #[error("label {got:?} out of range for task {task:?}")]
    LabelOutOfRange { got: Label, task: TaskKind },
}

/// Features plus labels for one subset, in subset order.
#[derive(Debug, Clone)]
pub struct XySet {
    pub features: DMatrix<f64>,
    pub labels: Vec<Label>,
}

impl XySet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Read-only snapshots of every subset a strategy or model may see.
#[derive(Debug, Clone)]
pub struct SubsetViews {
    /// Labelled train points with their revealed labels, acquisition order.
    pub labelled_xy: XySet,
    /// Features of the unlabelled pool, pool order (no labels).
    pub unlabelled_x: DMatrix<f64>,
    pub validation_xy: XySet,
    pub test_xy: XySet,
}

/// Tracks which train points are labelled, which are still in the pool, and
/// the labels revealed so far.
#[derive(Debug, Clone)]
pub struct DataManager {
    dataset: Arc<Dataset>,
    splits: SplitIndices,
    /// Acquisition order: initial set first, then one batch per iteration.
    labelled: Vec<usize>,
    /// Ascending at construction; removals preserve relative order.
    unlabelled: Vec<usize>,
    revealed: BTreeMap<usize, Label>,
}

impl DataManager {
    /// Starts a run with `initial_labelled ⊆ splits.train` revealed.
    pub fn new(
        dataset: Arc<Dataset>,
        splits: SplitIndices,
        initial_labelled: Vec<usize>,
    ) -> Result<Self, DataManagerError> {
        if initial_labelled.is_empty() {
            return Err(DataManagerError::EmptyInitialSet);
        }
        for &idx in &initial_labelled {
            if !splits.train.contains(&idx) {
                return Err(DataManagerError::NotInTrain(idx));
            }
        }
        let mut revealed = BTreeMap::new();
        for &idx in &initial_labelled {
            if revealed.insert(idx, dataset.label(idx)).is_some() {
                return Err(DataManagerError::AlreadyLabelled(idx));
            }
        }
        let unlabelled: Vec<usize> = splits
            .train
            .iter()
            .copied()
            .filter(|i| !revealed.contains_key(i))
            .collect();
        Ok(Self {
            dataset,
            splits,
            labelled: initial_labelled,
            unlabelled,
            revealed,
        })
    }

    pub fn dataset(&self) -> &Arc<Dataset> {
        &self.dataset
    }

    pub fn splits(&self) -> &SplitIndices {
        &self.splits
    }

    /// Labelled train indices in acquisition order.
    pub fn labelled(&self) -> &[usize] {
        &self.labelled
    }

    /// Unlabelled pool indices; score vectors align with this order.
    pub fn unlabelled(&self) -> &[usize] {
        &self.unlabelled
    }

    pub fn revealed_labels(&self) -> &BTreeMap<usize, Label> {
        &self.revealed
    }

    /// Largest revealed real-valued label, if any (reference point for
    /// improvement-based scores).
    pub fn best_revealed_target(&self) -> Option<f64> {
        self.revealed
            .values()
            .filter_map(|l| match l {
                Label::Real(v) => Some(*v),
                Label::Class(_) => None,
            })
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    /// Moves `annotations` from the pool to the labelled set.
    ///
    /// The whole batch is validated first; any failure leaves the manager
    /// exactly as it was.
    pub fn apply_annotations(
        &mut self,
        annotations: &[(usize, Label)],
    ) -> Result<(), DataManagerError> {
        let task = self.dataset.task_kind();
        let mut batch_seen = BTreeMap::new();
        for &(idx, label) in annotations {
            if self.revealed.contains_key(&idx) || batch_seen.contains_key(&idx) {
                return Err(DataManagerError::AlreadyLabelled(idx));
            }
            if !self.unlabelled.contains(&idx) {
                return Err(DataManagerError::UnknownIndex(idx));
            }
            let valid = match (task, label) {
                (TaskKind::Classification { n_classes }, Label::Class(c)) => c < n_classes,
                (TaskKind::Regression, Label::Real(v)) => v.is_finite(),
                _ => false,
            };
            if !valid {
                return Err(DataManagerError::LabelOutOfRange { got: label, task });
            }
            batch_seen.insert(idx, label);
        }
        for &(idx, label) in annotations {
            self.unlabelled.retain(|&i| i != idx);
            self.labelled.push(idx);
            self.revealed.insert(idx, label);
        }
        Ok(())
    }

    /// Snapshots of every subset; labelled features pair with revealed
    /// labels only, never with hidden ground truth.
    pub fn subset_views(&self) -> SubsetViews {
        let labelled_xy = XySet {
            features: self.dataset.feature_rows(&self.labelled),
            labels: self.labelled.iter().map(|i| self.revealed[i]).collect(),
        };
        SubsetViews {
            labelled_xy,
            unlabelled_x: self.dataset.feature_rows(&self.unlabelled),
            validation_xy: self.ground_truth_view(&self.splits.validation),
            test_xy: self.ground_truth_view(&self.splits.test),
        }
    }

    fn ground_truth_view(&self, indices: &[usize]) -> XySet {
        XySet {
            features: self.dataset.feature_rows(indices),
            labels: indices.iter().map(|&i| self.dataset.label(i)).collect(),
        }
    }
}

/// Extracts real-valued targets from a label list.
pub fn real_labels(labels: &[Label]) -> Option<Vec<f64>> {
    labels
        .iter()
        .map(|l| match l {
            Label::Real(v) => Some(*v),
            Label::Class(_) => None,
        })
        .collect()
}

/// Extracts class targets from a label list.
pub fn class_labels(labels: &[Label]) -> Option<Vec<usize>> {
    labels
        .iter()
        .map(|l| match l {
            Label::Class(c) => Some(*c),
            Label::Real(_) => None,
        })
        .collect()
}

/// Restates the target column as labels for oracle lookups.
pub fn target_as_label(targets: &Targets, index: usize) -> Label {
    match targets {
        Targets::Class(v) => Label::Class(v[index]),
        Targets::Real(v) => Label::Real(v[index]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_checkerboard;

    fn manager() -> DataManager {
        let ds = Arc::new(generate_checkerboard(20, 2, 1).unwrap());
        let splits = SplitIndices::new(
            (0..10).collect(),
            (10..14).collect(),
            (14..20).collect(),
            20,
        )
        .unwrap();
        DataManager::new(ds, splits, vec![0, 1]).unwrap()
    }

    fn label_of(mgr: &DataManager, idx: usize) -> Label {
        mgr.dataset().label(idx)
    }

    #[test]
    fn construction_partitions_train() {
        let mgr = manager();
        assert_eq!(mgr.labelled().len(), 2);
        assert_eq!(mgr.unlabelled().len(), 8);
        assert_eq!(mgr.subset_views().labelled_xy.len(), 2);
    }

    #[test]
    fn initial_equal_to_train_is_legal() {
        let ds = Arc::new(generate_checkerboard(10, 2, 1).unwrap());
        let splits = SplitIndices::new((0..5).collect(), vec![], (5..10).collect(), 10).unwrap();
        let mgr = DataManager::new(ds, splits, (0..5).collect()).unwrap();
        assert!(mgr.unlabelled().is_empty());
    }

    #[test]
    fn rejects_initial_outside_train() {
        let ds = Arc::new(generate_checkerboard(10, 2, 1).unwrap());
        let splits = SplitIndices::new((0..5).collect(), vec![], (5..10).collect(), 10).unwrap();
        assert!(matches!(
            DataManager::new(ds.clone(), splits.clone(), vec![7]),
            Err(DataManagerError::NotInTrain(7))
        ));
        assert!(matches!(
            DataManager::new(ds, splits, vec![]),
            Err(DataManagerError::EmptyInitialSet)
        ));
    }

    #[test]
    fn annotations_move_indices() {
        let mut mgr = manager();
        let batch = vec![(2, label_of(&mgr, 2)), (3, label_of(&mgr, 3))];
        mgr.apply_annotations(&batch).unwrap();
        assert_eq!(mgr.labelled(), &[0, 1, 2, 3]);
        assert_eq!(mgr.unlabelled().len(), 6);
        assert!(!mgr.unlabelled().contains(&2));
    }

    #[test]
    fn duplicate_in_batch_is_atomic() {
        let mut mgr = manager();
        let before = mgr.clone();
        let l = label_of(&mgr, 2);
        let err = mgr.apply_annotations(&[(2, l), (2, l)]).unwrap_err();
        assert!(matches!(err, DataManagerError::AlreadyLabelled(2)));
        assert_eq!(mgr.labelled(), before.labelled());
        assert_eq!(mgr.unlabelled(), before.unlabelled());
        assert_eq!(mgr.revealed_labels(), before.revealed_labels());
    }

    #[test]
    fn out_of_range_class_rejected() {
        let mut mgr = manager();
        let err = mgr.apply_annotations(&[(2, Label::Class(2))]).unwrap_err();
        assert!(matches!(err, DataManagerError::LabelOutOfRange { .. }));
        // Mid-batch failure must roll back earlier entries too.
        let good = label_of(&mgr, 3);
        let err = mgr
            .apply_annotations(&[(3, good), (4, Label::Class(9))])
            .unwrap_err();
        assert!(matches!(err, DataManagerError::LabelOutOfRange { .. }));
        assert_eq!(mgr.labelled().len(), 2);
    }

    #[test]
    fn unknown_and_test_indices_rejected() {
        let mut mgr = manager();
        assert!(matches!(
            mgr.apply_annotations(&[(15, Label::Class(0))]),
            Err(DataManagerError::UnknownIndex(15))
        ));
        assert!(matches!(
            mgr.apply_annotations(&[(0, Label::Class(0))]),
            Err(DataManagerError::AlreadyLabelled(0))
        ));
    }

    #[test]
    fn views_respect_information_barrier() {
        let mut mgr = manager();
        let views = mgr.subset_views();
        assert_eq!(views.labelled_xy.len(), 2);
        assert_eq!(views.unlabelled_x.nrows(), 8);
        assert_eq!(views.test_xy.len(), 6);

        let test_before = views.test_xy.features.clone();
        let batch = vec![(2, label_of(&mgr, 2))];
        mgr.apply_annotations(&batch).unwrap();
        let views = mgr.subset_views();
        assert_eq!(views.test_xy.features, test_before);
        assert_eq!(views.unlabelled_x.nrows(), 7);
    }

    #[test]
    fn partition_invariant_over_random_batches() {
        let mut mgr = manager();
        let train_len = mgr.splits().train.len();
        while !mgr.unlabelled().is_empty() {
            let idx = mgr.unlabelled()[0];
            mgr.apply_annotations(&[(idx, label_of(&mgr, idx))])
                .unwrap();
            assert_eq!(mgr.labelled().len() + mgr.unlabelled().len(), train_len);
            let overlap = mgr.labelled().iter().any(|i| mgr.unlabelled().contains(i));
            assert!(!overlap);
        }
    }
}
