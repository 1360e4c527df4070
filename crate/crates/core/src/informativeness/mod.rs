//! Informativeness measures: per-point scores estimating the value of
//! labelling each unlabelled pool member.
//!
//! Uncertainty measures map a model posterior to scores; diversity measures
//! work on feature geometry alone. Every function is pure given its inputs
//! (seeded where stochastic), and every score vector aligns element-wise
//! with the unlabelled order of the data manager that produced the inputs.

mod classification;
mod diversity;
mod kmeans;
mod regression;

pub use classification::{
    bald_classification, entropy, least_confidence_classification, margin_confidence,
    ratio_confidence,
};
pub use diversity::{relative_distance, representative_sampling};
pub use kmeans::{kmeans, KMeansOutcome};
pub use regression::{
    bald_regression, expected_improvement, greedy_score, least_confidence_regression,
    thompson_sampling, ucb,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InformativenessError {
    #[error("posterior needs at least two classes")]
    SingleClass,
    #[error("posterior lacks the per-member decomposition this measure needs")]
    MissingMembers,
    #[error("labelled set is empty")]
    EmptyLabelledSet,
    #[error("representative count must be in 1..={pool}, got {got}")]
    BadRepresentativeCount { got: usize, pool: usize },
}

/// Per-point informativeness values, aligned with the unlabelled pool order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Self {
        debug_assert!(
            scores.iter().all(|s| s.is_finite()),
            "scores must be finite"
        );
        Self { scores }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Position of the highest score, lowest position on ties.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &s) in self.scores.iter().enumerate() {
            match best {
                Some(b) if self.scores[b] >= s => {}
                _ => best = Some(i),
            }
        }
        best
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.scores
    }
}

/// Distance computation settings for the diversity measures. Both fields are
/// extension points; Euclidean distance in the ambient feature space is the
/// only shipped combination.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DistanceConfig {
    pub metric: DistanceMetric,
    pub embedding: Embedding,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DistanceMetric {
    #[default]
    Euclidean,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Embedding {
    #[default]
    Identity,
}
