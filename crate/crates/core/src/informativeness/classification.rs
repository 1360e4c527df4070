//! Uncertainty measures over class-probability posteriors.
//!
//! Natural logarithms throughout, with `0 * ln 0 = 0`.

use crate::model::ClassPosterior;

use super::{InformativenessError, ScoreVector};

fn row_entropy(row: impl Iterator<Item = f64>) -> f64 {
    row.map(|p| if p > 0.0 { -p * p.ln() } else { 0.0 }).sum()
}

/// Shannon entropy of each probability row: `I(x) = -sum_y p(y|x) ln p(y|x)`.
pub fn entropy(post: &ClassPosterior) -> ScoreVector {
    ScoreVector::new(
        (0..post.len())
            .map(|i| row_entropy(post.probs.row(i).iter().copied()))
            .collect(),
    )
}

/// `I(x) = 1 - max_y p(y|x)`; zero for one-hot rows, `1 - 1/K` for uniform.
pub fn least_confidence_classification(post: &ClassPosterior) -> ScoreVector {
    ScoreVector::new(
        (0..post.len())
            .map(|i| 1.0 - post.probs.row(i).iter().copied().fold(0.0, f64::max))
            .collect(),
    )
}

/// Highest and second-highest probabilities of a row.
fn top_two(post: &ClassPosterior, i: usize) -> (f64, f64) {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &p in post.probs.row(i).iter() {
        if p > first {
            second = first;
            first = p;
        } else if p > second {
            second = p;
        }
    }
    (first, second)
}

/// Margin confidence `I(x) = 1 - (p(y0|x) - p(y1|x))` for the top two
/// classes `y0, y1`.
pub fn margin_confidence(post: &ClassPosterior) -> Result<ScoreVector, InformativenessError> {
    if post.n_classes() < 2 {
        return Err(InformativenessError::SingleClass);
    }
    Ok(ScoreVector::new(
        (0..post.len())
            .map(|i| {
                let (first, second) = top_two(post, i);
                1.0 - (first - second)
            })
            .collect(),
    ))
}

/// Ratio confidence `I(x) = p(y1|x) / p(y0|x)` for the top two classes.
/// The value does not depend on how ties for `y0` are broken.
pub fn ratio_confidence(post: &ClassPosterior) -> Result<ScoreVector, InformativenessError> {
    if post.n_classes() < 2 {
        return Err(InformativenessError::SingleClass);
    }
    Ok(ScoreVector::new(
        (0..post.len())
            .map(|i| {
                let (first, second) = top_two(post, i);
                second / first
            })
            .collect(),
    ))
}

/// Mutual information between the prediction and the ensemble member:
/// `I(x) = H(mean over members) - mean over members of H`.
///
/// Requires the per-member probability decomposition; identical members give
/// zero disagreement.
pub fn bald_classification(post: &ClassPosterior) -> Result<ScoreVector, InformativenessError> {
    let members = post
        .members
        .as_ref()
        .ok_or(InformativenessError::MissingMembers)?;
    let m = members.len() as f64;
    Ok(ScoreVector::new(
        (0..post.len())
            .map(|i| {
                let mean_entropy = row_entropy(post.probs.row(i).iter().copied());
                let avg_member_entropy: f64 = members
                    .iter()
                    .map(|p| row_entropy(p.row(i).iter().copied()))
                    .sum::<f64>()
                    / m;
                mean_entropy - avg_member_entropy
            })
            .collect(),
    ))
}
