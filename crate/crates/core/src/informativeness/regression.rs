//! Uncertainty and exploitation measures over regression posteriors.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::RegressionPosterior;

use super::{InformativenessError, ScoreVector};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.39894228040143267;

/// Standard normal CDF.
fn norm_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / SQRT_2))
}

/// Standard normal density.
fn norm_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// `I(x) = Var[Y|x]`: the spread of the predictive distribution.
pub fn least_confidence_regression(post: &RegressionPosterior) -> ScoreVector {
    ScoreVector::new(post.variance.clone())
}

/// `I(x) = E[Y|x]`: plain exploitation of high predicted targets.
pub fn greedy_score(post: &RegressionPosterior) -> ScoreVector {
    ScoreVector::new(post.mean.clone())
}

/// Upper confidence bound `I(x) = E[Y|x] + lambda * sqrt(Var[Y|x])`.
pub fn ucb(post: &RegressionPosterior, lambda: f64) -> ScoreVector {
    ScoreVector::new(
        post.mean
            .iter()
            .zip(&post.variance)
            .map(|(m, v)| m + lambda * v.sqrt())
            .collect(),
    )
}

/// Expected improvement over the best observed target `b`:
/// `EI(x) = (mu - b) Phi(z) + sigma phi(z)` with `z = (mu - b)/sigma`, and
/// `max(mu - b, 0)` in the deterministic limit `sigma = 0`.
pub fn expected_improvement(post: &RegressionPosterior, best_observed: f64) -> ScoreVector {
    ScoreVector::new(
        post.mean
            .iter()
            .zip(&post.variance)
            .map(|(&mu, &var)| {
                let sigma = var.sqrt();
                if sigma > 0.0 {
                    let z = (mu - best_observed) / sigma;
                    ((mu - best_observed) * norm_cdf(z) + sigma * norm_pdf(z)).max(0.0)
                } else {
                    (mu - best_observed).max(0.0)
                }
            })
            .collect(),
    )
}

/// Variance floored here so the Gaussian entropy stays finite; any floor
/// below realistic variances preserves the argmax.
const BALD_VARIANCE_FLOOR: f64 = 1e-300;

/// Disagreement score under a Gaussian predictive: the entropy
/// `1/2 ln(2 pi e var)`, a monotone map of the variance, so its argmax
/// always coincides with the least-confidence argmax.
pub fn bald_regression(post: &RegressionPosterior) -> ScoreVector {
    let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
    ScoreVector::new(
        post.variance
            .iter()
            .map(|&v| 0.5 * (two_pi_e * v.max(BALD_VARIANCE_FLOOR)).ln())
            .collect(),
    )
}

/// Draws one ensemble member uniformly (seeded) and scores every point with
/// that member's predictions.
pub fn thompson_sampling(
    post: &RegressionPosterior,
    seed: u64,
) -> Result<ScoreVector, InformativenessError> {
    let members = post
        .members
        .as_ref()
        .ok_or(InformativenessError::MissingMembers)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = rng.random_range(0..members.nrows());
    Ok(ScoreVector::new(
        members.row(pick).iter().copied().collect(),
    ))
}
