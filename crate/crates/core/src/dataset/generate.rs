//! Synthetic dataset generators.
//!
//! All generators are pure functions of their arguments: the same seed gives
//! a bit-identical dataset on every platform (ChaCha8 streams, no ambient
//! RNG state).

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError};

/// Binary checkerboard classification over the unit square.
///
/// Features are uniform in `[0,1]^2`; the label of a point is the parity of
/// its cell, `(floor(x1*grid) + floor(x2*grid)) mod 2`, for a `grid x grid`
/// board (grid 2 or 4).
pub fn generate_checkerboard(
    n_samples: usize,
    grid: usize,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    if grid != 2 && grid != 4 {
        return Err(DatasetError::InvalidGrid(grid));
    }
    if n_samples < grid * grid {
        return Err(DatasetError::TooFewSamples {
            needed: grid * grid,
            got: n_samples,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = DMatrix::zeros(n_samples, 2);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x1: f64 = rng.random_range(0.0..1.0);
        let x2: f64 = rng.random_range(0.0..1.0);
        features[(i, 0)] = x1;
        features[(i, 1)] = x2;
        labels.push(checkerboard_label(x1, x2, grid));
    }
    Dataset::classification(format!("checkerboard{grid}x{grid}"), features, labels, 2)
}

/// Closed-form checkerboard cell parity; exposed so labels can be recomputed
/// independently of the generator.
pub(crate) fn checkerboard_label(x1: f64, x2: f64, grid: usize) -> usize {
    let cell = |v: f64| ((v * grid as f64) as usize).min(grid - 1);
    (cell(x1) + cell(x2)) % 2
}

/// Isotropic Gaussian clouds, one class per cloud.
///
/// Cloud means sit on the vertices of a regular simplex with edge length
/// `4 * overlap_sigma`, so the overlap between neighbouring clouds is
/// controlled by a single knob. The feature dimension equals `n_clouds`
/// (the simplex is embedded via centred unit vectors).
pub fn generate_gaussian_clouds(
    n_samples: usize,
    n_clouds: usize,
    overlap_sigma: f64,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    if n_clouds < 2 {
        return Err(DatasetError::TooFewClouds(n_clouds));
    }
    if n_samples < n_clouds {
        return Err(DatasetError::TooFewSamples {
            needed: n_clouds,
            got: n_samples,
        });
    }
    if !(overlap_sigma.is_finite() && overlap_sigma > 0.0) {
        return Err(DatasetError::NonFinite("overlap_sigma"));
    }
    let means = simplex_means(n_clouds, 4.0 * overlap_sigma);
    let d = n_clouds;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = DMatrix::zeros(n_samples, d);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let class = i % n_clouds;
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            features[(i, j)] = means[(class, j)] + overlap_sigma * z;
        }
        labels.push(class);
    }
    Dataset::classification("gaussian_clouds", features, labels, n_clouds)
}

/// Vertices of a regular simplex with `k` points and the given edge length,
/// centred at the origin of `R^k`.
pub(crate) fn simplex_means(k: usize, edge: f64) -> DMatrix<f64> {
    // Centred unit vectors e_i - 1/k have pairwise distance sqrt(2); rescale.
    let scale = edge / 2.0_f64.sqrt();
    DMatrix::from_fn(k, k, |i, j| {
        let e = if i == j { 1.0 } else { 0.0 };
        scale * (e - 1.0 / k as f64)
    })
}

/// One-dimensional synthetic regression targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionVariant {
    /// Smooth target: `y = sin(6x)` on `[0,1]`.
    SynthReg1,
    /// Discontinuous target: a 4-level step function on `[0,1]`.
    SynthReg2,
}

impl RegressionVariant {
    /// Noise-free target value at `x`.
    pub fn target(&self, x: f64) -> f64 {
        match self {
            RegressionVariant::SynthReg1 => (6.0 * x).sin(),
            RegressionVariant::SynthReg2 => {
                const LEVELS: [f64; 4] = [0.0, 2.0, -1.0, 3.0];
                LEVELS[((x * 4.0) as usize).min(3)]
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegressionVariant::SynthReg1 => "synth_reg1",
            RegressionVariant::SynthReg2 => "synth_reg2",
        }
    }
}

/// Samples `x` uniform on `[0,1]` and sets `y = f(x) + noise_sd * z` with
/// standard normal `z`.
pub fn generate_synth_regression(
    variant: RegressionVariant,
    n_samples: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    if n_samples < 10 {
        return Err(DatasetError::TooFewSamples {
            needed: 10,
            got: n_samples,
        });
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(DatasetError::InvalidNoise(noise_sd));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = DMatrix::zeros(n_samples, 1);
    let mut targets = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x: f64 = rng.random_range(0.0..1.0);
        let z: f64 = rng.sample(StandardNormal);
        features[(i, 0)] = x;
        targets.push(variant.target(x) + noise_sd * z);
    }
    Dataset::regression(variant.name(), features, targets)
}
