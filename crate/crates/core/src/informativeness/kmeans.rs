//! Seeded k-means with k-means++ initialization and Lloyd refinement.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MAX_LLOYD_ITERS: usize = 100;

/// Clustering of the rows of a point matrix.
#[derive(Debug, Clone)]
pub struct KMeansOutcome {
    /// Cluster id per point.
    pub assignments: Vec<usize>,
    /// Centroid rows (k x d). A cluster that lost all members keeps its last
    /// centroid.
    pub centroids: DMatrix<f64>,
    /// Sum of squared distances to assigned centroids.
    pub objective: f64,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    (0..points.ncols())
        .map(|j| (points[(i, j)] - centroids[(c, j)]).powi(2))
        .sum()
}

/// Runs k-means++ initialization followed by at most 100 Lloyd iterations.
///
/// Panics if `k` is zero or exceeds the number of points.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> KMeansOutcome {
    let n = points.nrows();
    assert!(k >= 1 && k <= n, "k = {k} out of range for {n} points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++: first centre uniform, then D^2-weighted draws.
    let mut centre_rows: Vec<usize> = vec![rng.random_range(0..n)];
    let mut min_sq: Vec<f64> = (0..n)
        .map(|i| {
            (0..points.ncols())
                .map(|j| (points[(i, j)] - points[(centre_rows[0], j)]).powi(2))
                .sum()
        })
        .collect();
    while centre_rows.len() < k {
        let total: f64 = min_sq.iter().sum();
        let next = if total > 0.0 {
            WeightedIndex::new(&min_sq)
                .map(|dist| dist.sample(&mut rng))
                .unwrap_or_else(|_| lowest_unused(&centre_rows, n))
        } else {
            // All points coincide with existing centres; take the lowest
            // index not already chosen so centres stay distinct positions.
            lowest_unused(&centre_rows, n)
        };
        centre_rows.push(next);
        for i in 0..n {
            let d: f64 = (0..points.ncols())
                .map(|j| (points[(i, j)] - points[(next, j)]).powi(2))
                .sum();
            if d < min_sq[i] {
                min_sq[i] = d;
            }
        }
    }
    let mut centroids = DMatrix::from_fn(k, points.ncols(), |c, j| points[(centre_rows[c], j)]);

    // Sentinel assignments force a centroid update on the first pass.
    let mut assignments = vec![usize::MAX; n];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0;
            let mut best_d = sq_dist(points, i, &centroids, 0);
            for c in 1..k {
                let d = sq_dist(points, i, &centroids, c);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        let mut sums: DMatrix<f64> = DMatrix::zeros(k, points.ncols());
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assignments[i]] += 1;
            for j in 0..points.ncols() {
                sums[(assignments[i], j)] += points[(i, j)];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..points.ncols() {
                    centroids[(c, j)] = sums[(c, j)] / counts[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let objective = (0..n)
        .map(|i| sq_dist(points, i, &centroids, assignments[i]))
        .sum();
    KMeansOutcome {
        assignments,
        centroids,
        objective,
    }
}

fn lowest_unused(used: &[usize], n: usize) -> usize {
    (0..n)
        .find(|i| !used.contains(i))
        .expect("k <= n leaves an unused row")
}
