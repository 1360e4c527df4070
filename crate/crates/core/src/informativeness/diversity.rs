//! Diversity measures on feature geometry.

use nalgebra::DMatrix;

use super::kmeans::kmeans;
use super::{DistanceConfig, InformativenessError, ScoreVector};

/// Minimum distance from each unlabelled point to the labelled set:
/// `I(x) = min_{l in L} d(phi(x), phi(l))`. Zero exactly when the point
/// coincides with a labelled point.
pub fn relative_distance(
    unlabelled_x: &DMatrix<f64>,
    labelled_x: &DMatrix<f64>,
    _cfg: &DistanceConfig,
) -> Result<ScoreVector, InformativenessError> {
    if labelled_x.nrows() == 0 {
        return Err(InformativenessError::EmptyLabelledSet);
    }
    assert_eq!(
        unlabelled_x.ncols(),
        labelled_x.ncols(),
        "feature dimensions must match"
    );
    let d = unlabelled_x.ncols();
    Ok(ScoreVector::new(
        (0..unlabelled_x.nrows())
            .map(|i| {
                (0..labelled_x.nrows())
                    .map(|l| {
                        (0..d)
                            .map(|j| (unlabelled_x[(i, j)] - labelled_x[(l, j)]).powi(2))
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            })
            .collect(),
    ))
}

/// Clusters the pool into `n_representatives` groups and returns one
/// representative position per cluster: the member nearest its centroid,
/// lowest position on ties. If some clusters come back empty, the deficit is
/// filled with the next-nearest-to-centroid members of the largest clusters.
/// Returns exactly `n_representatives` distinct positions, sorted ascending.
pub fn representative_sampling(
    unlabelled_x: &DMatrix<f64>,
    n_representatives: usize,
    seed: u64,
) -> Result<Vec<usize>, InformativenessError> {
    let pool = unlabelled_x.nrows();
    if n_representatives == 0 || n_representatives > pool {
        return Err(InformativenessError::BadRepresentativeCount {
            got: n_representatives,
            pool,
        });
    }
    if n_representatives == pool {
        return Ok((0..pool).collect());
    }

    let out = kmeans(unlabelled_x, n_representatives, seed);
    let dist_to_own_centroid = |i: usize| -> f64 {
        (0..unlabelled_x.ncols())
            .map(|j| (unlabelled_x[(i, j)] - out.centroids[(out.assignments[i], j)]).powi(2))
            .sum()
    };

    // Members per cluster, each sorted by (distance to centroid, position).
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); n_representatives];
    for i in 0..pool {
        clusters[out.assignments[i]].push(i);
    }
    for members in &mut clusters {
        members.sort_by(|&a, &b| {
            dist_to_own_centroid(a)
                .partial_cmp(&dist_to_own_centroid(b))
                .unwrap()
                .then(a.cmp(&b))
        });
    }

    let mut chosen: Vec<usize> = clusters
        .iter()
        .filter_map(|members| members.first().copied())
        .collect();

    // Empty clusters leave a deficit; walk clusters from largest down and
    // take their next-nearest members.
    if chosen.len() < n_representatives {
        let mut order: Vec<usize> = (0..n_representatives).collect();
        order.sort_by(|&a, &b| clusters[b].len().cmp(&clusters[a].len()).then(a.cmp(&b)));
        let mut depth = 1;
        while chosen.len() < n_representatives {
            let mut advanced = false;
            for &c in &order {
                if chosen.len() == n_representatives {
                    break;
                }
                if let Some(&candidate) = clusters[c].get(depth) {
                    chosen.push(candidate);
                    advanced = true;
                }
            }
            depth += 1;
            if !advanced {
                break;
            }
        }
    }
    chosen.sort_unstable();
    chosen.dedup();
    debug_assert_eq!(chosen.len(), n_representatives);
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coincident_point_scores_zero() {
        let labelled = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let pool = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.5, 0.5]);
        let s = relative_distance(&pool, &labelled, &DistanceConfig::default()).unwrap();
        assert_relative_eq!(s.scores()[0], 0.0);
        assert!(s.scores()[1] > 0.0);
    }

    #[test]
    fn three_four_five_triangle() {
        let labelled = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let pool = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let s = relative_distance(&pool, &labelled, &DistanceConfig::default()).unwrap();
        assert_relative_eq!(s.scores()[0], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn matches_exhaustive_min_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pool = DMatrix::from_fn(40, 3, |_, _| rng.random_range(-1.0..1.0));
        let labelled = DMatrix::from_fn(10, 3, |_, _| rng.random_range(-1.0..1.0));
        let s = relative_distance(&pool, &labelled, &DistanceConfig::default()).unwrap();
        for i in 0..40 {
            let mut best = f64::INFINITY;
            for l in 0..10 {
                let d: f64 = (0..3)
                    .map(|j| (pool[(i, j)] - labelled[(l, j)]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
            assert_relative_eq!(s.scores()[i], best, epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_labelled_set_rejected() {
        let pool = DMatrix::from_row_slice(1, 1, &[0.0]);
        let labelled = DMatrix::zeros(0, 1);
        assert!(matches!(
            relative_distance(&pool, &labelled, &DistanceConfig::default()),
            Err(InformativenessError::EmptyLabelledSet)
        ));
    }

    #[test]
    fn full_pool_request_returns_everything() {
        let pool = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        let picked = representative_sampling(&pool, 3, 0).unwrap();
        assert_eq!(picked, vec![0, 1, 2]);
    }

    #[test]
    fn one_representative_per_separated_blob() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pool = DMatrix::from_fn(30, 1, |i, _| {
            let centre = if i % 2 == 0 { -10.0 } else { 10.0 };
            centre + rng.random_range(-0.3..0.3)
        });
        let picked = representative_sampling(&pool, 2, 4).unwrap();
        assert_eq!(picked.len(), 2);
        let sides: Vec<bool> = picked.iter().map(|&i| pool[(i, 0)] > 0.0).collect();
        assert_ne!(sides[0], sides[1]);
    }

    #[test]
    fn counts_validated() {
        let pool = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        assert!(matches!(
            representative_sampling(&pool, 4, 0),
            Err(InformativenessError::BadRepresentativeCount { got: 4, pool: 3 })
        ));
        assert!(matches!(
            representative_sampling(&pool, 0, 0),
            Err(InformativenessError::BadRepresentativeCount { got: 0, .. })
        ));
    }

    #[test]
    fn duplicates_never_returned() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..20 {
            let n = rng.random_range(5..30);
            let pool = DMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
            let k = rng.random_range(1..=n);
            let picked = representative_sampling(&pool, k, trial).unwrap();
            assert_eq!(picked.len(), k);
            let mut dedup = picked.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), k);
            assert!(picked.iter().all(|&p| p < n));
        }
    }
}
