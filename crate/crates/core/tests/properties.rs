//! Property tests for the toolkit's structural invariants.

use nalgebra::DMatrix;
use proptest::prelude::*;

use poolside::benchmark::ipauc;
use poolside::dataset::{generate_checkerboard, split};
use poolside::informativeness::{
    bald_regression, entropy, expected_improvement, greedy_score, least_confidence_classification,
    least_confidence_regression, margin_confidence, ratio_confidence, relative_distance, ucb,
    DistanceConfig, ScoreVector,
};
use poolside::strategy::select_top_m;
use poolside::{ClassPosterior, RegressionPosterior};

fn simplex_rows(n: usize, k: usize) -> impl Strategy<Value = ClassPosterior> {
    proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, k), n).prop_map(move |rows| {
        let mut probs = DMatrix::zeros(rows.len(), k);
        for (i, row) in rows.iter().enumerate() {
            let total: f64 = row.iter().sum();
            for (j, v) in row.iter().enumerate() {
                probs[(i, j)] = v / total;
            }
        }
        ClassPosterior {
            probs,
            members: None,
        }
    })
}

fn regression_posterior(n: usize) -> impl Strategy<Value = RegressionPosterior> {
    (
        proptest::collection::vec(-3.0f64..3.0, n),
        proptest::collection::vec(0.0f64..4.0, n),
    )
        .prop_map(|(mean, variance)| RegressionPosterior {
            mean,
            variance,
            members: None,
        })
}

fn permuted<T: Clone>(items: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&p| items[p].clone()).collect()
}

proptest! {
    /// Permuting the pool permutes every score vector identically.
    #[test]
    fn classification_measures_are_permutation_equivariant(
        post in simplex_rows(8, 4),
        perm in Just(()).prop_perturb(|_, mut rng| {
            let mut p: Vec<usize> = (0..8).collect();
            for i in (1..8).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                p.swap(i, j);
            }
            p
        }),
    ) {
        let shuffled = ClassPosterior {
            probs: DMatrix::from_fn(8, 4, |i, j| post.probs[(perm[i], j)]),
            members: None,
        };
        type MeasureFn = fn(&ClassPosterior) -> ScoreVector;
        let measures: [(MeasureFn, &str); 2] = [
            (entropy, "entropy"),
            (least_confidence_classification, "least_confidence"),
        ];
        for (f, name) in measures {
            let base = f(&post).into_vec();
            let moved = f(&shuffled).into_vec();
            prop_assert_eq!(&moved, &permuted(&base, &perm), "{}", name);
        }
        let base = margin_confidence(&post).unwrap().into_vec();
        let moved = margin_confidence(&shuffled).unwrap().into_vec();
        prop_assert_eq!(moved, permuted(&base, &perm));
        let base = ratio_confidence(&post).unwrap().into_vec();
        let moved = ratio_confidence(&shuffled).unwrap().into_vec();
        prop_assert_eq!(moved, permuted(&base, &perm));
    }

    /// Uncertainty measures peak on the uniform row and bottom out on
    /// one-hot rows.
    #[test]
    fn uncertainty_extremes(post in simplex_rows(6, 3)) {
        let k = 3;
        let mut probs = post.probs.clone();
        // Append a uniform and a one-hot row.
        probs = probs.insert_row(6, 1.0 / k as f64);
        probs = probs.insert_row(7, 0.0);
        probs[(7, 0)] = 1.0;
        let post = ClassPosterior { probs, members: None };

        for scores in [
            entropy(&post),
            least_confidence_classification(&post),
            margin_confidence(&post).unwrap(),
            ratio_confidence(&post).unwrap(),
        ] {
            let s = scores.scores();
            let uniform = s[6];
            let one_hot = s[7];
            for &v in s {
                prop_assert!(v <= uniform + 1e-12);
                prop_assert!(v >= one_hot - 1e-12);
            }
            prop_assert!(one_hot.abs() < 1e-12);
        }
    }

    /// UCB at lambda 0 degenerates to the greedy score; BALD shares the
    /// variance argmax.
    #[test]
    fn regression_measure_identities(post in regression_posterior(12)) {
        let ucb0 = ucb(&post, 0.0);
        let greedy = greedy_score(&post);
        prop_assert_eq!(ucb0.argmax(), greedy.argmax());
        prop_assert_eq!(ucb0.scores(), greedy.scores());

        let strictly_positive = RegressionPosterior {
            mean: post.mean.clone(),
            variance: post.variance.iter().map(|v| v + 1e-6).collect(),
            members: None,
        };
        prop_assert_eq!(
            bald_regression(&strictly_positive).argmax(),
            least_confidence_regression(&strictly_positive).argmax()
        );
    }

    /// EI is nonnegative everywhere and non-decreasing in sigma at fixed
    /// mean and reference.
    #[test]
    fn expected_improvement_shape(
        mu in -2.0f64..2.0,
        best in -2.0f64..2.0,
        sigmas in proptest::collection::vec(0.0f64..3.0, 2..10),
    ) {
        let mut sigmas = sigmas;
        sigmas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let post = RegressionPosterior {
            mean: vec![mu; sigmas.len()],
            variance: sigmas.iter().map(|s| s * s).collect(),
            members: None,
        };
        let scores = expected_improvement(&post, best);
        let s = scores.scores();
        for w in s.windows(2) {
            prop_assert!(w[0] >= 0.0);
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }

    /// A labelled point inserted into the pool scores exactly zero
    /// relative distance.
    #[test]
    fn relative_distance_zero_for_labelled_points(
        coords in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..12),
        insert_at in 0usize..3,
    ) {
        let labelled = DMatrix::from_fn(coords.len(), 2, |i, j| {
            if j == 0 { coords[i].0 } else { coords[i].1 }
        });
        let insert_at = insert_at.min(coords.len() - 1);
        let mut pool_rows = vec![(coords[insert_at].0, coords[insert_at].1)];
        pool_rows.push((coords[0].0 + 1.0, coords[0].1 - 1.0));
        let pool = DMatrix::from_fn(pool_rows.len(), 2, |i, j| {
            if j == 0 { pool_rows[i].0 } else { pool_rows[i].1 }
        });
        let scores = relative_distance(&pool, &labelled, &DistanceConfig::default()).unwrap();
        prop_assert_eq!(scores.scores()[0], 0.0);
    }

    /// Top-m selection only depends on the score ordering.
    #[test]
    fn top_m_is_order_invariant(
        values in proptest::collection::vec(-10.0f64..10.0, 4..30),
        m in 1usize..8,
        scale in 0.1f64..5.0,
        shift in -3.0f64..3.0,
    ) {
        let pool: Vec<usize> = (0..values.len()).collect();
        let base = select_top_m(&ScoreVector::new(values.clone()), &pool, m).unwrap();
        let transformed: Vec<f64> = values.iter().map(|v| v * scale + shift).collect();
        let again = select_top_m(&ScoreVector::new(transformed), &pool, m).unwrap();
        prop_assert_eq!(base.indices, again.indices);
    }

    /// IPAUC of a constant curve equals the constant for any strictly
    /// increasing iteration spacing.
    #[test]
    fn ipauc_constant_for_any_spacing(
        gaps in proptest::collection::vec(0.1f64..5.0, 1..20),
        level in -2.0f64..2.0,
    ) {
        let mut k = 0.0;
        let mut curve = vec![(0.0, level)];
        for g in gaps {
            k += g;
            curve.push((k, level));
        }
        let value = ipauc(&curve).unwrap();
        prop_assert!((value - level).abs() < 1e-12);
    }

    /// Splits partition the sample range for any valid fraction triple.
    #[test]
    fn split_always_partitions(
        n in 10usize..120,
        train_w in 1u32..8,
        val_w in 0u32..4,
        test_w in 1u32..8,
        seed in 0u64..1000,
    ) {
        let total = f64::from(train_w + val_w + test_w);
        let fractions = (
            f64::from(train_w) / total,
            f64::from(val_w) / total,
            f64::from(test_w) / total,
        );
        let ds = generate_checkerboard(n.max(16), 2, seed).unwrap();
        let s = split(&ds, fractions, seed, false).unwrap();
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.validation)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort_unstable();
        let expected: Vec<usize> = (0..ds.n_samples()).collect();
        prop_assert_eq!(all, expected);
        prop_assert!(!s.train.is_empty() && !s.test.is_empty());
    }
}
