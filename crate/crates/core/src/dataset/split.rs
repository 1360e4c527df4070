//! Train/validation/test splitting and initial-label selection.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, DatasetError, SplitIndices, StartMode, Targets, TaskConfig, TaskKind};

/// Splits `0..n_samples` into train/validation/test index sets.
///
/// Fractions must sum to 1 (within 1e-9) with `train > 0` and `test > 0`.
/// With `stratified` set (classification only), per-class proportions are
/// preserved within one sample per class per subset. Deterministic per seed;
/// returned index sets are sorted ascending.
pub fn split(
    dataset: &Dataset,
    fractions: (f64, f64, f64),
    seed: u64,
    stratified: bool,
) -> Result<SplitIndices, DatasetError> {
    let (f_train, f_val, f_test) = fractions;
    if !(f_train > 0.0 && f_test > 0.0 && f_val >= 0.0) {
        return Err(DatasetError::InvalidFractions);
    }
    let sum = f_train + f_val + f_test;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(DatasetError::FractionSum(sum));
    }
    let n = dataset.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut train, mut val, mut test) = if stratified {
        let Targets::Class(labels) = dataset.targets() else {
            return Err(DatasetError::InvalidFractions);
        };
        let non_empty = [f_train, f_val, f_test]
            .iter()
            .filter(|f| **f > 0.0)
            .count();
        let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (idx, &class) in labels.iter().enumerate() {
            by_class.entry(class).or_default().push(idx);
        }
        for (&class, members) in &by_class {
            if members.len() < non_empty {
                return Err(DatasetError::StratifyTooSmall {
                    class,
                    got: members.len(),
                    subsets: non_empty,
                });
            }
        }
        let mut train = Vec::new();
        let mut val = Vec::new();
        let mut test = Vec::new();
        for members in by_class.values() {
            let mut members = members.clone();
            members.shuffle(&mut rng);
            let counts = allocate(members.len(), [f_train, f_val, f_test]);
            train.extend_from_slice(&members[..counts[0]]);
            val.extend_from_slice(&members[counts[0]..counts[0] + counts[1]]);
            test.extend_from_slice(&members[counts[0] + counts[1]..]);
        }
        (train, val, test)
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let counts = allocate(n, [f_train, f_val, f_test]);
        let train = order[..counts[0]].to_vec();
        let val = order[counts[0]..counts[0] + counts[1]].to_vec();
        let test = order[counts[0] + counts[1]..].to_vec();
        (train, val, test)
    };

    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    SplitIndices::new(train, val, test, n)
}

/// Largest-remainder allocation of `n` items to three buckets; the counts
/// sum to `n` exactly. A bucket with a positive fraction is guaranteed at
/// least one item when possible (taken from the largest bucket).
fn allocate(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let quotas: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut leftover = n - counts.iter().sum::<usize>();
    // Hand out leftovers by descending fractional part; ties favour the
    // earlier bucket (train, then validation, then test).
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in &order {
        if leftover == 0 {
            break;
        }
        counts[i] += 1;
        leftover -= 1;
    }
    // Keep positive-fraction buckets non-empty where feasible.
    for i in 0..3 {
        if fractions[i] > 0.0 && counts[i] == 0 {
            let largest = (0..3).max_by_key(|&j| counts[j]).unwrap();
            if counts[largest] > 1 {
                counts[largest] -= 1;
                counts[i] += 1;
            }
        }
    }
    [counts[0], counts[1], counts[2]]
}

/// Selects the initial labelled subset of `train` for a run.
///
/// Cold classification labels the lowest train index of each class present;
/// cold regression labels the two train points with the largest Euclidean
/// distance (ties broken by lexicographic index pair); warm starts label
/// `ceil(warm_fraction * |train|)` points sampled without replacement.
/// The result is sorted ascending and never empty.
pub fn initial_labels(
    dataset: &Dataset,
    train: &[usize],
    config: &TaskConfig,
) -> Result<Vec<usize>, DatasetError> {
    if train.is_empty() {
        return Err(DatasetError::EmptySubset);
    }
    match (config.start_mode, dataset.task_kind()) {
        (StartMode::Cold, TaskKind::Classification { .. }) => {
            let Targets::Class(labels) = dataset.targets() else {
                unreachable!("classification task with non-class targets");
            };
            let mut per_class: BTreeMap<usize, usize> = BTreeMap::new();
            for &idx in train {
                per_class
                    .entry(labels[idx])
                    .and_modify(|e| *e = (*e).min(idx))
                    .or_insert(idx);
            }
            let mut picked: Vec<usize> = per_class.into_values().collect();
            picked.sort_unstable();
            Ok(picked)
        }
        (StartMode::Cold, TaskKind::Regression) => {
            if train.len() < 2 {
                return Err(DatasetError::ColdRegressionTooSmall);
            }
            let (i, j) = farthest_pair(dataset, train);
            Ok(vec![i.min(j), i.max(j)])
        }
        (StartMode::Warm, _) => {
            if !(config.warm_fraction > 0.0 && config.warm_fraction <= 1.0) {
                return Err(DatasetError::InvalidWarmFraction(config.warm_fraction));
            }
            let count = (config.warm_fraction * train.len() as f64).ceil() as usize;
            let count = count.clamp(1, train.len());
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            let picks = rand::seq::index::sample(&mut rng, train.len(), count);
            let mut chosen: Vec<usize> = picks.iter().map(|p| train[p]).collect();
            chosen.sort_unstable();
            Ok(chosen)
        }
    }
}

/// Exhaustive O(n^2) scan for the train pair with maximal Euclidean
/// distance; the first maximal pair in lexicographic (i, j) order wins ties.
fn farthest_pair(dataset: &Dataset, train: &[usize]) -> (usize, usize) {
    let x = dataset.features();
    let d = dataset.n_features();
    let mut best = (train[0], train[1]);
    let mut best_sq = -1.0;
    for (a, &i) in train.iter().enumerate() {
        for &j in &train[a + 1..] {
            let sq: f64 = (0..d).map(|c| (x[(i, c)] - x[(j, c)]).powi(2)).sum();
            if sq > best_sq {
                best_sq = sq;
                best = (i, j);
            }
        }
    }
    best
}
