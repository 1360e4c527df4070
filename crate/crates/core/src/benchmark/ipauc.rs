//! Area under the iteration-performance curve.

use super::BenchmarkError;

/// Trapezoidal area under a `(iteration, metric)` curve, normalised by the
/// iteration span so a constant curve at `c` scores exactly `c`.
///
/// Iterations must be strictly increasing and the curve needs at least two
/// points.
pub fn ipauc(curve: &[(f64, f64)]) -> Result<f64, BenchmarkError> {
    if curve.len() < 2 {
        return Err(BenchmarkError::CurveTooShort);
    }
    for pair in curve.windows(2) {
        if pair[1].0 <= pair[0].0 || pair[1].0.is_nan() || pair[0].0.is_nan() {
            return Err(BenchmarkError::BadCurve);
        }
    }
    if !curve.iter().all(|(k, v)| k.is_finite() && v.is_finite()) {
        return Err(BenchmarkError::BadCurve);
    }
    let span = curve.last().unwrap().0 - curve.first().unwrap().0;
    let area: f64 = curve
        .windows(2)
        .map(|pair| (pair[1].0 - pair[0].0) * (pair[0].1 + pair[1].1) / 2.0)
        .sum();
    Ok(area / span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_curve_scores_the_constant() {
        let curve: Vec<(f64, f64)> = (0..7).map(|k| (k as f64, 0.5)).collect();
        assert!((ipauc(&curve).unwrap() - 0.5).abs() < 1e-15);
        // Uneven spacing changes nothing.
        let curve = vec![(0.0, 0.5), (1.0, 0.5), (10.0, 0.5)];
        assert!((ipauc(&curve).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn linear_ramp_scores_half() {
        let n = 8;
        let curve: Vec<(f64, f64)> = (0..=n).map(|k| (k as f64, k as f64 / n as f64)).collect();
        assert!((ipauc(&curve).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hand_trapezoid() {
        let curve = vec![(0.0, 0.2), (1.0, 0.8), (2.0, 0.8)];
        assert!((ipauc(&curve).unwrap() - 0.65).abs() < 1e-15);
    }

    #[test]
    fn collinear_insertion_is_invariant() {
        let base = vec![(0.0, 0.1), (4.0, 0.9)];
        let with_midpoint = vec![(0.0, 0.1), (2.0, 0.5), (4.0, 0.9)];
        assert!((ipauc(&base).unwrap() - ipauc(&with_midpoint).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(matches!(
            ipauc(&[(0.0, 1.0)]),
            Err(BenchmarkError::CurveTooShort)
        ));
        assert!(matches!(
            ipauc(&[(0.0, 1.0), (0.0, 2.0)]),
            Err(BenchmarkError::BadCurve)
        ));
        assert!(matches!(
            ipauc(&[(1.0, 1.0), (0.0, 2.0)]),
            Err(BenchmarkError::BadCurve)
        ));
    }
}
