//! Simplex and normalization utilities.

use crate::error::{invalid, Result};
use crate::types::ModalityWeights;

/// Floors every weight away from zero: `(w_m + eps) / sum_j (w_j + eps)`.
pub fn apply_floor(w: &[f64], epsilon: f64) -> Result<ModalityWeights> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(format!("floor epsilon must be positive, got {epsilon}")));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite weight entry"));
    }
    let shifted: Vec<f64> = w.iter().map(|v| v + epsilon).collect();
    ModalityWeights::from_masses(&shifted)
}

/// Affine map of `values` onto [0,1]. A constant vector maps to all zeros.
pub fn minmax_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(invalid("cannot normalize an empty vector"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("non-finite entry in normalization input"));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if span <= 0.0 {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect())
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `log(sum(exp(z)))` without overflow.
pub fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn floor_examples() {
        let w = apply_floor(&[1.0, 0.0], 0.1).unwrap();
        assert!(close(w.as_slice(), &[11.0 / 12.0, 1.0 / 12.0], 1e-15));

        for eps in [1e-3, 0.1, 3.0] {
            let w = apply_floor(&[0.5, 0.5], eps).unwrap();
            assert!(close(w.as_slice(), &[0.5, 0.5], 1e-15));
        }

        let w = apply_floor(&[0.7, 0.2, 0.1], 0.05).unwrap();
        let expect = [0.75 / 1.15, 0.25 / 1.15, 0.15 / 1.15];
        assert!(close(w.as_slice(), &expect, 1e-12));
        assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((w.get(0) - 0.652).abs() < 1e-3 && (w.get(2) - 0.130).abs() < 1e-3);
    }

    #[test]
    fn floor_rejects_bad_input() {
        assert!(apply_floor(&[f64::NAN, 1.0], 0.1).is_err());
        assert!(apply_floor(&[0.5, 0.5], 0.0).is_err());
    }

    #[test]
    fn minmax_examples() {
        assert_eq!(minmax_normalize(&[2.0, 4.0, 6.0]).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_normalize(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(minmax_normalize(&[-1.0, 0.0, 3.0]).unwrap(), vec![0.0, 0.25, 1.0]);
        assert!(minmax_normalize(&[]).is_err());
    }

    proptest! {
        #[test]
        fn floor_keeps_simplex_and_argmax(
            raw in prop::collection::vec(0.0f64..1.0, 1..8),
            eps in 1e-6f64..2.0,
        ) {
            prop_assume!(raw.iter().sum::<f64>() > 1e-9);
            let w = ModalityWeights::from_masses(&raw).unwrap();
            let once = apply_floor(w.as_slice(), eps).unwrap();
            let twice = apply_floor(once.as_slice(), eps).unwrap();
            let m = raw.len() as f64;
            for v in once.as_slice() {
                prop_assert!(*v >= eps / (1.0 + m * eps) - 1e-12);
            }
            prop_assert!((twice.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert_eq!(once.argmax(), w.argmax());
            prop_assert_eq!(twice.argmax(), w.argmax());
        }

        #[test]
        fn minmax_affine_invariant(
            v in prop::collection::vec(-10.0f64..10.0, 1..30),
            a in 0.5f64..10.0,
            b in -10.0f64..10.0,
        ) {
            let base = minmax_normalize(&v).unwrap();
            let moved: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let other = minmax_normalize(&moved).unwrap();
            let spread = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - v.iter().cloned().fold(f64::INFINITY, f64::min);
            // rounding in a*x+b must not swamp the spread
            prop_assume!(spread == 0.0 || spread >= 1.0);
            prop_assert!(close(&base, &other, 1e-12));
        }
    }
}
