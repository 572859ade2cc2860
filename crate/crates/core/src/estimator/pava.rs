//! Weighted pool-adjacent-violators.

use crate::error::{Error, Result};

struct Block {
    start: usize,
    weight: f64,
    mean: f64,
}

/// Weighted least-squares projection of `targets` onto nondecreasing vectors.
///
/// Zero-weight entries do not affect the fit. Inside a pooled block they take
/// the block value; between blocks they take the midpoint of the two
/// bracketing block values; before the first or after the last positive
/// weight they take the nearest block value.
pub fn pava(targets: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if targets.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: targets.len(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidWeights(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let active: Vec<usize> = (0..targets.len()).filter(|&i| weights[i] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::InvalidWeights("all weights are zero".into()));
    }
    if active.iter().any(|&i| !targets[i].is_finite()) {
        return Err(Error::InvalidWeights(
            "target with positive weight is not finite".into(),
        ));
    }

    let mut blocks: Vec<Block> = Vec::with_capacity(active.len());
    for (pos, &i) in active.iter().enumerate() {
        let mut b = Block {
            start: pos,
            weight: weights[i],
            mean: targets[i],
        };
        while let Some(prev) = blocks.last() {
            if prev.mean <= b.mean {
                break;
            }
            let prev = blocks.pop().unwrap();
            let w = prev.weight + b.weight;
            b = Block {
                start: prev.start,
                weight: w,
                mean: (prev.weight * prev.mean + b.weight * b.mean) / w,
            };
        }
        blocks.push(b);
    }

    let mut fitted_active = vec![0.0; active.len()];
    for (k, b) in blocks.iter().enumerate() {
        let end = blocks.get(k + 1).map_or(active.len(), |n| n.start);
        fitted_active[b.start..end].fill(b.mean);
    }

    let mut out = vec![0.0; targets.len()];
    let first = active[0];
    let last = active[active.len() - 1];
    out[..first].fill(fitted_active[0]);
    out[last + 1..].fill(fitted_active[active.len() - 1]);
    for (pos, &i) in active.iter().enumerate() {
        out[i] = fitted_active[pos];
        if let Some(&next) = active.get(pos + 1) {
            let mid = 0.5 * (fitted_active[pos] + fitted_active[pos + 1]);
            out[i + 1..next].fill(mid);
        }
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn monotone_input_unchanged() {
        assert_eq!(
            pava(&[1.0, 2.0, 3.0], &[1.0; 3]).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn full_pool() {
        assert_eq!(
            pava(&[3.0, 1.0, 2.0], &[1.0; 3]).unwrap(),
            vec![2.0, 2.0, 2.0]
        );
        assert_eq!(
            brute_force::isotonic(&[3.0, 1.0, 2.0], &[1.0; 3]),
            vec![2.0; 3]
        );
    }

    #[test]
    fn weighted_pair() {
        assert_eq!(pava(&[2.0, 0.0], &[1.0, 3.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn zero_weight_handling() {
        // isolated between blocks: midpoint
        let out = pava(&[1.0, 100.0, 3.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(out, vec![1.0, 2.0, 3.0]);
        // inside a pooled block: block value
        let out = pava(&[3.0, -7.0, 1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(out, vec![2.0, 2.0, 2.0]);
        // leading and trailing
        let out = pava(&[9.0, 1.0, 2.0, -4.0], &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(out, vec![1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn errors() {
        assert!(pava(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(pava(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pava(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=6).prop_flat_map(|n| {
            (
                proptest::collection::vec(-5.0..5.0f64, n),
                proptest::collection::vec(0.01..3.0f64, n),
            )
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force((y, w) in instance()) {
            let fast = pava(&y, &w).unwrap();
            let exact = brute_force::isotonic(&y, &w);
            for (a, b) in fast.iter().zip(&exact) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn output_is_monotone_and_idempotent(
            y in proptest::collection::vec(-1e3..1e3f64, 1..200),
            seed in proptest::collection::vec(0.0..2.0f64, 200),
        ) {
            let w: Vec<f64> = seed[..y.len()]
                .iter()
                .map(|&v| if v < 0.3 { 0.0 } else { v })
                .collect();
            prop_assume!(w.iter().any(|&v| v > 0.0));
            let z = pava(&y, &w).unwrap();
            prop_assert!(z.windows(2).all(|p| p[0] <= p[1]));
            let again = pava(&z, &w).unwrap();
            for (a, b) in z.iter().zip(&again) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }
}
