//! Lifetime algebra of the coherent structures used by the model: k-out-of-n,
//! consecutive k-out-of-n, and the two-component serial system with a spare.
//!
//! These are brute-force evaluators of the min/max structure expressions.
//! They exist to validate order-statistic equivalences and to serve as
//! building blocks for simulation checks, not to be fast.

use crate::error::{Error, Result};

fn validate_lifetimes(lifetimes: &[f64]) -> Result<()> {
    for &x in lifetimes {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lifetimes must be finite and nonnegative, got {x}"
            )));
        }
    }
    Ok(())
}

fn validate_k(k: usize, n: usize) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    Ok(())
}

// Evaluating min over all C(n, m) subsets is exponential; past this size the
// order-statistic equivalence is used directly.
const SUBSET_ENUMERATION_LIMIT: usize = 20;

/// Lifetime of a k-out-of-n system (works while at least k components work):
/// min over all (n-k+1)-element subsets of the subset maximum, which equals
/// the (n-k+1)-th smallest lifetime.
///
/// The system dies at the (n-k+1)-th component failure, and the minimum over
/// m-element subsets of the maximum is exactly the m-th smallest value.
pub fn kofn_lifetime(lifetimes: &[f64], k: usize) -> Result<f64> {
    validate_lifetimes(lifetimes)?;
    let n = lifetimes.len();
    validate_k(k, n)?;
    let m = n - k + 1;
    if n <= SUBSET_ENUMERATION_LIMIT {
        Ok(min_over_subset_maxima(lifetimes, m))
    } else {
        let mut sorted = lifetimes.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
        Ok(sorted[m - 1])
    }
}

/// min over all m-element subsets of max{subset}, by direct enumeration.
fn min_over_subset_maxima(lifetimes: &[f64], m: usize) -> f64 {
    fn recurse(lifetimes: &[f64], start: usize, remaining: usize, current_max: f64) -> f64 {
        if remaining == 0 {
            return current_max;
        }
        let mut best = f64::INFINITY;
        // keep enough elements after `i` to fill the subset
        for i in start..=lifetimes.len() - remaining {
            let value = recurse(lifetimes, i + 1, remaining - 1, current_max.max(lifetimes[i]));
            best = best.min(value);
        }
        best
    }
    recurse(lifetimes, 0, m, f64::NEG_INFINITY)
}

/// Lifetime of a consecutive k-out-of-n system: min over the n-k+1 windows
/// of k adjacent components of the window maximum.
pub fn consecutive_kofn_lifetime(lifetimes: &[f64], k: usize) -> Result<f64> {
    validate_lifetimes(lifetimes)?;
    let n = lifetimes.len();
    validate_k(k, n)?;
    let best = lifetimes
        .windows(k)
        .map(|w| w.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

/// Lifetime of two serial components with one spare `y`:
/// max{min(max(x1, y), x2), min(x1, max(x2, y))}.
pub fn serial_spare_lifetime(x1: f64, x2: f64, y: f64) -> f64 {
    let left = x1.max(y).min(x2);
    let right = x1.min(x2.max(y));
    left.max(right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kofn_brute_force_example() {
        // min(max{3,1}, max{3,2}, max{1,2}) = min(3, 3, 2) = 2
        assert_eq!(kofn_lifetime(&[3.0, 1.0, 2.0], 2).unwrap(), 2.0);
    }

    #[test]
    fn kofn_single_component() {
        assert_eq!(kofn_lifetime(&[5.0], 1).unwrap(), 5.0);
    }

    #[test]
    fn kofn_all_equal() {
        for k in 1..=4 {
            assert_eq!(kofn_lifetime(&[7.5; 4], k).unwrap(), 7.5);
        }
    }

    #[test]
    fn kofn_rejects_bad_inputs() {
        assert!(kofn_lifetime(&[1.0, 2.0], 0).is_err());
        assert!(kofn_lifetime(&[1.0, 2.0], 3).is_err());
        assert!(kofn_lifetime(&[1.0, -2.0], 1).is_err());
        assert!(kofn_lifetime(&[f64::INFINITY], 1).is_err());
    }

    #[test]
    fn kofn_equals_order_statistic_exhaustively() {
        // all permutations of {1..n} for n <= 5 here; the acceptance suite
        // extends this to n = 6
        fn permutations(values: &mut Vec<f64>, k: usize, out: &mut Vec<Vec<f64>>) {
            if k <= 1 {
                out.push(values.clone());
                return;
            }
            for i in 0..k {
                values.swap(i, k - 1);
                permutations(values, k - 1, out);
                values.swap(i, k - 1);
            }
        }
        for n in 1..=5usize {
            let mut base: Vec<f64> = (1..=n).map(|i| i as f64).collect();
            let mut perms = Vec::new();
            let len = base.len();
            permutations(&mut base, len, &mut perms);
            for perm in perms {
                let mut sorted = perm.clone();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for k in 1..=n {
                    let lit = kofn_lifetime(&perm, k).unwrap();
                    assert_eq!(lit, sorted[n - k], "perm={perm:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn kofn_large_n_uses_order_statistic_path() {
        let lifetimes: Vec<f64> = (0..25).map(|i| ((i * 7) % 25) as f64).collect();
        let mut sorted = lifetimes.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in [1usize, 10, 25] {
            assert_eq!(kofn_lifetime(&lifetimes, k).unwrap(), sorted[25 - k]);
        }
    }

    #[test]
    fn consecutive_window_example() {
        assert_eq!(
            consecutive_kofn_lifetime(&[1.0, 5.0, 1.0, 5.0], 2).unwrap(),
            5.0
        );
    }

    #[test]
    fn consecutive_extremes() {
        let x = [2.0, 9.0, 4.0, 1.0];
        // k = n: one window, max of all
        assert_eq!(consecutive_kofn_lifetime(&x, 4).unwrap(), 9.0);
        // k = 1: singleton windows, min of all
        assert_eq!(consecutive_kofn_lifetime(&x, 1).unwrap(), 1.0);
    }

    #[test]
    fn serial_spare_examples() {
        // max{min(3,2), min(1,3)} = max{2, 1} = 2
        assert_eq!(serial_spare_lifetime(1.0, 2.0, 3.0), 2.0);
        assert_eq!(serial_spare_lifetime(0.0, 0.0, 123.0), 0.0);
        assert_eq!(serial_spare_lifetime(4.0, 4.0, 4.0), 4.0);
    }

    proptest! {
        #[test]
        fn kofn_is_permutation_invariant(
            mut xs in proptest::collection::vec(0.0..100.0f64, 2..7),
            k_seed in 0usize..6,
            swap_a in 0usize..6,
            swap_b in 0usize..6,
        ) {
            let k = k_seed % xs.len() + 1;
            let before = kofn_lifetime(&xs, k).unwrap();
            let (a, b) = (swap_a % xs.len(), swap_b % xs.len());
            xs.swap(a, b);
            let after = kofn_lifetime(&xs, k).unwrap();
            prop_assert_eq!(before, after);
        }

        #[test]
        fn all_operations_are_monotone(
            xs in proptest::collection::vec(0.0..100.0f64, 3..7),
            k_seed in 0usize..6,
            bump_index in 0usize..6,
            bump in 0.0..50.0f64,
        ) {
            let k = k_seed % xs.len() + 1;
            let i = bump_index % xs.len();
            let mut bigger = xs.clone();
            bigger[i] += bump;

            prop_assert!(kofn_lifetime(&bigger, k).unwrap() >= kofn_lifetime(&xs, k).unwrap());
            prop_assert!(
                consecutive_kofn_lifetime(&bigger, k).unwrap()
                    >= consecutive_kofn_lifetime(&xs, k).unwrap()
            );
            if xs.len() >= 3 {
                prop_assert!(
                    serial_spare_lifetime(bigger[0], bigger[1], bigger[2])
                        >= serial_spare_lifetime(xs[0], xs[1], xs[2])
                );
            }
        }
    }
}
