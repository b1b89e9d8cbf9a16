//! Matrix permanents.
//!
//! The workhorse is Ryser's subset-sum formula walked in Gray-code order,
//! O(2^n · n) time: each step toggles one column in the running row sums and
//! accumulates the signed product. The outer sum over 2^n terms is
//! cancellation-prone, so it is accumulated with Kahan compensation; for the
//! dimensions allowed here (n ≤ 20) the observed error stays within a few
//! hundred ulps of the result magnitude. A brute-force permutation sum is
//! kept as an independent reference for small matrices.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::KahanSum;

/// Largest dimension accepted by [`permanent`].
pub const MAX_PERMANENT_DIM: usize = 20;

/// Permanent of a square complex matrix via Gray-coded Ryser iteration.
pub fn permanent(a: &Array2<Complex64>) -> Result<Complex64> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::invalid("permanent requires a square matrix"));
    }
    if n == 0 {
        return Err(Error::invalid(
            "permanent of an empty matrix is not defined here",
        ));
    }
    if n > MAX_PERMANENT_DIM {
        return Err(Error::invalid(format!(
            "permanent limited to n <= {MAX_PERMANENT_DIM}, got {n}"
        )));
    }
    if n == 1 {
        return Ok(a[[0, 0]]);
    }

    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = KahanSum::new();
    let mut gray: u64 = 0;
    let mut popcount: u32 = 0;

    for k in 1u64..(1 << n) {
        // Bit toggled when moving from gray(k-1) to gray(k).
        let bit = k.trailing_zeros() as usize;
        let mask = 1u64 << bit;
        if gray & mask == 0 {
            gray |= mask;
            popcount += 1;
            for i in 0..n {
                row_sums[i] += a[[i, bit]];
            }
        } else {
            gray &= !mask;
            popcount -= 1;
            for i in 0..n {
                row_sums[i] -= a[[i, bit]];
            }
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for rs in &row_sums {
            prod *= *rs;
        }
        if popcount.is_multiple_of(2) {
            acc.add(prod);
        } else {
            acc.add(-prod);
        }
    }

    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(acc.value() * sign)
}

/// Brute-force permanent as a sum over all n! permutations, O(n!·n).
///
/// Independent reference implementation; intentionally limited to n ≤ 9.
pub fn permanent_naive(a: &Array2<Complex64>) -> Result<Complex64> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::invalid("permanent requires a square matrix"));
    }
    if n == 0 || n > 9 {
        return Err(Error::invalid("naive permanent limited to 1 <= n <= 9"));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut cols: Vec<usize> = (0..n).collect();
    permute_sum(a, &mut cols, 0, &mut total);
    Ok(total)
}

fn permute_sum(a: &Array2<Complex64>, cols: &mut Vec<usize>, row: usize, total: &mut Complex64) {
    let n = cols.len();
    if row == n {
        let mut prod = Complex64::new(1.0, 0.0);
        for (r, &c) in cols.iter().enumerate() {
            prod *= a[[r, c]];
        }
        *total += prod;
        return;
    }
    for i in row..n {
        cols.swap(row, i);
        permute_sum(a, cols, row + 1, total);
        cols.swap(row, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_complex(n: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = crate::rng::seeded(seed);
        let mut m = Array2::zeros((n, n));
        for z in m.iter_mut() {
            *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        m
    }

    #[test]
    fn one_by_one_is_the_entry() {
        let a = Array2::from_elem((1, 1), Complex64::new(0.3, -0.7));
        assert_eq!(permanent(&a).unwrap(), Complex64::new(0.3, -0.7));
    }

    #[test]
    fn all_ones_is_factorial() {
        for n in 1..=6 {
            let a = Array2::from_elem((n, n), Complex64::new(1.0, 0.0));
            let expected: f64 = (1..=n).map(|k| k as f64).product();
            let p = permanent(&a).unwrap();
            assert!((p.re - expected).abs() < 1e-9 * expected);
            assert!(p.im.abs() < 1e-9);
        }
    }

    #[test]
    fn matches_naive_on_random_matrices() {
        for seed in 0..10 {
            let a = random_complex(5, seed);
            let fast = permanent(&a).unwrap();
            let slow = permanent_naive(&a).unwrap();
            assert!((fast - slow).norm() <= 1e-12 * slow.norm().max(1.0));
        }
    }

    #[test]
    fn rejects_non_square_and_oversized() {
        let rect = Array2::<Complex64>::zeros((2, 3));
        assert!(permanent(&rect).is_err());
        let big = Array2::<Complex64>::zeros((MAX_PERMANENT_DIM + 1, MAX_PERMANENT_DIM + 1));
        assert!(permanent(&big).is_err());
    }
}
