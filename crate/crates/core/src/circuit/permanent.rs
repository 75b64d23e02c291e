//! Matrix permanent by Ryser's inclusion-exclusion formula.

use num_complex::Complex64;

/// Permanent of the `n x n` row-major matrix `a`.
///
/// Column subsets are visited in Gray-code order so each step updates the
/// row sums with a single column, giving `O(2^n n)` work.
pub fn permanent(a: &[Complex64], n: usize) -> Complex64 {
    assert_eq!(a.len(), n * n, "permanent needs a square matrix");
    match n {
        0 => return Complex64::new(1.0, 0.0),
        1 => return a[0],
        2 => return a[0] * a[3] + a[1] * a[2],
        _ => {}
    }
    assert!(n < 64, "permanent of a {n}x{n} matrix is out of reach");

    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut in_subset: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        let bit = 1u64 << col;
        let sign = if in_subset & bit == 0 { 1.0 } else { -1.0 };
        in_subset ^= bit;
        for (i, s) in row_sums.iter_mut().enumerate() {
            *s += a[i * n + col] * sign;
        }
        let prod = row_sums.iter().fold(Complex64::new(1.0, 0.0), |acc, &s| acc * s);
        // (-1)^(n - |S|)
        if (n as u32 - in_subset.count_ones()) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(a: &[Complex64], n: usize) -> Complex64 {
        fn rec(a: &[Complex64], n: usize, row: usize, used: &mut Vec<bool>) -> Complex64 {
            if row == n {
                return Complex64::new(1.0, 0.0);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..n {
                if !used[col] {
                    used[col] = true;
                    acc += a[row * n + col] * rec(a, n, row + 1, used);
                    used[col] = false;
                }
            }
            acc
        }
        rec(a, n, 0, &mut vec![false; n])
    }

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn all_ones_is_factorial() {
        for n in 0..7 {
            let a = re(&vec![1.0; n * n]);
            let expect: f64 = (1..=n).map(|k| k as f64).product();
            assert!((permanent(&a, n).re - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_has_unit_permanent() {
        let mut a = vec![Complex64::new(0.0, 0.0); 16];
        for i in 0..4 {
            a[i * 4 + i] = Complex64::new(1.0, 0.0);
        }
        assert_eq!(permanent(&a, 4), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn three_by_three_by_hand() {
        // per [[1,2,3],[4,5,6],[7,8,9]] = 450
        let a = re(&[1., 2., 3., 4., 5., 6., 7., 8., 9.]);
        assert!((permanent(&a, 3) - Complex64::new(450.0, 0.0)).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn matches_permutation_sum(n in 1usize..6, xs in prop::collection::vec(-1.0f64..1.0, 50)) {
            let a: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(xs[2 * i % 50], xs[(2 * i + 1) % 50])).collect();
            let d = (permanent(&a, n) - naive(&a, n)).norm();
            prop_assert!(d < 1e-10, "diff {}", d);
        }
    }
}
