use num_complex::Complex64;

use super::haar::ComplexMatrix;
use crate::error::{Error, Result};

pub const PERMANENT_MAX: usize = 20;

/// Ryser's formula with Gray-code subset updates, `O(2ⁿ n)`.
pub fn permanent(m: &ComplexMatrix) -> Result<Complex64> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::validation("permanent of a non-square matrix"));
    }
    if n > PERMANENT_MAX {
        return Err(Error::resource(
            format!("permanent of a {n}x{n} matrix"),
            format!("sizes above {PERMANENT_MAX} are refused"),
        ));
    }
    Ok(permanent_unchecked(m))
}

pub(crate) fn permanent_unchecked(m: &ComplexMatrix) -> Complex64 {
    let n = m.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray = 0u32;
    for k in 1u32..(1 << n) {
        let next = k ^ (k >> 1);
        let j = (gray ^ next).trailing_zeros() as usize;
        let adding = next & (1 << j) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += m[(i, j)];
            } else {
                *s -= m[(i, j)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if next.count_ones() % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use crate::poly::{perm_poly, VariableSpace};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive(m: &ComplexMatrix) -> Complex64 {
        let n = m.nrows();
        Permutation::all(n)
            .iter()
            .map(|p| (0..n).map(|i| m[(i, p.apply(i))]).product::<Complex64>())
            .sum()
    }

    #[test]
    fn small_values() {
        assert_eq!(permanent(&ComplexMatrix::identity(3, 3)).unwrap(), c(1.0, 0.0));
        assert_eq!(permanent(&ComplexMatrix::from_element(3, 3, c(1.0, 0.0))).unwrap(), c(6.0, 0.0));
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(2.0, -1.0)]);
        let expected = m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)];
        assert!((permanent(&m).unwrap() - expected).norm() < 1e-14);
        let point: Vec<Complex64> = (0..4).map(|k| m[(k / 2, k % 2)]).collect();
        assert_eq!(perm_poly(2).space(), VariableSpace::Matrix(2));
        assert!((perm_poly(2).eval_complex(&point).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn matches_the_permutation_sum() {
        for n in 1..=6 {
            let m = ComplexMatrix::from_fn(n, n, |i, j| c((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0 - 1.0));
            let err = (permanent(&m).unwrap() - naive(&m)).norm();
            assert!(err < 1e-9, "n={n} err={err}");
        }
    }

    #[test]
    fn size_limit() {
        let m = ComplexMatrix::identity(21, 21);
        assert!(matches!(permanent(&m), Err(Error::Resource { .. })));
        assert!(permanent(&ComplexMatrix::zeros(2, 3)).is_err());
    }
}
