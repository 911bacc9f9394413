//! The `SL(V)`-invariant `P ∈ S^d(SⁿV*)` for even `n`, evaluated on
//! products of vectors, and its dual coefficient vector `P*`.
//!
//! With `Ω = det` on `V = ℚ^d` (so `Ω(e₁, …, e_d) = 1`), `P` evaluates on
//! `x = (v¹₁⋯v¹ₙ)⋯(v^d₁⋯v^dₙ)` to
//!
//! ```text
//! Σ_{σ₁,…,σ_d ∈ Sₙ}  Π_{j=1..n}  Ω(v¹_{σ₁(j)}, …, v^d_{σ_d(j)})
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::basis::{balanced_monomials, SymBasisElement};
use crate::error::{Error, Result};
use crate::poly::factorial;

/// Largest `nᵈ` determinant table the evaluator builds.
const TABLE_CAP: usize = 1 << 20;

/// Evaluates the invariant on `groups[i][j] = vⁱⱼ ∈ ℚ^d` (`d` groups of `n`
/// vectors). `n` must be even.
pub fn eval_invariant(groups: &[Vec<Vec<BigRational>>]) -> Result<BigRational> {
    let n = groups.first().map_or(0, Vec::len);
    if n % 2 == 1 {
        return Err(Error::validation(format!(
            "the invariant is defined for even n only (got n = {n})"
        )));
    }
    eval_invariant_unguarded(groups)
}

/// The same sum without the even-`n` requirement. For odd `n` the sum is
/// still well defined but is not symmetric in the groups.
pub fn eval_invariant_unguarded(groups: &[Vec<Vec<BigRational>>]) -> Result<BigRational> {
    let d = groups.len();
    if d == 0 {
        return Err(Error::validation("at least one group of vectors is required"));
    }
    let n = groups[0].len();
    if n == 0 || n > 16 {
        return Err(Error::validation("each group needs between 1 and 16 vectors"));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.len() != n {
            return Err(Error::validation(format!("group {} has {} vectors, expected {n}", i + 1, g.len())));
        }
        if let Some(v) = g.iter().find(|v| v.len() != d) {
            return Err(Error::validation(format!(
                "vector of dimension {} in a form on Q^{d}",
                v.len()
            )));
        }
    }
    let table_len = n
        .checked_pow(d as u32)
        .filter(|&l| l <= TABLE_CAP)
        .ok_or_else(|| Error::resource("invariant evaluation", format!("{n}^{d} determinant table")))?;

    let table: Vec<BigRational> = (0..table_len)
        .map(|code| {
            let cols: Vec<&Vec<BigRational>> = (0..d)
                .map(|k| &groups[k][(code / n.pow(k as u32)) % n])
                .collect();
            determinant(&cols)
        })
        .collect();

    // Integer tables (the common case: basis vectors) are summed in i128 when
    // the worst-case total cannot overflow.
    let max_abs = table
        .iter()
        .map(|v| v.numer().abs())
        .max()
        .unwrap_or_else(BigInt::zero);
    let bound = num_traits::pow(max_abs, n) * num_traits::pow(factorial(n as u64), d);
    if table.iter().all(|v| v.is_integer()) && bound < BigInt::from(i128::MAX >> 1) {
        let ints: Vec<i128> = table.iter().map(|v| v.numer().to_i128().unwrap()).collect();
        let mut w = Walk::new(n, d, &ints);
        w.rec(0, 0, 0, 1i128);
        return Ok(BigRational::from_integer(BigInt::from(w.sum)));
    }
    let mut w = Walk::new(n, d, &table);
    w.rec(0, 0, 0, BigRational::one());
    Ok(w.sum)
}

struct Walk<'a, T> {
    n: usize,
    d: usize,
    table: &'a [T],
    /// Indices already taken by each `σ_k`.
    used: Vec<u32>,
    sum: T,
}

impl<'a, T> Walk<'a, T>
where
    T: Clone + Zero + std::ops::Mul<Output = T> + std::ops::AddAssign,
{
    fn new(n: usize, d: usize, table: &'a [T]) -> Self {
        Walk { n, d, table, used: vec![0; d], sum: T::zero() }
    }

    /// Chooses `σ_k(j)`; `code` accumulates the table index for column `j`.
    fn rec(&mut self, j: usize, k: usize, code: usize, acc: T) {
        if j == self.n {
            self.sum += acc;
            return;
        }
        if k == self.d {
            let entry = &self.table[code];
            if entry.is_zero() {
                return;
            }
            self.rec(j + 1, 0, 0, acc * entry.clone());
            return;
        }
        let stride = self.n.pow(k as u32);
        for a in 0..self.n {
            let bit = 1u32 << a;
            if self.used[k] & bit != 0 {
                continue;
            }
            self.used[k] |= bit;
            self.rec(j, k + 1, code + a * stride, acc.clone());
            self.used[k] &= !bit;
        }
    }
}

/// Determinant of the matrix whose columns are `cols`, by Gaussian
/// elimination over ℚ.
fn determinant(cols: &[&Vec<BigRational>]) -> BigRational {
    let d = cols.len();
    let mut m: Vec<Vec<BigRational>> = (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect();
    let mut det = BigRational::one();
    for c in 0..d {
        let Some(p) = (c..d).find(|&i| !m[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let pivot = m[c][c].clone();
        det *= &pivot;
        for i in c + 1..d {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &pivot;
            for k in c..d {
                let t = &f * &m[c][k];
                m[i][k] -= t;
            }
        }
    }
    det
}

fn unit(d: usize, i: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); d];
    v[i] = BigRational::one();
    v
}

/// Order up to which the evaluation on `(e₁⋯eₙ)ⁿ` is attempted.
pub const P_ON_POWER_MAX: usize = 5;

/// `⟨P, (e₁⋯eₙ)ⁿ⟩` with `d = n`: each group is `(e₁, …, eₙ)`. A term is
/// nonzero exactly when `σ₁, …, σₙ` placed as rows form a Latin square, and
/// it then equals that square's column sign.
pub fn p_on_power(n: usize) -> Result<BigInt> {
    if n % 2 == 1 {
        return Err(Error::validation(format!(
            "the invariant is defined for even n only (got n = {n})"
        )));
    }
    p_on_power_unguarded(n)
}

pub fn p_on_power_unguarded(n: usize) -> Result<BigInt> {
    if n == 0 || n > P_ON_POWER_MAX {
        return Err(Error::resource(
            format!("evaluation on (e1...en)^n at n = {n}"),
            format!("supported for 1 ≤ n ≤ {P_ON_POWER_MAX}"),
        ));
    }
    let group: Vec<Vec<BigRational>> = (0..n).map(|j| unit(n, j)).collect();
    let v = eval_invariant_unguarded(&vec![group; n])?;
    Ok(v.to_integer())
}

/// Largest `n` for which `P*` is tabulated.
pub const PSTAR_MAX: usize = 4;

/// Coefficients of the dual invariant `P* ∈ Sⁿ(SⁿCⁿ)` over the balanced
/// monomials (those of `sl`-weight zero).
///
/// For a monomial `b = e^{α₁} ⋯ e^{αₙ}` the stored coefficient is
///
/// ```text
/// ⟨P, b⟩ · Π_k  n! / αₖ!
/// ```
///
/// that is, the value of the invariant on `b`'s vectors multiplied by the
/// multinomial coefficient of every inner factor. This is the coefficient of
/// `b` per ordered arrangement of its `n` inner factors: a polynomial
/// coefficient divided by the number `n!/β!` of distinct orderings of the
/// factors. In this normalization the coefficient of `(e₁ⁿ)⋯(eₙⁿ)` is
/// `(n!)ⁿ`, and the coefficient vector of the Haar projection of
/// `g·(e₁⋯eₙ)ⁿ` is `[∫ perm(g)ⁿ]` at `(e₁⋯eₙ)ⁿ` and `[∫ Π gⁱⱼ]` at
/// `(e₁ⁿ)⋯(eₙⁿ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PStar {
    pub n: usize,
    /// Every balanced monomial in canonical order, zeros included.
    pub coefficients: Vec<(SymBasisElement, BigRational)>,
}

impl PStar {
    pub fn coefficient(&self, e: &SymBasisElement) -> BigRational {
        self.coefficients
            .iter()
            .find(|(b, _)| b == e)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// `(e₁ⁿ)(e₂ⁿ)⋯(eₙⁿ)`.
    pub fn pure_powers(n: usize) -> SymBasisElement {
        SymBasisElement::from_sorted((0..n as u8).map(|i| vec![i; n]).collect())
    }

    /// `(e₁⋯eₙ)ⁿ`.
    pub fn product_power(n: usize) -> SymBasisElement {
        SymBasisElement::from_sorted(vec![(0..n as u8).collect(); n])
    }

    /// Nonzero entries only.
    pub fn support(&self) -> impl Iterator<Item = &(SymBasisElement, BigRational)> {
        self.coefficients.iter().filter(|(_, c)| !c.is_zero())
    }

    /// Coefficients rescaled so that `(e₁ⁿ)⋯(eₙⁿ)` has coefficient 1.
    pub fn normalized(&self) -> Vec<(SymBasisElement, BigRational)> {
        let pivot = self.coefficient(&PStar::pure_powers(self.n));
        self.coefficients
            .iter()
            .map(|(e, c)| (e.clone(), c / &pivot))
            .collect()
    }

    /// `coeff[(e₁⋯eₙ)ⁿ] / coeff[(e₁ⁿ)⋯(eₙⁿ)]`.
    pub fn product_to_powers_ratio(&self) -> BigRational {
        self.coefficient(&PStar::product_power(self.n)) / self.coefficient(&PStar::pure_powers(self.n))
    }
}

pub fn pstar_coefficients(n: usize) -> Result<PStar> {
    if n % 2 == 1 || n == 0 {
        return Err(Error::validation(format!("P* is defined for even n only (got n = {n})")));
    }
    if n > PSTAR_MAX {
        return Err(Error::resource(format!("P* at n = {n}"), format!("supported for n ≤ {PSTAR_MAX}")));
    }
    let n_fact = factorial(n as u64);
    let coefficients = balanced_monomials(n)?
        .into_iter()
        .map(|b| {
            let groups: Vec<Vec<Vec<BigRational>>> = b
                .outer()
                .iter()
                .map(|m| m.iter().map(|&v| unit(n, v as usize)).collect())
                .collect();
            let raw = eval_invariant(&groups)?;
            let multinomials = b.outer().iter().fold(BigInt::one(), |acc, m| {
                let denom = exponent_factorials(m);
                acc * (&n_fact / denom)
            });
            Ok((b, raw * BigRational::from_integer(multinomials)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PStar { n, coefficients })
}

/// `α!` for the exponent vector of a sorted multiset of variables.
fn exponent_factorials(m: &[u8]) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = 0;
    while k < m.len() {
        let run = m[k..].iter().take_while(|&&x| x == m[k]).count();
        acc *= factorial(run as u64);
        k += run;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::{census, CensusOptions};
    use proptest::prelude::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn vecs(groups: &[&[&[i64]]]) -> Vec<Vec<Vec<BigRational>>> {
        groups
            .iter()
            .map(|g| g.iter().map(|v| v.iter().map(|&x| q(x)).collect()).collect())
            .collect()
    }

    #[test]
    fn basis_assignment_gives_factorial_power() {
        for (d, n) in [(2usize, 2usize), (2, 4), (3, 2), (4, 2), (3, 4)] {
            let groups: Vec<Vec<Vec<BigRational>>> = (0..d).map(|i| vec![unit(d, i); n]).collect();
            let expected = num_traits::pow(factorial(n as u64), d);
            assert_eq!(eval_invariant(&groups).unwrap(), BigRational::from_integer(expected), "d={d} n={n}");
        }
    }

    #[test]
    fn transposed_assignment_at_two() {
        // vⁱⱼ = e_j
        let g = vecs(&[&[&[1, 0], &[0, 1]], &[&[1, 0], &[0, 1]]]);
        assert_eq!(eval_invariant(&g).unwrap(), q(-2));
    }

    #[test]
    fn odd_n_is_refused() {
        let g = vecs(&[&[&[1, 0], &[0, 1], &[1, 1]], &[&[1, 0], &[0, 1], &[1, 1]]]);
        assert!(matches!(eval_invariant(&g), Err(Error::Validation(_))));
        assert!(eval_invariant_unguarded(&g).is_ok());
        assert!(matches!(p_on_power(3), Err(Error::Validation(_))));
    }

    #[test]
    fn dimension_mismatch_is_refused() {
        let g = vecs(&[&[&[1, 0, 0], &[0, 1, 0]], &[&[1, 0, 0], &[0, 1, 0]]]);
        assert!(matches!(eval_invariant(&g), Err(Error::Validation(_))));
        let g = vecs(&[&[&[1, 0], &[0, 1]], &[&[1, 0]]]);
        assert!(eval_invariant(&g).is_err());
    }

    #[test]
    fn power_evaluation_is_the_column_difference() {
        for n in 1..=5 {
            let c = census(n, CensusOptions::default()).unwrap();
            assert_eq!(p_on_power_unguarded(n).unwrap(), c.col_difference(), "n={n}");
        }
        assert_eq!(p_on_power(2).unwrap(), BigInt::from(-2));
        assert_eq!(p_on_power_unguarded(3).unwrap(), BigInt::from(0));
        assert_ne!(p_on_power(4).unwrap(), BigInt::from(0));
        assert!(matches!(p_on_power(6), Err(Error::Resource { .. })));
    }

    #[test]
    fn pstar_at_two() {
        let p = pstar_coefficients(2).unwrap();
        assert_eq!(p.coefficients.len(), 2);
        assert_eq!(p.coefficient(&PStar::pure_powers(2)), q(4));
        assert_eq!(p.coefficient(&PStar::product_power(2)), q(-8));
        assert_eq!(p.product_to_powers_ratio(), q(-2));
        // Swapping e₁ and e₂ fixes the vector.
        for (e, c) in &p.coefficients {
            assert_eq!(&p.coefficient(&e.relabel(&[1, 0])), c);
        }
        assert!(pstar_coefficients(3).is_err());
        assert!(matches!(pstar_coefficients(6), Err(Error::Resource { .. })));
    }

    #[test]
    fn pstar_at_four_support() {
        let p = pstar_coefficients(4).unwrap();
        assert_eq!(p.coefficient(&PStar::pure_powers(4)), BigRational::from_integer(num_traits::pow(BigInt::from(24), 4)));
        assert!(!p.coefficient(&PStar::product_power(4)).is_zero());
        // Invariant under relabeling the basis vectors of C⁴.
        let map = [2u8, 0, 3, 1];
        for (e, c) in p.support() {
            assert_eq!(&p.coefficient(&e.relabel(&map)), c);
        }
    }

    fn rational_vec(d: usize) -> impl Strategy<Value = Vec<BigRational>> {
        prop::collection::vec((-4i64..=4, 1i64..=3), d)
            .prop_map(|v| v.into_iter().map(|(a, b)| BigRational::new(a.into(), b.into())).collect())
    }

    fn groups(d: usize, n: usize) -> impl Strategy<Value = Vec<Vec<Vec<BigRational>>>> {
        prop::collection::vec(prop::collection::vec(rational_vec(d), n), d)
    }

    fn apply(m: &[[i64; 2]; 2], v: &[BigRational]) -> Vec<BigRational> {
        (0..2)
            .map(|i| q(m[i][0]) * &v[0] + q(m[i][1]) * &v[1])
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn symmetric_under_group_swap(g in prop_oneof![groups(2, 2), groups(2, 4)]) {
            let mut swapped = g.clone();
            swapped.swap(0, 1);
            prop_assert_eq!(eval_invariant(&g).unwrap(), eval_invariant(&swapped).unwrap());
        }

        #[test]
        fn symmetric_within_a_group(
            g in prop_oneof![groups(2, 2), groups(2, 4)],
            which in 0usize..2,
            a in 0usize..4,
            b in 0usize..4,
        ) {
            let n = g[0].len();
            let mut moved = g.clone();
            moved[which].swap(a % n, b % n);
            prop_assert_eq!(eval_invariant(&g).unwrap(), eval_invariant(&moved).unwrap());
        }

        #[test]
        fn invariant_under_special_linear_maps(
            g in groups(2, 2),
            ab in (-3i64..=3, -3i64..=3),
            k in -3i64..=3,
        ) {
            // [[1, a], [0, 1]] · [[1, 0], [b, 1]] · [[1, k], [0, 1]] has determinant 1.
            let (a, b) = ab;
            let m1 = [[1 + a * b, a], [b, 1]];
            let m = [[m1[0][0], m1[0][0] * k + m1[0][1]], [m1[1][0], m1[1][0] * k + m1[1][1]]];
            prop_assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1);
            let moved: Vec<Vec<Vec<BigRational>>> = g
                .iter()
                .map(|grp| grp.iter().map(|v| apply(&m, v)).collect())
                .collect();
            prop_assert_eq!(eval_invariant(&g).unwrap(), eval_invariant(&moved).unwrap());
        }
    }

    #[test]
    fn rational_and_integer_paths_agree() {
        let g = vecs(&[&[&[2, 1], &[0, 3], &[1, 1], &[5, -1]], &[&[1, 0], &[1, 2], &[-2, 1], &[0, 1]]]);
        let int = eval_invariant(&g).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        let scaled: Vec<Vec<Vec<BigRational>>> =
            g.iter().map(|grp| grp.iter().map(|v| v.iter().map(|x| x * &half).collect()).collect()).collect();
        // Each determinant scales by 1/4, four determinants per term.
        assert_eq!(eval_invariant(&scaled).unwrap() * q(256), int);
    }
}
