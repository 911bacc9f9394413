//! The Hadamard–Howe map `h_{d,n}: S^d(SⁿV) → Sⁿ(S^dV)`.
//!
//! A monomial `m₁ ⋯ m_d` (each `mₖ` of degree `n`) is written as a symmetric
//! tensor by averaging each `mₖ` over its distinct orderings. Laying out the
//! `d` words as the rows of a `d × n` array, column `j` collects the `j`-th
//! letters of every word; symmetrizing within each column gives a monomial
//! of `S^dV`, and the `n` columns multiply to a monomial of `Sⁿ(S^dV)`. The
//! image is the average of that product over all choices of orderings.
//!
//! Rather than enumerate every tuple of orderings, the words are folded in
//! one at a time while tracking the multiset of partial columns. The
//! distribution over ordered column tuples is invariant under permuting
//! columns (each word ordering is uniform), so the sorted column multiset
//! carries all the information.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::basis::{basis, weight_zero_basis, SymBasisElement};
use super::linear::ExactLinearMap;
use crate::error::{Error, Result};
use crate::perm::distinct_arrangements;

/// `h_{d,n}(b)` as (codomain monomial, coefficient) pairs in canonical order.
pub fn hdn_apply(dim_v: usize, b: &SymBasisElement) -> Result<Vec<(SymBasisElement, BigRational)>> {
    let (d, n) = (b.outer_degree(), b.inner_degree());
    b.check_shape(dim_v, d, n)?;
    let (counts, total) = regroup_counts(b)?;
    let total = BigInt::from(total);
    let mut out: Vec<_> = counts
        .into_iter()
        .map(|(cols, c)| {
            (
                SymBasisElement::from_sorted(cols),
                BigRational::new(BigInt::from(c), total.clone()),
            )
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Number of ordering tuples landing on each output monomial, and the total
/// number of tuples.
fn regroup_counts(b: &SymBasisElement) -> Result<(HashMap<Vec<Vec<u8>>, u128>, u128)> {
    let n = b.inner_degree();
    let mut states: HashMap<Vec<Vec<u8>>, u128> = HashMap::new();
    states.insert(vec![Vec::new(); n], 1);
    let mut total: u128 = 1;
    let overflow = || Error::resource("Hadamard-Howe regrouping", "ordering count overflows 128 bits");
    for word in b.outer() {
        let orderings = distinct_arrangements(word);
        total = total
            .checked_mul(orderings.len() as u128)
            .ok_or_else(overflow)?;
        let mut next: HashMap<Vec<Vec<u8>>, u128> = HashMap::with_capacity(states.len() * 2);
        for (cols, count) in &states {
            for w in &orderings {
                let mut new_cols = cols.clone();
                for (col, &letter) in new_cols.iter_mut().zip(w) {
                    let at = col.partition_point(|&x| x <= letter);
                    col.insert(at, letter);
                }
                new_cols.sort_unstable();
                *next.entry(new_cols).or_insert(0) += count;
            }
        }
        states = next;
    }
    Ok((states, total))
}

/// Matrix of `h_{d,n}` from the monomial basis of `S^d(SⁿV)` to that of
/// `Sⁿ(S^dV)`. Columns are computed in parallel and assembled in basis order.
pub fn hdn_matrix(dim_v: usize, d: usize, n: usize, cap: usize) -> Result<ExactLinearMap> {
    let domain = basis(dim_v, d, n, cap)?;
    let codomain = basis(dim_v, n, d, cap)?;
    assemble(dim_v, domain, codomain)
}

/// `h_{d,n}` restricted to the weight-zero monomials of `S^d(SⁿC^{dn})`
/// (every variable used exactly once).
pub fn weight_zero_matrix(d: usize, n: usize, cap: usize) -> Result<ExactLinearMap> {
    let domain = weight_zero_basis(d, n, cap)?;
    let codomain = weight_zero_basis(n, d, cap)?;
    assemble(d * n, domain, codomain)
}

fn assemble(
    dim_v: usize,
    domain: Vec<SymBasisElement>,
    codomain: Vec<SymBasisElement>,
) -> Result<ExactLinearMap> {
    let row_of: HashMap<&SymBasisElement, usize> =
        codomain.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let columns = domain
        .par_iter()
        .map(|b| {
            hdn_apply(dim_v, b)?
                .into_iter()
                .map(|(e, v)| {
                    row_of
                        .get(&e)
                        .map(|&r| (r, v))
                        .ok_or_else(|| Error::contract(format!("image term {e} outside the codomain basis")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ExactLinearMap::new(domain, codomain, columns)
}
