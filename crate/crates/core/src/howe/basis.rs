use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// A monomial of `S^d(SⁿV)`: a multiset of `d` inner multisets, each holding
/// `n` variable indices.
///
/// Inner multisets are sorted vectors and the outer list is sorted, so two
/// elements are equal exactly when they denote the same monomial and the
/// derived `Ord` is the canonical lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymBasisElement {
    outer: Vec<Vec<u8>>,
}

impl SymBasisElement {
    /// Sorts the input into canonical form. Every inner multiset must have
    /// the same size.
    pub fn new(mut outer: Vec<Vec<u8>>) -> Result<Self> {
        if let Some(first) = outer.first() {
            let n = first.len();
            if outer.iter().any(|m| m.len() != n) {
                return Err(Error::validation("inner multisets of unequal size"));
            }
        }
        for m in &mut outer {
            m.sort_unstable();
        }
        outer.sort();
        Ok(SymBasisElement { outer })
    }

    pub(crate) fn from_sorted(outer: Vec<Vec<u8>>) -> Self {
        debug_assert!(outer.windows(2).all(|w| w[0] <= w[1]));
        SymBasisElement { outer }
    }

    pub fn outer(&self) -> &[Vec<u8>] {
        &self.outer
    }

    /// Number of inner factors (`d`).
    pub fn outer_degree(&self) -> usize {
        self.outer.len()
    }

    /// Size of each inner factor (`n`).
    pub fn inner_degree(&self) -> usize {
        self.outer.first().map_or(0, Vec::len)
    }

    /// Total exponent of each variable.
    pub fn weight(&self, dim_v: usize) -> Vec<u32> {
        let mut w = vec![0u32; dim_v];
        for m in &self.outer {
            for &v in m {
                w[v as usize] += 1;
            }
        }
        w
    }

    pub fn relabel(&self, map: &[u8]) -> SymBasisElement {
        let outer = self
            .outer
            .iter()
            .map(|m| m.iter().map(|&v| map[v as usize]).collect())
            .collect();
        SymBasisElement::new(outer).expect("relabeling preserves shape")
    }

    pub(crate) fn check_shape(&self, dim_v: usize, d: usize, n: usize) -> Result<()> {
        let ok = self.outer.len() == d
            && self.outer.iter().all(|m| m.len() == n && m.iter().all(|&v| (v as usize) < dim_v));
        if ok {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "{self} is not a monomial of S^{d}(S^{n}V) with dim V = {dim_v}"
            )))
        }
    }
}

impl fmt::Display for SymBasisElement {
    /// `(x1^2 x2)(x1 x2^2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.outer {
            f.write_str("(")?;
            let mut first = true;
            let mut k = 0;
            while k < m.len() {
                let v = m[k];
                let run = m[k..].iter().take_while(|&&x| x == v).count();
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "x{}", v as usize + 1)?;
                if run > 1 {
                    write!(f, "^{run}")?;
                }
                k += run;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `dim S^d(SⁿV) = C(C(dimV + n − 1, n) + d − 1, d)`.
pub fn basis_len(dim_v: usize, d: usize, n: usize) -> BigUint {
    let inner = binomial((dim_v + n - 1) as u64, n as u64);
    let inner = inner.to_u64().unwrap_or(u64::MAX);
    binomial(inner.saturating_add(d as u64 - 1), d as u64)
}

/// Multisets of size `k` from `0..m` as sorted vectors, in lexicographic order.
pub(crate) fn multisets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..m {
            cur.push(x);
            rec(m, k, x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

fn check_cap(len: &BigUint, cap: usize, what: String) -> Result<usize> {
    match len.to_usize() {
        Some(l) if l <= cap => Ok(l),
        _ => Err(Error::resource(what, format!("dimension {len} exceeds the cap of {cap}"))),
    }
}

/// The monomial basis of `S^d(SⁿV)` in canonical order.
pub fn basis(dim_v: usize, d: usize, n: usize, cap: usize) -> Result<Vec<SymBasisElement>> {
    if dim_v == 0 || d == 0 || n == 0 {
        return Err(Error::validation("dim V, d and n must all be at least 1"));
    }
    if dim_v > u8::MAX as usize {
        return Err(Error::validation("dim V above 255 is not supported"));
    }
    let len = check_cap(
        &basis_len(dim_v, d, n),
        cap,
        format!("basis of S^{d}(S^{n}C^{dim_v})"),
    )?;
    let inner: Vec<Vec<u8>> = multisets(dim_v, n)
        .into_iter()
        .map(|m| m.into_iter().map(|v| v as u8).collect())
        .collect();
    let out: Vec<_> = multisets(inner.len(), d)
        .into_iter()
        .map(|idx| SymBasisElement::from_sorted(idx.into_iter().map(|i| inner[i].clone()).collect()))
        .collect();
    debug_assert_eq!(out.len(), len);
    Ok(out)
}

/// `(dn)! / (n!^d · d!)`: the number of partitions of `[dn]` into `d` blocks
/// of size `n`.
pub fn weight_zero_len(d: usize, n: usize) -> BigUint {
    let fact = |k: usize| (1..=k as u64).fold(BigUint::one(), |a, i| a * i);
    fact(d * n) / (num_traits::pow(fact(n), d) * fact(d))
}

/// Weight-zero monomials of `S^d(SⁿC^{dn})`: those using each of the `dn`
/// variables exactly once, i.e. set partitions of `[dn]` into `d` blocks of
/// size `n`, in canonical order.
pub fn weight_zero_basis(d: usize, n: usize, cap: usize) -> Result<Vec<SymBasisElement>> {
    if d == 0 || n == 0 {
        return Err(Error::validation("d and n must be at least 1"));
    }
    if d * n > u8::MAX as usize {
        return Err(Error::validation("dn above 255 is not supported"));
    }
    check_cap(
        &weight_zero_len(d, n),
        cap,
        format!("weight-zero subspace of S^{d}(S^{n}C^{})", d * n),
    )?;
    fn rec(remaining: &mut Vec<u8>, n: usize, cur: &mut Vec<Vec<u8>>, out: &mut Vec<SymBasisElement>) {
        if remaining.is_empty() {
            out.push(SymBasisElement::from_sorted(cur.clone()));
            return;
        }
        let head = remaining.remove(0);
        for rest in multisets(remaining.len(), n - 1) {
            if rest.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let mut block = vec![head];
            block.extend(rest.iter().map(|&i| remaining[i]));
            let mut left: Vec<u8> = remaining
                .iter()
                .enumerate()
                .filter(|(i, _)| !rest.contains(i))
                .map(|(_, &v)| v)
                .collect();
            cur.push(block);
            rec(&mut left, n, cur, out);
            cur.pop();
        }
        remaining.insert(0, head);
    }
    let mut out = Vec::new();
    rec(&mut (0..(d * n) as u8).collect(), n, &mut Vec::new(), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes() {
        assert_eq!(basis(2, 2, 2, 100).unwrap().len(), 6);
        assert_eq!(basis(2, 3, 2, 100).unwrap().len(), 10);
        for (d, n) in [(1, 1), (3, 2), (5, 4)] {
            assert_eq!(basis(1, d, n, 100).unwrap().len(), 1);
        }
        assert_eq!(basis_len(3, 2, 2), BigUint::from(21u32));
    }

    #[test]
    fn basis_is_sorted_and_shaped() {
        let b = basis(3, 3, 2, 1000).unwrap();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert!(b.iter().all(|e| e.check_shape(3, 3, 2).is_ok()));
        assert_eq!(b.len(), 56);
    }

    #[test]
    fn hermite_reciprocity_dimensions() {
        for d in 1..=6 {
            for n in 1..=6 {
                assert_eq!(basis_len(2, d, n), basis_len(2, n, d), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(basis(2, 6, 6, 100), Err(Error::Resource { .. })));
        assert!(matches!(weight_zero_basis(4, 4, 2000), Err(Error::Resource { .. })));
        assert_eq!(weight_zero_len(4, 4), BigUint::from(2_627_625u32));
    }

    #[test]
    fn weight_zero_sizes_match_pair_partition_oracle() {
        // Partitions of [4] into two pairs, listed by hand.
        let b = weight_zero_basis(2, 2, 100).unwrap();
        let expected = [
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0, 2], vec![1, 3]],
            vec![vec![0, 3], vec![1, 2]],
        ];
        assert_eq!(b.iter().map(|e| e.outer().to_vec()).collect::<Vec<_>>(), expected);
        assert_eq!(weight_zero_basis(2, 3, 100).unwrap().len(), 10);
        assert_eq!(weight_zero_basis(3, 2, 100).unwrap().len(), 15);
        assert_eq!(weight_zero_basis(3, 3, 1000).unwrap().len(), 280);
    }

    #[test]
    fn weight_zero_basis_matches_filtered_full_basis() {
        let full: Vec<_> = basis(4, 2, 2, 1000)
            .unwrap()
            .into_iter()
            .filter(|e| e.weight(4).iter().all(|&w| w == 1))
            .collect();
        assert_eq!(full, weight_zero_basis(2, 2, 100).unwrap());
    }

    #[test]
    fn display_labels() {
        let e = SymBasisElement::new(vec![vec![1, 0, 1], vec![0, 0, 1]]).unwrap();
        assert_eq!(e.to_string(), "(x1^2 x2)(x1 x2^2)");
    }
}

/// Monomials of `Sⁿ(SⁿCⁿ)` in which every variable has total exponent `n`
/// (the `sl`-weight-zero part), in canonical order.
pub fn balanced_monomials(n: usize) -> Result<Vec<SymBasisElement>> {
    if n == 0 || n > 6 {
        return Err(Error::validation("balanced monomials are built for 1 ≤ n ≤ 6"));
    }
    let inner: Vec<Vec<u8>> = multisets(n, n)
        .into_iter()
        .map(|m| m.into_iter().map(|v| v as u8).collect())
        .collect();
    // Recurse over inner monomials in index order with a running weight.
    fn rec(
        inner: &[Vec<u8>],
        n: usize,
        start: usize,
        weight: &mut Vec<usize>,
        cur: &mut Vec<Vec<u8>>,
        out: &mut Vec<SymBasisElement>,
    ) {
        if cur.len() == n {
            if weight.iter().all(|&w| w == n) {
                out.push(SymBasisElement::from_sorted(cur.clone()));
            }
            return;
        }
        for (i, m) in inner.iter().enumerate().skip(start) {
            if m.iter().any(|&v| {
                let extra = m.iter().filter(|&&x| x == v).count();
                weight[v as usize] + extra > n
            }) {
                continue;
            }
            for &v in m {
                weight[v as usize] += 1;
            }
            cur.push(m.clone());
            rec(inner, n, i, weight, cur, out);
            cur.pop();
            for &v in m {
                weight[v as usize] -= 1;
            }
        }
    }
    let mut out = Vec::new();
    rec(&inner, n, 0, &mut vec![0; n], &mut Vec::new(), &mut out);
    Ok(out)
}
