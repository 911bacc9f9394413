//! Sparse exact-rational matrices between labeled monomial bases, with rank
//! by fraction-free elimination.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::basis::SymBasisElement;
use crate::error::{Error, Result};

/// Largest block the dense elimination accepts.
pub const DENSE_ELIMINATION_CAP: usize = 2_000;

/// A linear map stored column by column: column `j` is the image of
/// `domain[j]` written in `codomain`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactLinearMap {
    pub(crate) domain: Vec<SymBasisElement>,
    pub(crate) codomain: Vec<SymBasisElement>,
    pub(crate) columns: Vec<Vec<(usize, BigRational)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub injective: bool,
    pub surjective: bool,
}

impl RankReport {
    pub fn is_isomorphism(&self) -> bool {
        self.injective && self.surjective
    }

    /// Rank equals the smaller of the two dimensions.
    pub fn is_max_rank(&self) -> bool {
        self.rank == self.rows.min(self.cols)
    }
}

impl ExactLinearMap {
    pub fn new(
        domain: Vec<SymBasisElement>,
        codomain: Vec<SymBasisElement>,
        columns: Vec<Vec<(usize, BigRational)>>,
    ) -> Result<Self> {
        if columns.len() != domain.len() {
            return Err(Error::contract(format!(
                "{} columns for a domain of dimension {}",
                columns.len(),
                domain.len()
            )));
        }
        if columns.iter().flatten().any(|(r, _)| *r >= codomain.len()) {
            return Err(Error::contract("row index outside the codomain"));
        }
        Ok(ExactLinearMap { domain, codomain, columns })
    }

    pub fn domain(&self) -> &[SymBasisElement] {
        &self.domain
    }

    pub fn codomain(&self) -> &[SymBasisElement] {
        &self.codomain
    }

    pub fn rows(&self) -> usize {
        self.codomain.len()
    }

    pub fn cols(&self) -> usize {
        self.domain.len()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> &[(usize, BigRational)] {
        &self.columns[j]
    }

    pub fn entry(&self, row: usize, col: usize) -> BigRational {
        self.columns[col]
            .iter()
            .find(|(r, _)| *r == row)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(BigRational::zero)
    }

    /// The submatrix on the given domain and codomain labels, in the order
    /// given. Missing labels are an error.
    pub fn restrict(
        &self,
        domain: &[SymBasisElement],
        codomain: &[SymBasisElement],
    ) -> Result<ExactLinearMap> {
        let col_of: HashMap<&SymBasisElement, usize> =
            self.domain.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let row_of: HashMap<&SymBasisElement, usize> =
            codomain.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut columns = Vec::with_capacity(domain.len());
        for e in domain {
            let j = *col_of
                .get(e)
                .ok_or_else(|| Error::validation(format!("{e} is not in the domain")))?;
            let mut col: Vec<(usize, BigRational)> = self.columns[j]
                .iter()
                .filter_map(|(r, v)| row_of.get(&self.codomain[*r]).map(|&k| (k, v.clone())))
                .collect();
            col.sort_by_key(|(r, _)| *r);
            columns.push(col);
        }
        ExactLinearMap::new(domain.to_vec(), codomain.to_vec(), columns)
    }

    /// Exact rank over ℚ.
    ///
    /// The matrix is split into the connected components of its row/column
    /// incidence graph (weight spaces for the Hadamard–Howe map); each block
    /// has its column denominators cleared and is eliminated with Bareiss'
    /// fraction-free scheme, pivoting on the first nonzero entry.
    pub fn rank(&self) -> Result<usize> {
        let (rows, cols) = (self.rows(), self.cols());
        let mut uf = UnionFind::new(rows + cols);
        for (j, col) in self.columns.iter().enumerate() {
            for (r, _) in col {
                uf.union(rows + j, *r);
            }
        }
        let mut blocks: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for j in 0..cols {
            if !self.columns[j].is_empty() {
                blocks.entry(uf.find(rows + j)).or_default().1.push(j);
            }
        }
        for r in 0..rows {
            let root = uf.find(r);
            if let Some(b) = blocks.get_mut(&root) {
                b.0.push(r);
            }
        }
        let mut rank = 0;
        for (block_rows, block_cols) in blocks.values() {
            let size = block_rows.len().max(block_cols.len());
            if size > DENSE_ELIMINATION_CAP {
                return Err(Error::resource(
                    "dense exact elimination",
                    format!("block of size {size} exceeds {DENSE_ELIMINATION_CAP}"),
                ));
            }
            let local: HashMap<usize, usize> =
                block_rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
            let mut dense = vec![vec![BigInt::zero(); block_cols.len()]; block_rows.len()];
            for (cj, &j) in block_cols.iter().enumerate() {
                let lcm = self.columns[j]
                    .iter()
                    .fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
                for (r, v) in &self.columns[j] {
                    dense[local[r]][cj] = v.numer() * (&lcm / v.denom());
                }
            }
            rank += bareiss_rank(dense);
        }
        Ok(rank)
    }

    pub fn rank_report(&self) -> Result<RankReport> {
        let rank = self.rank()?;
        Ok(RankReport {
            rows: self.rows(),
            cols: self.cols(),
            rank,
            injective: rank == self.cols(),
            surjective: rank == self.rows(),
        })
    }

    /// Sparse triplet text with both basis labels inlined on every line.
    ///
    /// ```text
    /// # linear map rows 10 cols 10 nnz 28
    /// 1 1 1 (x1^3)(x2^3) <- (x1^2)(x1^2)(x2^2)
    /// ```
    /// Indices are one-based; entries are listed column by column.
    pub fn to_triplet_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# linear map rows {} cols {} nnz {}",
            self.rows(),
            self.cols(),
            self.nnz()
        );
        for (j, col) in self.columns.iter().enumerate() {
            for (r, v) in col {
                let _ = writeln!(
                    s,
                    "{} {} {} {} <- {}",
                    r + 1,
                    j + 1,
                    v,
                    self.codomain[*r],
                    self.domain[j]
                );
            }
        }
        s
    }
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination. Each
/// division by the previous pivot is exact.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = &pivot_row[c];
        for row in rest.iter_mut() {
            let lead = std::mem::take(&mut row[c]);
            for k in c + 1..cols {
                let v = &row[k] * pivot - &lead * &pivot_row[k];
                row[k] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = pivot.clone();
        r += 1;
    }
    r
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
