use std::fmt;

use crate::error::{Error, Result};
use crate::perm::{Permutation, Sign};

/// An `n × n` array whose rows and columns are permutations of `[n]`.
///
/// Row `i` is stored as the permutation `j ↦ L[i][j]`; symbols are
/// zero-based internally and printed one-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatinSquare {
    rows: Vec<Permutation>,
}

/// Row, column and total sign of a Latin square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignTriple {
    pub row_sign: Sign,
    pub col_sign: Sign,
    pub total_sign: Sign,
}

impl SignTriple {
    pub fn new(row_sign: Sign, col_sign: Sign) -> Self {
        SignTriple {
            row_sign,
            col_sign,
            total_sign: row_sign * col_sign,
        }
    }
}

impl LatinSquare {
    /// Validates rows given as zero-based symbol vectors.
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.len();
        let rows = rows
            .into_iter()
            .map(|r| {
                if r.len() != n {
                    Err(Error::validation(format!("row of length {} in a square of order {n}", r.len())))
                } else {
                    Permutation::new(r)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let square = LatinSquare { rows };
        for j in 0..n {
            Permutation::new(square.column(j))
                .map_err(|_| Error::validation(format!("column {} is not a permutation", j + 1)))?;
        }
        Ok(square)
    }

    /// Validates rows given with one-based symbols.
    pub fn from_one_based(rows: &[Vec<usize>]) -> Result<Self> {
        let zero = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&x| {
                        if x == 0 || x > u8::MAX as usize {
                            Err(Error::validation(format!("symbol {x} out of range")))
                        } else {
                            Ok((x - 1) as u8)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        LatinSquare::from_rows(zero)
    }

    pub(crate) fn from_grid_unchecked(n: usize, grid: &[u8]) -> Self {
        LatinSquare {
            rows: grid[..n * n]
                .chunks(n)
                .map(|r| Permutation::from_images_unchecked(r.to_vec()))
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.rows[i].images()[j]
    }

    pub fn rows(&self) -> &[Permutation] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        self.rows.iter().map(|r| r.images()[j]).collect()
    }

    pub fn transpose(&self) -> LatinSquare {
        let n = self.order();
        LatinSquare {
            rows: (0..n)
                .map(|j| Permutation::from_images_unchecked(self.column(j)))
                .collect(),
        }
    }

    /// Applies `relabel` to every symbol.
    pub fn relabel_symbols(&self, relabel: &Permutation) -> Result<LatinSquare> {
        Ok(LatinSquare {
            rows: self
                .rows
                .iter()
                .map(|r| relabel.compose(r))
                .collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn sign_data(&self) -> SignTriple {
        let row_sign = self.rows.iter().fold(Sign::Plus, |acc, r| acc * r.sign());
        let col_sign = (0..self.order()).fold(Sign::Plus, |acc, j| {
            acc * Permutation::from_images_unchecked(self.column(j)).sign()
        });
        SignTriple::new(row_sign, col_sign)
    }
}

impl fmt::Display for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_data_examples() {
        let one = LatinSquare::from_one_based(&[vec![1]]).unwrap();
        assert_eq!(one.sign_data(), SignTriple::new(Sign::Plus, Sign::Plus));

        let two = LatinSquare::from_one_based(&[vec![1, 2], vec![2, 1]]).unwrap();
        let s = two.sign_data();
        assert_eq!((s.row_sign, s.col_sign, s.total_sign), (Sign::Minus, Sign::Minus, Sign::Plus));

        let cyc = LatinSquare::from_one_based(&[vec![1, 2, 3], vec![2, 3, 1], vec![3, 1, 2]]).unwrap();
        let s = cyc.sign_data();
        assert_eq!((s.row_sign, s.col_sign, s.total_sign), (Sign::Plus, Sign::Plus, Sign::Plus));
    }

    #[test]
    fn invalid_squares_rejected() {
        assert!(LatinSquare::from_one_based(&[vec![1, 2], vec![1, 2]]).is_err());
        assert!(LatinSquare::from_one_based(&[vec![1, 1], vec![2, 2]]).is_err());
        assert!(LatinSquare::from_one_based(&[vec![1, 2, 3], vec![2, 3, 1]]).is_err());
        assert!(LatinSquare::from_one_based(&[vec![0]]).is_err());
    }
}
