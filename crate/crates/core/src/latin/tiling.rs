use num_bigint::BigInt;

use super::search::MAX_ORDER;
use super::EnumerationLimit;
use crate::error::Result;

/// Coefficient of `Π_{i,j} g[i][j]` in `det_nⁿ`.
///
/// Expanding `detⁿ` as a sum over ordered `n`-tuples `(σ₁, …, σₙ)`, a tuple
/// reaches the all-entries monomial exactly when the graphs
/// `{(i, σₖ(i))}` partition the `n × n` grid. The search picks `σ₁, σ₂, …`
/// row by row from the cells still free and sums `Π sign(σₖ)`.
pub fn det_power_coefficient(n: usize, limit: EnumerationLimit) -> Result<BigInt> {
    limit.check(n)?;
    let mut t = Tiler {
        n,
        free: [(1u16 << n) - 1; MAX_ORDER],
        sum: 0,
    };
    t.place(0, 0, 0, false);
    Ok(BigInt::from(t.sum))
}

struct Tiler {
    n: usize,
    /// Free columns per row.
    free: [u16; MAX_ORDER],
    sum: i64,
}

impl Tiler {
    /// Chooses `σ_k(row)` given the columns `used` by `σ_k` on earlier rows.
    fn place(&mut self, k: usize, row: usize, used: u16, odd: bool) {
        let n = self.n;
        if k == n - 1 {
            self.finish(odd);
            return;
        }
        if row == n {
            self.place(k + 1, 0, 0, odd);
            return;
        }
        let mut avail = self.free[row] & !used;
        while avail != 0 {
            let j = avail.trailing_zeros();
            avail &= avail - 1;
            let bit = 1u16 << j;
            let inv = (used >> (j + 1)).count_ones() & 1 == 1;
            self.free[row] &= !bit;
            self.place(k, row + 1, used | bit, odd ^ inv);
            self.free[row] |= bit;
        }
    }

    /// The last permutation takes the one free cell left in each row; it is
    /// a permutation only if those cells hit distinct columns.
    fn finish(&mut self, mut odd: bool) {
        let mut used = 0u16;
        for row in 0..self.n {
            let cell = self.free[row];
            if cell.count_ones() != 1 || used & cell != 0 {
                return;
            }
            let j = cell.trailing_zeros();
            odd ^= (used >> (j + 1)).count_ones() & 1 == 1;
            used |= cell;
        }
        self.sum += if odd { -1 } else { 1 };
    }
}
