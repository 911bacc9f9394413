//! Row-by-row backtracking over Latin squares with bitmask bookkeeping.
//!
//! Cells are filled top to bottom, left to right, symbols ascending. Row and
//! column parities are maintained incrementally: placing symbol `s` adds one
//! inversion for every larger symbol already present in the same row (resp.
//! column). The last row of an `(n−1) × n` Latin rectangle is forced, so it
//! is completed directly.

/// Largest order the fixed-size buffers support.
pub(crate) const MAX_ORDER: usize = 6;

/// A partial square covering a prefix of cells, with its parities.
#[derive(Debug, Clone)]
pub(crate) struct Prefix {
    pub grid: [u8; MAX_ORDER * MAX_ORDER],
    pub row_used: [u16; MAX_ORDER],
    pub col_used: [u16; MAX_ORDER],
    pub row_odd: bool,
    pub col_odd: bool,
}

pub(crate) struct Search<F> {
    n: usize,
    full: u16,
    grid: [u8; MAX_ORDER * MAX_ORDER],
    row_used: [u16; MAX_ORDER],
    col_used: [u16; MAX_ORDER],
    /// Called on each complete square with `(grid, row_odd, col_odd)`.
    leaf: F,
}

impl<F: FnMut(&[u8], bool, bool)> Search<F> {
    pub fn new(n: usize, leaf: F) -> Self {
        assert!((1..=MAX_ORDER).contains(&n));
        Search {
            n,
            full: (1u16 << n) - 1,
            grid: [0; MAX_ORDER * MAX_ORDER],
            row_used: [0; MAX_ORDER],
            col_used: [0; MAX_ORDER],
            leaf,
        }
    }

    /// Runs the search below `prefix`, which must cover whole rows.
    pub fn run_from(&mut self, prefix: &Prefix, rows_done: usize) {
        self.grid = prefix.grid;
        self.row_used = prefix.row_used;
        self.col_used = prefix.col_used;
        self.fill(rows_done * self.n, prefix.row_odd, prefix.col_odd);
    }

    pub fn run(&mut self) {
        self.fill(0, false, false);
    }

    fn fill(&mut self, pos: usize, row_odd: bool, col_odd: bool) {
        let n = self.n;
        let (r, c) = (pos / n, pos % n);
        if r == n - 1 {
            self.finish_last_row(row_odd, col_odd);
            return;
        }
        let mut avail = self.full & !self.row_used[r] & !self.col_used[c];
        while avail != 0 {
            let s = avail.trailing_zeros();
            avail &= avail - 1;
            let bit = 1u16 << s;
            let row_inv = (self.row_used[r] >> (s + 1)).count_ones() & 1 == 1;
            let col_inv = (self.col_used[c] >> (s + 1)).count_ones() & 1 == 1;
            self.grid[pos] = s as u8;
            self.row_used[r] |= bit;
            self.col_used[c] |= bit;
            self.fill(pos + 1, row_odd ^ row_inv, col_odd ^ col_inv);
            self.row_used[r] &= !bit;
            self.col_used[c] &= !bit;
        }
    }

    fn finish_last_row(&mut self, mut row_odd: bool, mut col_odd: bool) {
        let n = self.n;
        let base = (n - 1) * n;
        let mut row_mask = 0u16;
        for c in 0..n {
            let missing = self.full & !self.col_used[c];
            debug_assert_eq!(missing.count_ones(), 1);
            let s = missing.trailing_zeros();
            row_odd ^= (row_mask >> (s + 1)).count_ones() & 1 == 1;
            col_odd ^= (self.col_used[c] >> (s + 1)).count_ones() & 1 == 1;
            row_mask |= 1 << s;
            self.grid[base + c] = s as u8;
        }
        (self.leaf)(&self.grid[..n * n], row_odd, col_odd);
    }
}

/// All partial squares on the first `rows` rows, in canonical order.
pub(crate) fn prefixes(n: usize, rows: usize) -> Vec<Prefix> {
    assert!(rows < n);
    let mut out = Vec::new();
    let mut p = Prefix {
        grid: [0; MAX_ORDER * MAX_ORDER],
        row_used: [0; MAX_ORDER],
        col_used: [0; MAX_ORDER],
        row_odd: false,
        col_odd: false,
    };
    collect_prefixes(n, rows * n, 0, &mut p, &mut out);
    out
}

fn collect_prefixes(n: usize, stop: usize, pos: usize, p: &mut Prefix, out: &mut Vec<Prefix>) {
    if pos == stop {
        out.push(p.clone());
        return;
    }
    let (r, c) = (pos / n, pos % n);
    let full = (1u16 << n) - 1;
    let mut avail = full & !p.row_used[r] & !p.col_used[c];
    while avail != 0 {
        let s = avail.trailing_zeros();
        avail &= avail - 1;
        let bit = 1u16 << s;
        let (ro, co) = (p.row_odd, p.col_odd);
        p.row_odd ^= (p.row_used[r] >> (s + 1)).count_ones() & 1 == 1;
        p.col_odd ^= (p.col_used[c] >> (s + 1)).count_ones() & 1 == 1;
        p.grid[pos] = s as u8;
        p.row_used[r] |= bit;
        p.col_used[c] |= bit;
        collect_prefixes(n, stop, pos + 1, p, out);
        p.row_used[r] &= !bit;
        p.col_used[c] &= !bit;
        p.row_odd = ro;
        p.col_odd = co;
    }
}

/// Rows enumerated serially before sharding.
pub(crate) fn prefix_rows(n: usize) -> usize {
    2.min(n - 1)
}
