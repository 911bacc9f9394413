//! Signed Latin square censuses.
//!
//! `census` counts squares by total, row and column sign in one pass;
//! `det_power_coefficient` counts the same objects as tilings of the grid by
//! permutation graphs, which is how they appear as the coefficient of the
//! all-entries monomial in `detⁿ`.

mod search;
mod square;
mod tiling;

use std::sync::mpsc;
use std::time::Instant;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use search::{prefix_rows, prefixes, Search, MAX_ORDER};

pub use square::{LatinSquare, SignTriple};
pub use tiling::det_power_coefficient;

/// Order above which enumeration needs an explicit opt-in.
pub const LARGE_ORDER: usize = 6;

/// Bounds on the orders the enumerators accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimit {
    pub max_order: usize,
    /// Order 6 (812,851,200 squares) is a long batch job; it is refused
    /// unless this is set.
    pub allow_large: bool,
}

impl Default for EnumerationLimit {
    fn default() -> Self {
        EnumerationLimit {
            max_order: LARGE_ORDER,
            allow_large: false,
        }
    }
}

impl EnumerationLimit {
    pub fn large() -> Self {
        EnumerationLimit {
            allow_large: true,
            ..Default::default()
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::validation("Latin square order must be at least 1"));
        }
        let cap = self.max_order.min(MAX_ORDER);
        if n > cap {
            return Err(Error::resource(
                format!("Latin square enumeration at order {n}"),
                format!("orders above {cap} are not supported"),
            ));
        }
        if n >= LARGE_ORDER && !self.allow_large {
            return Err(Error::resource(
                format!("Latin square enumeration at order {n}"),
                "order 6 needs the allow-large opt-in",
            ));
        }
        Ok(())
    }
}

/// Options shared by the enumerating operations.
#[derive(Debug, Clone, Copy, Default)]
pub struct CensusOptions {
    pub limit: EnumerationLimit,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl CensusOptions {
    pub fn with_threads(threads: usize) -> Self {
        CensusOptions {
            threads: Some(threads),
            ..Default::default()
        }
    }
}

pub(crate) fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}

/// Exact counts of Latin squares of one order by sign class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedCensus {
    pub n: usize,
    pub total: BigInt,
    pub even: BigInt,
    pub odd: BigInt,
    pub col_even: BigInt,
    pub col_odd: BigInt,
    pub row_even: BigInt,
    pub row_odd: BigInt,
}

impl SignedCensus {
    /// Builds a census from counts indexed by `(row_odd as usize) << 1 | col_odd`.
    fn from_buckets(n: usize, b: [u64; 4]) -> Self {
        let big = |x: u64| BigInt::from(x);
        let [ee, eo, oe, oo] = b;
        SignedCensus {
            n,
            total: big(ee + eo + oe + oo),
            even: big(ee + oo),
            odd: big(eo + oe),
            col_even: big(ee + oe),
            col_odd: big(eo + oo),
            row_even: big(ee + eo),
            row_odd: big(oe + oo),
        }
    }

    /// Even minus odd squares (by total sign).
    pub fn at_difference(&self) -> BigInt {
        &self.even - &self.odd
    }

    /// Column-even minus column-odd squares.
    pub fn col_difference(&self) -> BigInt {
        &self.col_even - &self.col_odd
    }

    pub fn row_difference(&self) -> BigInt {
        &self.row_even - &self.row_odd
    }
}

/// Result of one census run with its bookkeeping.
#[derive(Debug, Clone)]
pub struct CensusRun {
    pub census: SignedCensus,
    pub shard_count: usize,
    pub elapsed_ms: u64,
}

pub const CENSUS_SCHEMA_VERSION: u32 = 1;

/// Versioned on-disk / stdout form of a census.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct CensusRecord {
    pub schema_version: u32,
    pub op: String,
    pub n: usize,
    pub total: String,
    pub even: String,
    pub odd: String,
    pub col_even: String,
    pub col_odd: String,
    pub row_even: String,
    pub row_odd: String,
    pub at_difference: String,
    pub col_difference: String,
    pub elapsed_ms: u64,
    pub shard_count: usize,
}

impl CensusRecord {
    pub fn from_run(run: &CensusRun) -> Self {
        let c = &run.census;
        CensusRecord {
            schema_version: CENSUS_SCHEMA_VERSION,
            op: "latin-census".to_string(),
            n: c.n,
            total: c.total.to_string(),
            even: c.even.to_string(),
            odd: c.odd.to_string(),
            col_even: c.col_even.to_string(),
            col_odd: c.col_odd.to_string(),
            row_even: c.row_even.to_string(),
            row_odd: c.row_odd.to_string(),
            at_difference: c.at_difference().to_string(),
            col_difference: c.col_difference().to_string(),
            elapsed_ms: run.elapsed_ms,
            shard_count: run.shard_count,
        }
    }

    pub fn to_census(&self) -> Result<SignedCensus> {
        let p = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|_| Error::validation(format!("bad count {s:?} in census record")))
        };
        Ok(SignedCensus {
            n: self.n,
            total: p(&self.total)?,
            even: p(&self.even)?,
            odd: p(&self.odd)?,
            col_even: p(&self.col_even)?,
            col_odd: p(&self.col_odd)?,
            row_even: p(&self.row_even)?,
            row_odd: p(&self.row_odd)?,
        })
    }
}

/// Sign-class census in one enumeration pass.
///
/// The first two rows are enumerated serially; the search below each such
/// prefix is one shard. Shard results are summed in shard order.
pub fn census_run(n: usize, opts: CensusOptions) -> Result<CensusRun> {
    opts.limit.check(n)?;
    let start = Instant::now();
    let rows = prefix_rows(n);
    let shards = prefixes(n, rows);
    let per_shard: Vec<[u64; 4]> = with_pool(opts.threads, || {
        shards
            .par_iter()
            .map(|p| {
                let mut b = [0u64; 4];
                Search::new(n, |_: &[u8], ro: bool, co: bool| {
                    b[((ro as usize) << 1) | co as usize] += 1;
                })
                .run_from(p, rows);
                b
            })
            .collect()
    });
    let mut total = [0u64; 4];
    for b in &per_shard {
        for k in 0..4 {
            total[k] += b[k];
        }
    }
    Ok(CensusRun {
        census: SignedCensus::from_buckets(n, total),
        shard_count: shards.len(),
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

pub fn census(n: usize, opts: CensusOptions) -> Result<SignedCensus> {
    census_run(n, opts).map(|r| r.census)
}

pub fn at_difference(n: usize, opts: CensusOptions) -> Result<BigInt> {
    census(n, opts).map(|c| c.at_difference())
}

pub fn col_difference(n: usize, opts: CensusOptions) -> Result<BigInt> {
    census(n, opts).map(|c| c.col_difference())
}

/// `|even − odd| = |col_even − col_odd|`.
pub fn huang_rota_verify(n: usize, opts: CensusOptions) -> Result<bool> {
    let c = census(n, opts)?;
    Ok(c.at_difference().magnitude() == c.col_difference().magnitude())
}

/// Visits every Latin square of order `n` exactly once in canonical order
/// on the calling thread and returns the count.
pub fn enumerate<F: FnMut(&LatinSquare)>(
    n: usize,
    limit: EnumerationLimit,
    mut visit: F,
) -> Result<BigInt> {
    limit.check(n)?;
    let mut count = 0u64;
    Search::new(n, |grid: &[u8], _: bool, _: bool| {
        count += 1;
        visit(&LatinSquare::from_grid_unchecked(n, grid));
    })
    .run();
    Ok(BigInt::from(count))
}

/// Like [`enumerate`], but shards run on the worker pool and squares reach
/// `visit` (still on the calling thread) in no particular order.
pub fn enumerate_streaming<F: FnMut(LatinSquare)>(
    n: usize,
    opts: CensusOptions,
    mut visit: F,
) -> Result<BigInt> {
    opts.limit.check(n)?;
    let rows = prefix_rows(n);
    let shards = prefixes(n, rows);
    let (tx, rx) = mpsc::sync_channel::<Vec<LatinSquare>>(64);
    let mut count = 0u64;
    std::thread::scope(|scope| {
        let shards = &shards;
        scope.spawn(move || {
            with_pool(opts.threads, || {
                shards.par_iter().for_each_with(tx, |tx, p| {
                    let mut batch = Vec::new();
                    Search::new(n, |grid: &[u8], _: bool, _: bool| {
                        batch.push(LatinSquare::from_grid_unchecked(n, grid));
                    })
                    .run_from(p, rows);
                    // The receiver lives until every sender is dropped.
                    let _ = tx.send(batch);
                });
            });
        });
        for batch in rx {
            for sq in batch {
                count += 1;
                visit(sq);
            }
        }
    });
    Ok(BigInt::from(count))
}
