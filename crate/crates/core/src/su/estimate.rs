use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::haar::{haar_su, ComplexMatrix};
use crate::error::{Error, Result};
use crate::latin::with_pool;

pub const DEFAULT_SEED: u64 = 0x00A7_5EED;
pub const DEFAULT_CHUNK_SIZE: u64 = 4096;
pub const DEFAULT_SAMPLES: u64 = 100_000;

/// Sampling parameters. Results depend on `samples`, `seed` and
/// `chunk_size` only; `threads` changes the schedule, not the numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub threads: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            chunk_size: DEFAULT_CHUNK_SIZE,
            threads: None,
        }
    }
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig { samples, seed, ..Default::default() }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::validation("at least two samples are needed for an error bar"));
        }
        if self.chunk_size == 0 {
            return Err(Error::validation("chunk size must be positive"));
        }
        Ok(())
    }

    fn chunks(&self) -> u64 {
        self.samples.div_ceil(self.chunk_size)
    }
}

/// Streaming mean and variance (Welford; Chan's rule for merging).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with the `count − 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Monte-Carlo estimate of a complex integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
}

impl McEstimate {
    /// `|Re(mean) − target| ≤ k · stderr_re`.
    pub fn re_within(&self, target: f64, k: f64) -> bool {
        (self.mean.re - target).abs() <= k * self.stderr_re
    }

    pub fn im_within(&self, target: f64, k: f64) -> bool {
        (self.mean.im - target).abs() <= k * self.stderr_im
    }

    pub fn is_finite(&self) -> bool {
        self.mean.re.is_finite() && self.mean.im.is_finite() && self.stderr_re.is_finite() && self.stderr_im.is_finite()
    }
}

/// Estimates `k` complex integrals of `f` jointly over the same Haar draws.
///
/// Chunk `c` draws `chunk_size` samples (fewer for the last) from a ChaCha8
/// generator keyed by `seed` on stream `c`. Per-chunk accumulators are merged
/// in chunk order.
pub fn estimate_many<F>(n: usize, k: usize, cfg: &McConfig, f: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&ComplexMatrix, &mut [Complex64]) + Sync,
{
    cfg.check()?;
    if n == 0 {
        return Err(Error::validation("SU(n) needs n ≥ 1"));
    }
    let chunk = |c: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(c);
        let len = cfg.chunk_size.min(cfg.samples - c * cfg.chunk_size);
        let mut acc = vec![(Welford::default(), Welford::default()); k];
        let mut out = vec![Complex64::new(0.0, 0.0); k];
        for _ in 0..len {
            let g = haar_su(n, &mut rng);
            f(&g, &mut out);
            for (a, v) in acc.iter_mut().zip(&out) {
                a.0.push(v.re);
                a.1.push(v.im);
            }
        }
        acc
    };
    let parts: Vec<Vec<(Welford, Welford)>> =
        with_pool(cfg.threads, || (0..cfg.chunks()).into_par_iter().map(chunk).collect());
    let mut total = vec![(Welford::default(), Welford::default()); k];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.0.merge(&p.0);
            t.1.merge(&p.1);
        }
    }
    Ok(total
        .into_iter()
        .map(|(re, im)| McEstimate {
            mean: Complex64::new(re.mean(), im.mean()),
            stderr_re: re.stderr(),
            stderr_im: im.stderr(),
            samples: cfg.samples,
            seed: cfg.seed,
            chunk_size: cfg.chunk_size,
        })
        .collect())
}

pub fn estimate<F>(n: usize, cfg: &McConfig, f: F) -> Result<McEstimate>
where
    F: Fn(&ComplexMatrix) -> Complex64 + Sync,
{
    Ok(estimate_many(n, 1, cfg, |g, out| out[0] = f(g))?[0])
}
