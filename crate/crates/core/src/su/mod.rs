//! Haar sampling on `SU(n)` and Monte-Carlo estimates of
//! `∫ perm(g)ⁿ dμ`, `∫ Π gⁱⱼ dμ` and the Haar average of `g·(e₁⋯eₙ)ⁿ`.

mod estimate;
mod haar;
mod permanent;

use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::howe::{balanced_monomials, pstar_coefficients, SymBasisElement};
use permanent::permanent_unchecked;

pub use estimate::{
    estimate, estimate_many, McConfig, McEstimate, Welford, DEFAULT_CHUNK_SIZE, DEFAULT_SAMPLES, DEFAULT_SEED,
};
pub use haar::{det_defect, haar_su, unitarity_defect, ComplexMatrix};
pub use permanent::{permanent, PERMANENT_MAX};

pub const MC_SCHEMA_VERSION: u32 = 1;

/// Largest order for the sampled integrals (the permanent cap).
pub const MC_MAX_ORDER: usize = PERMANENT_MAX;

/// Default and opt-in caps for the projection estimate.
pub const PROJECTION_MAX_ORDER: usize = 2;
pub const PROJECTION_LARGE_ORDER: usize = 4;

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("SU(n) needs n ≥ 1"));
    }
    if n > MC_MAX_ORDER {
        return Err(Error::resource(format!("integrals over SU({n})"), format!("n above {MC_MAX_ORDER}")));
    }
    Ok(())
}

/// The two scalar integrands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrand {
    /// `perm(g)ⁿ`
    PermPower,
    /// `Π_{i,j} gⁱⱼ`
    EntryProduct,
}

impl Integrand {
    pub fn name(self) -> &'static str {
        match self {
            Integrand::PermPower => "perm-power",
            Integrand::EntryProduct => "entry-product",
        }
    }

    pub fn eval(self, g: &ComplexMatrix) -> Complex64 {
        match self {
            Integrand::PermPower => permanent_unchecked(g).powu(g.nrows() as u32),
            Integrand::EntryProduct => g.iter().product(),
        }
    }
}

impl std::str::FromStr for Integrand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perm-power" => Ok(Integrand::PermPower),
            "entry-product" => Ok(Integrand::EntryProduct),
            _ => Err(Error::validation(format!("unknown integrand {s:?}"))),
        }
    }
}

pub fn mc_integral(n: usize, integrand: Integrand, cfg: &McConfig) -> Result<McEstimate> {
    check_order(n)?;
    estimate(n, cfg, |g| integrand.eval(g))
}

pub fn mc_perm_power(n: usize, cfg: &McConfig) -> Result<McEstimate> {
    mc_integral(n, Integrand::PermPower, cfg)
}

pub fn mc_entry_product(n: usize, cfg: &McConfig) -> Result<McEstimate> {
    mc_integral(n, Integrand::EntryProduct, cfg)
}

/// Estimated coefficients of the Haar average of `g·(e₁⋯eₙ)ⁿ` on the
/// balanced monomials of `Sⁿ(SⁿCⁿ)`.
///
/// Coefficients are per ordered arrangement of inner factors, as in
/// [`crate::howe::PStar`]: the entry for `e^{α₁}⋯e^{αₙ}` is `Π_k c_{αₖ}`
/// with `c_α` the coefficient of `e^α` in `(g e₁)⋯(g eₙ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub n: usize,
    pub monomials: Vec<SymBasisElement>,
    pub estimates: Vec<McEstimate>,
}

impl Projection {
    pub fn estimate_of(&self, e: &SymBasisElement) -> Option<&McEstimate> {
        self.monomials.iter().position(|m| m == e).map(|i| &self.estimates[i])
    }

    /// Cosine between the real parts of the estimates and the exact `P*`
    /// vector on the same monomials. The sign is kept.
    pub fn cosine_to_pstar(&self) -> Result<f64> {
        let p = pstar_coefficients(self.n)?;
        let exact: Vec<f64> = self
            .monomials
            .iter()
            .map(|m| p.coefficient(m).to_f64().unwrap_or(f64::NAN))
            .collect();
        let est: Vec<f64> = self.estimates.iter().map(|e| e.mean.re).collect();
        Ok(cosine(&est, &exact))
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn mc_projection_power(n: usize, cfg: &McConfig, allow_large: bool) -> Result<Projection> {
    let cap = if allow_large { PROJECTION_LARGE_ORDER } else { PROJECTION_MAX_ORDER };
    if n == 0 {
        return Err(Error::validation("SU(n) needs n ≥ 1"));
    }
    if n > cap {
        return Err(Error::resource(
            format!("projection estimate at n = {n}"),
            format!("orders above {cap} are refused{}", if allow_large { "" } else { " without allow-large" }),
        ));
    }
    let monomials = balanced_monomials(n)?;
    let mut inner: Vec<Vec<u8>> = Vec::new();
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let slots: Vec<Vec<usize>> = monomials
        .iter()
        .map(|b| {
            b.outer()
                .iter()
                .map(|m| {
                    *index.entry(m.clone()).or_insert_with(|| {
                        inner.push(m.clone());
                        inner.len() - 1
                    })
                })
                .collect()
        })
        .collect();
    // c_α = perm(rows α of g) / α!
    let inv_fact: Vec<f64> = inner
        .iter()
        .map(|m| {
            let mut f = 1.0;
            let mut k = 0;
            while k < m.len() {
                let run = m[k..].iter().take_while(|&&x| x == m[k]).count();
                f *= (1..=run).product::<usize>() as f64;
                k += run;
            }
            1.0 / f
        })
        .collect();
    let estimates = estimate_many(n, monomials.len(), cfg, |g, out| {
        let c: Vec<Complex64> = inner
            .iter()
            .zip(&inv_fact)
            .map(|(rows, w)| {
                let sub = ComplexMatrix::from_fn(n, n, |i, j| g[(rows[i] as usize, j)]);
                permanent_unchecked(&sub) * *w
            })
            .collect();
        for (o, s) in out.iter_mut().zip(&slots) {
            *o = s.iter().map(|&k| c[k]).product();
        }
    })?;
    Ok(Projection { n, monomials, estimates })
}

/// Ratio of the two scalar integrals against the exact `P*` ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub n: usize,
    pub perm_power: McEstimate,
    pub entry_product: McEstimate,
    pub mc_ratio: f64,
    /// First-order propagated error of `mc_ratio` (independent legs).
    pub mc_ratio_stderr: f64,
    pub exact_ratio: f64,
    pub agrees: bool,
}

/// Seed for the entry-product leg, derived so the two legs are independent.
pub fn entry_leg_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ 0xD1B5_4A32_D192_ED03
}

pub fn ratio_consistency(n: usize, cfg: &McConfig) -> Result<RatioReport> {
    if n != 2 {
        return Err(Error::validation(format!("ratio consistency is checked at n = 2 only (got {n})")));
    }
    let a = mc_perm_power(n, cfg)?;
    let b = mc_entry_product(n, &cfg.with_seed(entry_leg_seed(cfg.seed)))?;
    let ratio = a.mean.re / b.mean.re;
    let sigma = ((a.stderr_re / b.mean.re).powi(2) + (ratio * b.stderr_re / b.mean.re).powi(2)).sqrt();
    let exact = pstar_coefficients(n)?.product_to_powers_ratio().to_f64().unwrap_or(f64::NAN);
    Ok(RatioReport {
        n,
        perm_power: a,
        entry_product: b,
        mc_ratio: ratio,
        mc_ratio_stderr: sigma,
        exact_ratio: exact,
        agrees: (ratio - exact).abs() <= 3.0 * sigma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StderrPair {
    pub re: f64,
    pub im: f64,
}

/// Versioned record of one scalar estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub schema_version: u32,
    pub op: String,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr: StderrPair,
    pub elapsed_ms: u64,
}

impl McRecord {
    pub fn new(op: impl Into<String>, n: usize, e: &McEstimate, elapsed_ms: u64) -> Self {
        McRecord {
            schema_version: MC_SCHEMA_VERSION,
            op: op.into(),
            n,
            samples: e.samples,
            seed: e.seed,
            chunk_size: e.chunk_size,
            mean_re: e.mean.re,
            mean_im: e.mean.im,
            stderr: StderrPair { re: e.stderr_re, im: e.stderr_im },
            elapsed_ms,
        }
    }
}

/// Runs one integral and wraps it in a record.
pub fn integrate_record(n: usize, integrand: Integrand, cfg: &McConfig) -> Result<McRecord> {
    let t = Instant::now();
    let e = mc_integral(n, integrand, cfg)?;
    Ok(McRecord::new(format!("integrate-{}", integrand.name()), n, &e, t.elapsed().as_millis() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::howe::PStar;
    use crate::poly::{apolar_pair, det_poly, entry_product};
    use num_traits::Signed;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(samples: u64) -> McConfig {
        McConfig::new(samples, DEFAULT_SEED)
    }

    #[test]
    fn trivial_group_is_exact() {
        for i in [Integrand::PermPower, Integrand::EntryProduct] {
            let e = mc_integral(1, i, &cfg(1000)).unwrap();
            assert_eq!(e.mean, Complex64::new(1.0, 0.0));
            assert_eq!(e.stderr_re, 0.0);
        }
    }

    #[test]
    fn su2_closed_forms() {
        let p = mc_perm_power(2, &cfg(100_000)).unwrap();
        assert!(p.re_within(1.0 / 3.0, 3.0), "{p:?}");
        assert!(p.stderr_re <= 0.01);
        let e = mc_entry_product(2, &cfg(100_000)).unwrap();
        assert!(e.re_within(-1.0 / 6.0, 3.0), "{e:?}");
        assert!(e.im_within(0.0, 3.0), "{e:?}");
    }

    #[test]
    fn first_and_second_moments() {
        for n in 2..=4 {
            let k = n * n;
            let est = estimate_many(n, k + k * k, &cfg(100_000), |g, out| {
                let flat: Vec<Complex64> = (0..k).map(|t| g[(t / n, t % n)]).collect();
                out[..k].copy_from_slice(&flat);
                for a in 0..k {
                    for b in 0..k {
                        out[k + a * k + b] = flat[a] * flat[b].conj();
                    }
                }
            })
            .unwrap();
            for e in &est[..k] {
                assert!(e.re_within(0.0, 3.5) && e.im_within(0.0, 3.5), "n={n} {e:?}");
            }
            for a in 0..k {
                for b in 0..k {
                    let e = &est[k + a * k + b];
                    let target = if a == b { 1.0 / n as f64 } else { 0.0 };
                    assert!(e.re_within(target, 4.0), "n={n} a={a} b={b} {e:?}");
                    if a != b {
                        assert!(e.im_within(0.0, 4.0), "n={n} a={a} b={b} {e:?}");
                    }
                }
            }
        }
    }

    /// Two-sample Kolmogorov–Smirnov statistic.
    fn ks(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn left_translation_preserves_trace_distribution() {
        let m = 100_000usize;
        for n in 2..=4 {
            let v = haar_su(n, &mut ChaCha8Rng::seed_from_u64(1234));
            let mut r1 = ChaCha8Rng::seed_from_u64(11);
            let mut r2 = ChaCha8Rng::seed_from_u64(22);
            let (mut plain, mut moved) = (Vec::new(), Vec::new());
            let (mut plain_im, mut moved_im) = (Vec::new(), Vec::new());
            for _ in 0..m {
                let t = haar_su(n, &mut r1).trace();
                plain.push(t.re);
                plain_im.push(t.im);
                let t = (&v * haar_su(n, &mut r2)).trace();
                moved.push(t.re);
                moved_im.push(t.im);
            }
            // Critical value at level 0.001.
            let crit = 1.95 * (2.0 / m as f64).sqrt();
            let d_re = ks(plain, moved);
            assert!(d_re < crit, "n={n} D={d_re} crit={crit}");
            // Traces on SU(2) are real; the imaginary parts are rounding noise.
            if n > 2 {
                let d_im = ks(plain_im, moved_im);
                assert!(d_im < crit, "n={n} D={d_im} crit={crit}");
            }
        }
    }

    #[test]
    fn stderr_scales_with_root_samples() {
        let small = mc_perm_power(2, &cfg(4_000)).unwrap();
        let large = mc_perm_power(2, &cfg(64_000)).unwrap();
        let r = small.stderr_re / large.stderr_re;
        assert!((3.2..=4.8).contains(&r), "ratio {r}");
    }

    #[test]
    fn thread_count_does_not_change_estimates() {
        let base = cfg(20_000);
        let one = mc_perm_power(3, &base.with_threads(1)).unwrap();
        for t in [2, 3, 5] {
            assert_eq!(one, mc_perm_power(3, &base.with_threads(t)).unwrap());
        }
        let p1 = mc_projection_power(2, &base.with_threads(1), false).unwrap();
        let p4 = mc_projection_power(2, &base.with_threads(4), false).unwrap();
        assert_eq!(p1, p4);
        assert_eq!(mc_entry_product(2, &base).unwrap(), mc_entry_product(2, &base).unwrap());
    }

    #[test]
    fn entry_product_sign_matches_exact_pairing() {
        let exact = apolar_pair(&entry_product(2), &det_poly(2).pow(2, false).unwrap()).unwrap();
        assert!(exact.is_negative());
        let e = mc_entry_product(2, &cfg(50_000)).unwrap();
        assert!(e.mean.re < -3.0 * e.stderr_re);
    }

    #[test]
    fn projection_at_two() {
        let c = cfg(100_000);
        let proj = mc_projection_power(2, &c, false).unwrap();
        assert_eq!(proj.monomials.len(), 2);
        let prod = proj.estimate_of(&PStar::product_power(2)).unwrap();
        let pure = proj.estimate_of(&PStar::pure_powers(2)).unwrap();
        // Same draws as the scalar integrals.
        let a = mc_perm_power(2, &c).unwrap();
        let b = mc_entry_product(2, &c).unwrap();
        assert!((prod.mean - a.mean).norm() < 1e-12);
        assert!((pure.mean - b.mean).norm() < 1e-12);
        assert!(proj.cosine_to_pstar().unwrap().abs() > 0.99);
        assert!(matches!(mc_projection_power(4, &c, false), Err(Error::Resource { .. })));
    }

    #[test]
    fn ratio_report() {
        let r = ratio_consistency(2, &cfg(100_000)).unwrap();
        assert_eq!(r.exact_ratio, -2.0);
        assert!(r.agrees, "{r:?}");
        let wide = ratio_consistency(2, &cfg(1000)).unwrap();
        assert!(wide.mc_ratio_stderr > r.mc_ratio_stderr);
        assert!(wide.agrees, "{wide:?}");
        let other = ratio_consistency(2, &McConfig::new(100_000, 777)).unwrap();
        let joint = (r.mc_ratio_stderr.powi(2) + other.mc_ratio_stderr.powi(2)).sqrt();
        assert!((r.mc_ratio - other.mc_ratio).abs() <= 3.0 * joint);
        assert!(ratio_consistency(4, &cfg(100)).is_err());
    }

    #[test]
    fn record_fields() {
        let rec = integrate_record(2, Integrand::EntryProduct, &cfg(1000)).unwrap();
        assert_eq!(rec.op, "integrate-entry-product");
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.starts_with("{\"schema_version\":1,\"op\":\"integrate-entry-product\",\"n\":2,\"samples\":1000,"));
        let back: McRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
    }
}
