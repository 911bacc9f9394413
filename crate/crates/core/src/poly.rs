//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms live in a `BTreeMap` keyed by exponent vector, so iteration order
//! (and therefore the canonical text form) is the lexicographic order on
//! exponent vectors and is stable across runs. Products accumulate into a
//! hash map and are sorted once at the end.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// The set of variables a polynomial is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariableSpace {
    /// `x[1], …, x[k]`.
    Plain(usize),
    /// Matrix coordinates `g[i][j]` for `1 ≤ i, j ≤ n`, stored row-major.
    Matrix(usize),
}

impl VariableSpace {
    pub fn count(&self) -> usize {
        match *self {
            VariableSpace::Plain(k) => k,
            VariableSpace::Matrix(n) => n * n,
        }
    }

    /// Index of `g[i][j]` (zero-based `i`, `j`) in a matrix space.
    pub fn matrix_var(n: usize, i: usize, j: usize) -> usize {
        i * n + j
    }

    pub fn label(&self, var: usize) -> String {
        match *self {
            VariableSpace::Plain(_) => format!("x[{}]", var + 1),
            VariableSpace::Matrix(n) => format!("g[{}][{}]", var / n + 1, var % n + 1),
        }
    }

    fn parse_label(&self, s: &str) -> Result<usize> {
        let bad = || Error::validation(format!("bad variable label {s:?} for {self}"));
        let idx: Vec<usize> = s
            .get(1..)
            .ok_or_else(bad)?
            .split(']')
            .filter(|p| !p.is_empty())
            .map(|p| p.strip_prefix('[').and_then(|q| q.parse().ok()).ok_or_else(bad))
            .collect::<Result<_>>()?;
        match (*self, s.chars().next(), idx.as_slice()) {
            (VariableSpace::Plain(k), Some('x'), &[i]) if (1..=k).contains(&i) => Ok(i - 1),
            (VariableSpace::Matrix(n), Some('g'), &[i, j])
                if (1..=n).contains(&i) && (1..=n).contains(&j) =>
            {
                Ok(VariableSpace::matrix_var(n, i - 1, j - 1))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for VariableSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableSpace::Plain(k) => write!(f, "plain {k}"),
            VariableSpace::Matrix(n) => write!(f, "matrix {n}"),
        }
    }
}

/// An exponent vector with its cached total degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let degree = exponents.iter().sum();
        MultiIndex { exponents, degree }
    }

    pub fn zero(vars: usize) -> Self {
        MultiIndex::new(vec![0; vars])
    }

    pub fn unit(vars: usize, var: usize) -> Self {
        let mut e = vec![0; vars];
        e[var] = 1;
        MultiIndex { exponents: e, degree: 1 }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_multilinear(&self) -> bool {
        self.exponents.iter().all(|&e| e <= 1)
    }

    /// `m! = Π eᵢ!`, the weight of this monomial under the apolarity pairing.
    pub fn factorial_weight(&self) -> BigInt {
        self.exponents
            .iter()
            .map(|&e| factorial(e as u64))
            .fold(BigInt::one(), |acc, f| acc * f)
    }

    fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex {
            exponents: self
                .exponents
                .iter()
                .zip(&other.exponents)
                .map(|(a, b)| a + b)
                .collect(),
            degree: self.degree + other.degree,
        }
    }
}

pub(crate) fn factorial(k: u64) -> BigInt {
    (2..=k).fold(BigInt::one(), |acc, i| acc * i)
}

/// A finitely supported map from exponent vectors to nonzero rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    space: VariableSpace,
    terms: BTreeMap<MultiIndex, BigRational>,
    degree: Option<u32>,
    homogeneous: bool,
}

/// Below this many term products a multiplication runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;

impl SparsePoly {
    pub fn zero(space: VariableSpace) -> Self {
        SparsePoly::from_map(space, BTreeMap::new())
    }

    pub fn one(space: VariableSpace) -> Self {
        SparsePoly::monomial(space, MultiIndex::zero(space.count()), BigRational::one())
    }

    pub fn monomial(space: VariableSpace, m: MultiIndex, coeff: BigRational) -> Self {
        assert_eq!(m.exponents.len(), space.count(), "multi-index length mismatch");
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(m, coeff);
        }
        SparsePoly::from_map(space, terms)
    }

    pub fn variable(space: VariableSpace, var: usize) -> Self {
        SparsePoly::monomial(space, MultiIndex::unit(space.count(), var), BigRational::one())
    }

    /// Sums repeated multi-indices and drops zero coefficients.
    pub fn from_terms<I>(space: VariableSpace, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, BigRational)>,
    {
        let mut map: BTreeMap<MultiIndex, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            if m.exponents.len() != space.count() {
                return Err(Error::validation(format!(
                    "multi-index of length {} in a space of {} variables",
                    m.exponents.len(),
                    space.count()
                )));
            }
            *map.entry(m).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(SparsePoly::from_map(space, map))
    }

    fn from_map(space: VariableSpace, terms: BTreeMap<MultiIndex, BigRational>) -> Self {
        let mut degrees = terms.keys().map(MultiIndex::degree);
        let first = degrees.next();
        let homogeneous = degrees.all(|d| Some(d) == first);
        SparsePoly {
            space,
            terms,
            degree: if homogeneous { first } else { None },
            homogeneous,
        }
    }

    pub fn space(&self) -> VariableSpace {
        self.space
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff every term has the same degree. The zero polynomial counts
    /// as homogeneous.
    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// The common degree of a nonzero homogeneous polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn coefficient(&self, m: &MultiIndex) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn scale(&self, c: &BigRational) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero(self.space);
        }
        let terms = self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect();
        SparsePoly::from_map(self.space, terms)
    }

    pub fn add(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.check_space(other)?;
        SparsePoly::from_terms(
            self.space,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    pub fn mul(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.mul_impl(other, false)
    }

    /// Product with every non-multilinear term discarded.
    pub fn mul_multilinear(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.mul_impl(other, true)
    }

    fn mul_impl(&self, other: &SparsePoly, multilinear_only: bool) -> Result<SparsePoly> {
        self.check_space(other)?;
        let lhs: Vec<_> = self.terms.iter().collect();
        let rhs: Vec<_> = other.terms.iter().collect();

        let accumulate = |chunk: &[(&MultiIndex, &BigRational)]| {
            let mut acc: HashMap<MultiIndex, BigRational> = HashMap::new();
            for (ma, ca) in chunk {
                for (mb, cb) in &rhs {
                    let m = ma.add(mb);
                    if multilinear_only && !m.is_multilinear() {
                        continue;
                    }
                    let c = *ca * *cb;
                    match acc.get_mut(&m) {
                        Some(v) => *v += c,
                        None => {
                            acc.insert(m, c);
                        }
                    }
                }
            }
            acc
        };

        let partials: Vec<HashMap<MultiIndex, BigRational>> =
            if lhs.len() * rhs.len() < PARALLEL_THRESHOLD {
                vec![accumulate(&lhs)]
            } else {
                let chunk = lhs.len().div_ceil(rayon::current_num_threads() * 4).max(1);
                lhs.par_chunks(chunk).map(accumulate).collect()
            };

        let mut merged: BTreeMap<MultiIndex, BigRational> = BTreeMap::new();
        for part in partials {
            for (m, c) in part {
                *merged.entry(m).or_insert_with(BigRational::zero) += c;
            }
        }
        merged.retain(|_, c| !c.is_zero());
        Ok(SparsePoly::from_map(self.space, merged))
    }

    /// `self^k` by iterated multiplication.
    ///
    /// With `multilinear_only`, terms with an exponent ≥ 2 are dropped after
    /// every step. Exponents never decrease under multiplication, so no
    /// dropped term could have contributed to a multilinear term of the
    /// final power.
    pub fn pow(&self, k: u32, multilinear_only: bool) -> Result<SparsePoly> {
        if multilinear_only && !self.homogeneous {
            return Err(Error::contract(
                "multilinear power requires a homogeneous polynomial",
            ));
        }
        let base = if multilinear_only {
            self.filter_multilinear()
        } else {
            self.clone()
        };
        let mut acc = SparsePoly::one(self.space);
        for _ in 0..k {
            acc = acc.mul_impl(&base, multilinear_only)?;
        }
        Ok(acc)
    }

    pub fn filter_multilinear(&self) -> SparsePoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.is_multilinear())
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        SparsePoly::from_map(self.space, terms)
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rational(&self, point: &[BigRational]) -> Result<BigRational> {
        self.check_point(point.len())?;
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.exponents) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Floating evaluation at a complex point.
    pub fn eval_complex(&self, point: &[Complex64]) -> Result<Complex64> {
        self.check_point(point.len())?;
        let mut total = Complex64::zero();
        for (m, c) in &self.terms {
            let mut t = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (x, &e) in point.iter().zip(&m.exponents) {
                if e > 0 {
                    t *= x.powu(e);
                }
            }
            total += t;
        }
        Ok(total)
    }

    fn check_space(&self, other: &SparsePoly) -> Result<()> {
        if self.space != other.space {
            return Err(Error::contract(format!(
                "variable spaces differ: {} vs {}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    fn check_point(&self, len: usize) -> Result<()> {
        if len != self.space.count() {
            return Err(Error::validation(format!(
                "point has {len} coordinates, space {} has {}",
                self.space,
                self.space.count()
            )));
        }
        Ok(())
    }

    /// Canonical text form: a `space` header, then one term per line in
    /// descending lexicographic order of exponent vectors.
    pub fn to_canonical_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "space {}", self.space)?;
        for (m, c) in self.terms.iter().rev() {
            write!(f, "{c} *")?;
            if m.degree == 0 {
                f.write_str(" 1")?;
            }
            for (var, &e) in m.exponents.iter().enumerate() {
                if e > 0 {
                    write!(f, " {}^{e}", self.space.label(var))?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for SparsePoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::validation("empty polynomial text"))?;
        let space = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["space", "plain", k] => VariableSpace::Plain(parse_num(k)?),
            ["space", "matrix", n] => VariableSpace::Matrix(parse_num(n)?),
            _ => return Err(Error::validation(format!("bad header {header:?}"))),
        };
        let mut terms = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (coeff, rest) = line
                .split_once(" * ")
                .ok_or_else(|| Error::validation(format!("bad term line {line:?}")))?;
            let coeff = BigRational::from_str(coeff.trim())
                .map_err(|_| Error::validation(format!("bad coefficient {coeff:?}")))?;
            let mut exps = vec![0u32; space.count()];
            for factor in rest.split_whitespace() {
                if factor == "1" {
                    continue;
                }
                let (label, e) = factor
                    .split_once('^')
                    .ok_or_else(|| Error::validation(format!("bad factor {factor:?}")))?;
                exps[space.parse_label(label)?] += parse_num::<u32>(e)?;
            }
            terms.push((MultiIndex::new(exps), coeff));
        }
        SparsePoly::from_terms(space, terms)
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::validation(format!("bad number {s:?}")))
}

/// The `m!`-weighted apolarity pairing `Σ_m Q_m · R_m · m!`, i.e. `Q(∂)`
/// applied to `R` for homogeneous polynomials of equal degree.
pub fn apolar_pair(q: &SparsePoly, r: &SparsePoly) -> Result<BigRational> {
    q.check_space(r)?;
    if !q.is_homogeneous() || !r.is_homogeneous() {
        return Err(Error::contract("apolarity pairing needs homogeneous arguments"));
    }
    if let (Some(a), Some(b)) = (q.degree(), r.degree()) {
        if a != b {
            return Err(Error::contract(format!(
                "apolarity pairing of degrees {a} and {b}"
            )));
        }
    }
    let (small, large) = if q.len() <= r.len() { (q, r) } else { (r, q) };
    let mut total = BigRational::zero();
    for (m, c) in &small.terms {
        if let Some(d) = large.terms.get(m) {
            total += c * d * BigRational::from_integer(m.factorial_weight());
        }
    }
    Ok(total)
}

fn permutation_sum(n: usize, signed: bool) -> SparsePoly {
    assert!(n >= 1, "matrix size must be positive");
    let space = VariableSpace::Matrix(n);
    let terms = Permutation::all(n).into_iter().map(|p| {
        let mut exps = vec![0u32; n * n];
        for i in 0..n {
            exps[VariableSpace::matrix_var(n, i, p.apply(i))] = 1;
        }
        let c = if signed { p.sign().to_i32() } else { 1 };
        (MultiIndex::new(exps), BigRational::from_integer(c.into()))
    });
    SparsePoly::from_terms(space, terms).expect("exponent vectors sized to the space")
}

/// `det_n = Σ_σ sign(σ) Π_i g[i][σ(i)]`.
pub fn det_poly(n: usize) -> SparsePoly {
    permutation_sum(n, true)
}

/// `perm_n = Σ_σ Π_i g[i][σ(i)]`.
pub fn perm_poly(n: usize) -> SparsePoly {
    permutation_sum(n, false)
}

/// The product of all `n²` matrix coordinates.
pub fn entry_product(n: usize) -> SparsePoly {
    let space = VariableSpace::Matrix(n);
    SparsePoly::monomial(space, MultiIndex::new(vec![1; n * n]), BigRational::one())
}
