//! Exact and Monte-Carlo cross-checks between Latin square sign counts, the
//! Hadamard–Howe map `S^d(SⁿV) → Sⁿ(S^dV)`, apolarity pairings of powers of
//! the permanent and determinant, and Haar integrals over `SU(n)`.
//!
//! * [`perm`] and [`poly`]: permutations with parity and exact sparse
//!   polynomials with the factorial-weighted pairing.
//! * [`latin`]: signed Latin square censuses and the tiling coefficient of
//!   `detⁿ`.
//! * [`howe`]: monomial bases, the regroup-and-symmetrize map, exact ranks,
//!   and the `SL`-invariant form on products of vectors.
//! * [`su`]: Haar sampling on `SU(n)` and reproducible Monte-Carlo
//!   estimates.

pub mod error;
pub mod howe;
pub mod latin;
pub mod perm;
pub mod poly;
pub mod su;

pub use error::{Error, Result};
pub use num_bigint::BigInt;
pub use num_complex::Complex64;
pub use num_rational::BigRational;
