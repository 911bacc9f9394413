//! The Hadamard–Howe map on explicit monomial bases and the `SL`-invariant
//! of `S^d(SⁿV*)` for even `n`.

mod basis;
mod invariant;
mod linear;
mod map;

pub use basis::{
    balanced_monomials, basis, basis_len, weight_zero_basis, weight_zero_len, SymBasisElement,
};
pub use invariant::{
    eval_invariant, eval_invariant_unguarded, p_on_power, p_on_power_unguarded, pstar_coefficients,
    PStar,
};
pub use linear::{bareiss_rank, ExactLinearMap, RankReport, DENSE_ELIMINATION_CAP};
pub use map::{hdn_apply, hdn_matrix, weight_zero_matrix};

/// Default bound on basis sizes for `hdn_matrix`.
pub const DEFAULT_BASIS_CAP: usize = 2_000;

/// Default bound on weight-zero dimensions; the `(3,3)` case (280) needs an
/// explicit opt-in up to [`DEFAULT_BASIS_CAP`].
pub const DEFAULT_WEIGHT_ZERO_CAP: usize = 100;

pub const RANK_SCHEMA_VERSION: u32 = 1;

/// Versioned form of a rank computation, keyed by `(dim_v, d, n)`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RankRecord {
    pub schema_version: u32,
    pub op: String,
    pub dim_v: usize,
    pub d: usize,
    pub n: usize,
    pub weight_zero: bool,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub injective: bool,
    pub surjective: bool,
    pub elapsed_ms: u64,
}
