//! Exact algebra of polynomial vector fields.

mod field;
mod parse;
pub mod polynomial;

pub use field::{
    bracket, commutator_alpha, enumerate_commutators, hoermander_rank, homogeneity_degree, rational_rank,
    weighted_length, Multiindex, PolyVectorField, RankReport,
};
pub use parse::{parse_field, parse_polynomial};
pub use polynomial::{rat, rat_int, CompiledPoly, Polynomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LieError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("field index {index} out of range for {len} fields")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("generator weight must be 1 or 2, got {0}")]
    InvalidWeight(u32),
    #[error("multiindex must be nonempty")]
    EmptyMultiindex,
    #[error("max_weight must be at least 1")]
    InvalidMaxWeight,
    #[error("parse error: {0}")]
    Parse(String),
}
