//! Box grids, difference operators, sparse solves and norm diagnostics.

mod assemble;
mod csv;
mod grid;
mod norms;
pub mod sparse;
mod stencil;

pub use assemble::{
    assemble, assemble_with_faces, max_principle_witness, solve_linear, solve_linear_info, Assembled,
    DiscreteOperator,
};
pub use csv::{read_grid_csv, write_grid_csv, GridCsv};
pub use grid::{Face, Grid};
pub use norms::{
    c1_alpha_norm, field_derivatives, holder_pairs, holder_seminorm, lp_norm, norms, quadrature_weights,
    sobolev_norm, Derivatives, HolderReport, LpNorms, NormReport, SobolevEntry,
};
pub use sparse::{Csr, LinearSolveInfo};
pub use stencil::{discretize_first, discretize_second, Scheme};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    GridShape(String),
    #[error("dimension mismatch: grid {expected}, data {found}")]
    Dimension { expected: usize, found: usize },
    #[error("singular system")]
    Singular,
    #[error("linear solve did not converge; residual history {history:?}")]
    NoConvergence { history: Vec<f64> },
    #[error("operator data rejected: {0}")]
    Operator(String),
    #[error("boundary data below obstacle at {point:?} (gap {gap})")]
    Compatibility { point: Vec<f64>, gap: f64 },
    #[error("exterior-normal condition fails on required face {0:?}")]
    ExteriorNormal(Face),
    #[error("discrete maximum principle violated: max u = {max}")]
    MaxPrinciple { max: f64 },
    #[error("csv: {0}")]
    Csv(String),
}
