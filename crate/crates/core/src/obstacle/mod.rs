//! Penalized obstacle solver, continuation in (ε, δ) and a projected SOR oracle.

mod barrier;
mod penalized;
mod psor;

use serde::{Deserialize, Serialize};

use crate::operator::OperatorError;
use crate::pde::PdeError;

pub use barrier::{boundary_attainment, sup_bound_check, AttainmentFit, Barrier, SupBoundCheck};
pub use penalized::{
    continuation_solve, continuation_solve_with, solve_penalized, solve_penalized_from, ContinuationOptions,
    IterateRecord, MuStrategy, PenalizedProblem, PenalizedSolution, SolveReport, StageReport, StartKind, SupWitness,
};
pub use psor::{complementarity_residual, psor_oracle, PsorResult};

/// β_ε(s) = ε(1 − e^{−s/ε}).
pub fn beta(epsilon: f64, s: f64) -> f64 {
    -epsilon * (-s / epsilon).exp_m1()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyFamily {
    epsilon: f64,
}

impl PenaltyFamily {
    pub fn new(epsilon: f64) -> Result<Self, ObstacleError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ObstacleError::Schedule(format!("epsilon {epsilon} outside (0, 1)")));
        }
        Ok(PenaltyFamily { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn value(&self, s: f64) -> f64 {
        beta(self.epsilon, s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        (-s / self.epsilon).exp()
    }

    /// Solves β_ε(s) = v for v < ε.
    pub fn inverse(&self, v: f64) -> f64 {
        assert!(v < self.epsilon, "beta is bounded by epsilon");
        -self.epsilon * (-v / self.epsilon).ln_1p()
    }

    /// Slope of the chord between s and t; the derivative when they coincide.
    pub fn secant(&self, s: f64, t: f64) -> f64 {
        let d = t - s;
        if d.abs() <= 1e-9 * self.epsilon {
            return self.derivative(0.5 * (s + t));
        }
        (self.value(t) - self.value(s)) / d
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ObstacleError {
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("bad schedule: {0}")]
    Schedule(String),
    #[error("iterate increased by {increase:e} at node {node} {point:?} in iteration {iteration}")]
    Monotonicity { iteration: usize, node: usize, point: Vec<f64>, increase: f64 },
    #[error("iterate {value} at node {node} {point:?} leaves [-u0, u0] with u0 = {bound} in iteration {iteration}")]
    Bound { iteration: usize, node: usize, point: Vec<f64>, value: f64, bound: f64 },
    #[error("no convergence after {iterations} iterations (last sup-change {sup_change:e})")]
    NoConvergence { iterations: usize, sup_change: f64 },
    #[error("psor diverged after {sweeps} sweeps (update {update:e})")]
    Divergence { sweeps: usize, update: f64 },
    #[error("barrier center {0:?} lies in the closed domain")]
    CenterInside(Vec<f64>),
    #[error("stage {stage} failed: {source}")]
    Stage { stage: usize, source: Box<ObstacleError>, report: Box<SolveReport> },
}

impl ObstacleError {
    /// Partial report of a failed continuation run.
    pub fn partial_report(&self) -> Option<&SolveReport> {
        match self {
            ObstacleError::Stage { report, .. } => Some(report),
            _ => None,
        }
    }
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
