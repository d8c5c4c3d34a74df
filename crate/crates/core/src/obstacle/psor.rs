//! Projected SOR for the discrete complementarity system
//! min{−(L u − rhs), u − φ} = 0.

use serde::{Deserialize, Serialize};

use super::ObstacleError;
use crate::pde::{DiscreteOperator, PdeError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsorResult {
    /// interior values
    pub u: Vec<f64>,
    pub sweeps: usize,
    /// ∞-norm of the last sweep's update
    pub update: f64,
    /// sup over nodes of |min{−(Lu − rhs), u − φ}|
    pub residual: f64,
}

/// Sup of |min{−(Lu − rhs), u − φ}| over interior nodes and the node attaining it.
pub fn complementarity_residual(op: &DiscreteOperator, rhs: &[f64], u: &[f64], phi: &[f64]) -> (f64, usize) {
    let lu = op.matrix.matvec(u);
    let mut worst = (0.0, 0);
    for k in 0..u.len() {
        let r = (rhs[k] - lu[k]).min(u[k] - phi[k]).abs();
        if r > worst.0 {
            worst = (r, k);
        }
    }
    worst
}

pub fn psor_oracle(
    op: &DiscreteOperator,
    rhs: &[f64],
    phi: &[f64],
    omega: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PsorResult, ObstacleError> {
    assert!(omega > 0.0 && omega < 2.0, "omega must lie in (0, 2)");
    let a = &op.matrix;
    let m = a.rows;
    let diag = a.diagonal();
    if diag.iter().any(|&d| !(d < 0.0)) {
        return Err(PdeError::Singular.into());
    }
    let mut u = phi.to_vec();
    let mut first = None;
    for sweep in 1..=max_iter {
        let mut update = 0.0_f64;
        for i in 0..m {
            let mut off = 0.0;
            for (j, v) in a.row(i) {
                if j != i {
                    off += v * u[j];
                }
            }
            let gs = (rhs[i] - off) / diag[i];
            let new = (u[i] + omega * (gs - u[i])).max(phi[i]);
            update = update.max((new - u[i]).abs());
            u[i] = new;
        }
        let f = *first.get_or_insert(update.max(f64::MIN_POSITIVE));
        if !update.is_finite() || update > 1e8 * f {
            return Err(ObstacleError::Divergence { sweeps: sweep, update });
        }
        if update <= tol {
            let residual = complementarity_residual(op, rhs, &u, phi).0;
            return Ok(PsorResult { u, sweeps: sweep, update, residual });
        }
    }
    Err(ObstacleError::NoConvergence { iterations: max_iter, sup_change: f64::NAN })
}
