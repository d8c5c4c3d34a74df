//! Solve a reference problem and compare it with the oracle.

use serde::{Deserialize, Serialize};

use super::BenchmarkProblem;
use crate::obstacle::{
    boundary_attainment, continuation_solve_with, psor_oracle, sup_bound_check, AttainmentFit, ContinuationOptions,
    ObstacleError, SolveReport, SupBoundCheck,
};
use crate::operator::FaceCheck;
use crate::pde::max_principle_witness;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub options: ContinuationOptions,
    pub oracle: bool,
    pub psor_tol: f64,
    pub psor_max_sweeps: usize,
    /// random sign tests of the discrete maximum principle; 0 skips them
    pub max_principle_trials: usize,
    pub seed: u64,
}

impl RunSettings {
    pub fn for_problem(p: &BenchmarkProblem) -> Self {
        RunSettings {
            options: p.options.clone(),
            oracle: true,
            psor_tol: 1e-13,
            psor_max_sweeps: 200_000,
            max_principle_trials: 2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub sup_distance: f64,
    pub oracle_residual: f64,
    pub sweeps: usize,
    pub omega: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub name: String,
    pub nodes: Vec<usize>,
    pub solve: SolveReport,
    pub oracle: Option<OracleComparison>,
    pub sup_bound: SupBoundCheck,
    pub attainment: AttainmentFit,
    pub faces: Vec<FaceCheck>,
    pub max_principle: Option<f64>,
    pub seed: u64,
}

pub fn run_benchmark(p: &BenchmarkProblem, s: &RunSettings) -> Result<BenchReport, ObstacleError> {
    let mut opts = s.options.clone();
    opts.required_faces = p.required_faces.clone();
    let solve = continuation_solve_with(&p.spec, &p.data, &p.grid, &opts)?;
    let asm = solve.system.as_deref().expect("completed solve keeps its system");
    let oracle = if s.oracle {
        let phi = asm.phi_interior();
        let ui = asm.op.restrict(&solve.u);
        let mut res = None;
        for omega in [p.psor_omega, 1.0] {
            match psor_oracle(&asm.op, &asm.rhs, &phi, omega, s.psor_tol, s.psor_max_sweeps) {
                Ok(r) => {
                    res = Some((r, omega));
                    break;
                }
                Err(ObstacleError::Divergence { .. }) | Err(ObstacleError::NoConvergence { .. }) if omega != 1.0 => continue,
                Err(e) => return Err(e),
            }
        }
        let (r, omega) = res.expect("loop returns or fills");
        let d = ui.iter().zip(&r.u).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        Some(OracleComparison { sup_distance: d, oracle_residual: r.residual, sweeps: r.sweeps, omega })
    } else {
        None
    };
    let max_principle = if s.max_principle_trials > 0 {
        Some(max_principle_witness(&asm.op, s.max_principle_trials, s.seed)?)
    } else {
        None
    };
    let eps = solve.epsilon_final();
    let attainment = boundary_attainment(&p.grid, &solve.u, &asm.g, eps, 1.0, 0.1);
    Ok(BenchReport {
        name: p.name.clone(),
        nodes: p.grid.nodes().to_vec(),
        sup_bound: sup_bound_check(&solve, &p.data),
        attainment,
        faces: p.faces.clone(),
        max_principle,
        oracle,
        solve,
        seed: s.seed,
    })
}
