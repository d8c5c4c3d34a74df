//! Monotone iteration for the penalized problem and the (ε, δ) continuation.

use serde::{Deserialize, Serialize};

use super::{beta, sup, ObstacleError, PenaltyFamily};
use crate::operator::{ObstacleData, OperatorSpec};
use crate::pde::sparse::{solve_sparse, DENSE_LIMIT};
use crate::pde::{assemble_with_faces, Assembled, Face, Grid};

const MAX_RETRIES: usize = 8;
const MONOTONE_SLACK: f64 = 1e-10;

/// How the diagonal shift of each linear step is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuStrategy {
    /// Nodewise shifts from the penalty chord, enlarged until the new iterate is a supersolution.
    Adaptive,
    /// One global shift from the a priori lower bound on u − φ.
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartKind {
    Initial,
    Warm,
    WarmRejected,
}

/// One stage of the continuation: an assembled system and a penalty parameter.
#[derive(Clone, Debug)]
pub struct PenalizedProblem {
    pub assembled: Assembled,
    pub penalty: PenaltyFamily,
    phi: Vec<f64>,
    gamma0: f64,
    gamma_sup: f64,
    noise: Vec<f64>,
    max_noise: f64,
}

impl PenalizedProblem {
    pub fn new(
        spec: &OperatorSpec,
        data: &ObstacleData,
        grid: &Grid,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self, ObstacleError> {
        Self::from_assembled(assemble_with_faces(spec, data, grid, delta, &[])?, epsilon)
    }

    pub fn from_assembled(assembled: Assembled, epsilon: f64) -> Result<Self, ObstacleError> {
        let penalty = PenaltyFamily::new(epsilon)?;
        let phi = assembled.phi_interior();
        let gamma0 = assembled.gamma.iter().fold(f64::INFINITY, |m, g| m.min(g.abs()));
        let gamma_sup = sup(&assembled.gamma);
        let op = &assembled.op;
        let noise: Vec<f64> = (0..op.interior.len())
            .map(|k| {
                let a: f64 = op.matrix.row(k).map(|e| e.1.abs()).sum::<f64>() + op.coupling.row(k).map(|e| e.1.abs()).sum::<f64>();
                4.0 * f64::EPSILON * a
            })
            .collect();
        let max_noise = noise.iter().fold(0.0_f64, |m, &v| m.max(v));
        Ok(PenalizedProblem { assembled, penalty, phi, gamma0, gamma_sup, noise, max_noise })
    }

    pub fn epsilon(&self) -> f64 {
        self.penalty.epsilon()
    }

    pub fn delta(&self) -> f64 {
        self.assembled.delta
    }

    pub fn grid(&self) -> &Grid {
        &self.assembled.op.grid
    }

    /// φ^δ at interior nodes.
    pub fn phi_interior(&self) -> &[f64] {
        &self.phi
    }

    /// min |γ^δ| over interior nodes.
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    /// L u_I + C g − f − β_ε(u_I − φ^δ); nonpositive exactly at supersolutions.
    pub fn defect(&self, ui: &[f64]) -> Vec<f64> {
        let a = &self.assembled;
        let lu = a.op.matrix.matvec(ui);
        (0..ui.len()).map(|k| lu[k] - a.rhs[k] - self.penalty.value(ui[k] - self.phi[k])).collect()
    }

    /// Bound C with β_ε(u − φ^δ) ≥ −C for the discrete penalized solution.
    pub fn step1_bound(&self) -> f64 {
        let a = &self.assembled;
        let lphi = a.op.apply(&a.phi);
        lphi.iter().zip(&a.f).fold(0.0_f64, |m, (l, f)| m.max(f - l))
    }

    /// Lower bound on u − φ^δ implied by [`Self::step1_bound`].
    pub fn lower_shift(&self) -> f64 {
        self.penalty.inverse(-self.step1_bound())
    }

    /// Largest chord slope of β_ε above the lower shift.
    pub fn global_shift(&self) -> f64 {
        1.0 + self.step1_bound() / self.epsilon()
    }

    /// Constant initial iterate U_0: a supersolution with −U_0 a subsolution.
    pub fn initial_constant(&self) -> f64 {
        let a = &self.assembled;
        let phi_max = a.phi.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let g_sup = sup(&a.g);
        let f_sup = sup(&a.f);
        phi_max.max(g_sup).max((f_sup + self.step1_bound() + self.epsilon()) / self.gamma0).max(0.0)
    }

    fn tolerance(&self, k: usize, scale: f64) -> f64 {
        self.linear_tol(0.0) + self.noise[k] * scale.max(1.0)
    }

    /// Absolute residual target for a correction of size about `change`.
    fn linear_tol(&self, change: f64) -> f64 {
        let floor = 4.0 * self.max_noise * change;
        1e-11 * self.gamma0.clamp(1e-2, 1.0) + floor
    }

    fn full(&self, ui: &[f64]) -> Vec<f64> {
        self.assembled.op.extend(ui, &self.assembled.g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub sup_change: f64,
    /// max over nodes of u_{j+1} − u_j
    pub max_increase: f64,
    pub retries: usize,
    pub fallback: bool,
    /// largest μ = K + |γ| used in the step
    pub mu_max: f64,
}

#[derive(Clone, Debug)]
pub struct PenalizedSolution {
    /// all grid nodes; boundary values are g^δ
    pub u: Vec<f64>,
    pub iterations: usize,
    pub sup_change: f64,
    pub u0: f64,
    pub start: StartKind,
    pub records: Vec<IterateRecord>,
}

/// Monotone iteration from the constant initial iterate with adaptive shifts.
pub fn solve_penalized(prob: &PenalizedProblem, tol: f64, max_iter: usize) -> Result<PenalizedSolution, ObstacleError> {
    solve_penalized_from(prob, tol, max_iter, MuStrategy::Adaptive, None)
}

/// Monotone iteration from `start` (full grid) when it is a supersolution, else from U_0.
pub fn solve_penalized_from(
    prob: &PenalizedProblem,
    tol: f64,
    max_iter: usize,
    strategy: MuStrategy,
    start: Option<&[f64]>,
) -> Result<PenalizedSolution, ObstacleError> {
    if !(tol > 0.0) {
        return Err(ObstacleError::Schedule(format!("tolerance {tol} must be positive")));
    }
    let op = &prob.assembled.op;
    let m = op.interior.len();
    let u0 = prob.initial_constant();
    let (mut u, kind) = match start {
        Some(prev) => match warm_start(prob, prev, u0) {
            Some(w) => (w, StartKind::Warm),
            None => (vec![u0; m], StartKind::WarmRejected),
        },
        None => (vec![u0; m], StartKind::Initial),
    };
    check_bounds(prob, &u, u0, 0)?;
    let kglobal = prob.global_shift();
    let mut records = Vec::new();
    let mut f_old = prob.defect(&u);
    for it in 1..=max_iter {
        let (du, f_new, retries, fallback, kmax) = step(prob, &u, &f_old, strategy, kglobal)?;
        let mut change = 0.0_f64;
        let mut inc = f64::NEG_INFINITY;
        let mut worst = 0;
        for k in 0..m {
            change = change.max(du[k].abs());
            if du[k] > inc {
                inc = du[k];
                worst = k;
            }
            u[k] += du[k];
        }
        if inc > MONOTONE_SLACK {
            return Err(ObstacleError::Monotonicity {
                iteration: it,
                node: op.interior[worst],
                point: op.grid.point(op.interior[worst]),
                increase: inc,
            });
        }
        check_bounds(prob, &u, u0, it)?;
        records.push(IterateRecord {
            sup_change: change,
            max_increase: inc.max(0.0),
            retries,
            fallback,
            mu_max: kmax + prob.gamma_sup,
        });
        f_old = f_new;
        if change <= tol {
            return Ok(PenalizedSolution {
                u: prob.full(&u),
                iterations: it,
                sup_change: change,
                u0,
                start: kind,
                records,
            });
        }
    }
    Err(ObstacleError::NoConvergence { iterations: max_iter, sup_change: records.last().map_or(f64::NAN, |r| r.sup_change) })
}

fn check_bounds(prob: &PenalizedProblem, u: &[f64], u0: f64, iteration: usize) -> Result<(), ObstacleError> {
    let op = &prob.assembled.op;
    let slack = MONOTONE_SLACK * u0.max(1.0);
    if let Some(k) = (0..u.len()).find(|&k| !(u[k].abs() <= u0 + slack)) {
        return Err(ObstacleError::Bound {
            iteration,
            node: op.interior[k],
            point: op.grid.point(op.interior[k]),
            value: u[k],
            bound: u0,
        });
    }
    Ok(())
}

/// Previous stage solution shifted up until it is a supersolution, capped by U_0.
fn warm_start(prob: &PenalizedProblem, prev: &[f64], u0: f64) -> Option<Vec<f64>> {
    let mut w = prob.assembled.op.restrict(prev);
    let f = prob.defect(&w);
    let shift = f.iter().fold(0.0_f64, |m, &v| m.max(v)) / prob.gamma0;
    for v in w.iter_mut() {
        *v = (*v + shift).min(u0);
    }
    let f = prob.defect(&w);
    let scale = sup(&w);
    f.iter().enumerate().all(|(k, &v)| v <= prob.tolerance(k, scale)).then_some(w)
}

type Step = (Vec<f64>, Vec<f64>, usize, bool, f64);

/// One linear step (L − K) d = −F(u), retried with larger K at nodes where u + d is not a supersolution.
fn step(prob: &PenalizedProblem, u: &[f64], f_old: &[f64], strategy: MuStrategy, kglobal: f64) -> Result<Step, ObstacleError> {
    let m = u.len();
    let pen = prob.penalty;
    let s_old: Vec<f64> = (0..m).map(|k| u[k] - prob.phi[k]).collect();
    let s_min = prob.lower_shift();
    let mut kdiag: Vec<f64> = match strategy {
        MuStrategy::Adaptive => s_old.iter().map(|&s| pen.derivative(s).min(kglobal)).collect(),
        MuStrategy::Uniform => vec![kglobal; m],
    };
    let neg_f: Vec<f64> = f_old.iter().map(|v| -v).collect();
    let lin_tol = prob.linear_tol(sup(f_old) / prob.gamma0);
    let max_lin = 20 * m.max(DENSE_LIMIT);
    let mut retries = 0;
    loop {
        let fallback = strategy == MuStrategy::Uniform || retries == MAX_RETRIES;
        if fallback && strategy == MuStrategy::Adaptive {
            for k in kdiag.iter_mut() {
                *k = k.max(kglobal);
            }
        }
        let neg_k: Vec<f64> = kdiag.iter().map(|k| -k).collect();
        let a = prob.assembled.op.matrix.add_diagonal(&neg_k);
        let (du, info) = solve_sparse(&a, &neg_f, None, lin_tol, max_lin)?;
        let x: Vec<f64> = (0..m).map(|k| u[k] + du[k]).collect();
        let f_new = prob.defect(&x);
        let scale = sup(&x);
        // defects within the linear residual are not the shift's fault
        let bad: Vec<usize> = (0..m).filter(|&k| !(f_new[k] <= prob.tolerance(k, scale) + info.residual)).collect();
        let kmax = kdiag.iter().fold(0.0_f64, |a, &b| a.max(b));
        if bad.is_empty() || fallback {
            return Ok((du, f_new, retries, fallback, kmax));
        }
        if retries == 0 {
            // Chords over the tangent step bound the slopes of any shorter step,
            // and a larger shift only shortens the step of an M-matrix system.
            for k in 0..m {
                if du[k] < 0.0 {
                    let chord = pen.secant((x[k] - prob.phi[k]).max(s_min), s_old[k]);
                    if chord.is_finite() && chord > kdiag[k] {
                        kdiag[k] = chord * (1.0 + 1e-6);
                    }
                }
            }
            retries += 1;
            continue;
        }
        for k in bad {
            // the penalized solution never goes below s_min
            let s_new = (x[k] - prob.phi[k]).max(s_min);
            let chord = pen.secant(s_new, s_old[k]);
            kdiag[k] = if !chord.is_finite() {
                kdiag[k].max(kglobal) * 2.0
            } else if chord > kdiag[k] * (1.0 + 1e-6) {
                chord * (1.0 + 1e-6)
            } else {
                // the node failed through its neighbours
                (2.0 * kdiag[k]).max(1e-3)
            };
        }
        retries += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub epsilon: f64,
    pub delta: f64,
    pub inner_iterations: usize,
    pub sup_change: f64,
    /// min over interior nodes of β_ε(u − φ^δ)
    pub penalty_min: f64,
    pub sup_u: f64,
    pub obstacle_violation: f64,
    pub start: StartKind,
    pub retries: usize,
    pub fallbacks: usize,
    pub max_increase: f64,
    pub mu_max: f64,
    pub u0: f64,
    pub step1_bound: f64,
    pub lower_shift: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SupWitness {
    pub sup_u: f64,
    pub sup_g: f64,
    pub sup_f: f64,
    pub penalty_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub final_sup_change: f64,
    pub penalty_min: f64,
    pub complementarity_residual: f64,
    /// sup of |Lu − rhs| where u − φ exceeds 10 ε_final
    pub equation_residual: f64,
    pub obstacle_violation: f64,
    pub stages: Vec<StageReport>,
    pub sup_bound_witness: SupWitness,
    pub monotone_operator: bool,
    pub stabilized_rows: usize,
    pub max_viscosity: f64,
    pub tol: f64,
    pub grid: Grid,
    /// solution on all nodes
    #[serde(skip)]
    pub u: Vec<f64>,
    /// system of the last stage
    #[serde(skip)]
    pub system: Option<Box<Assembled>>,
}

impl SolveReport {
    /// Outer path as (ε, δ, inner iterations, sup-change).
    pub fn outer_path(&self) -> Vec<(f64, f64, usize, f64)> {
        self.stages.iter().map(|s| (s.epsilon, s.delta, s.inner_iterations, s.sup_change)).collect()
    }

    pub fn epsilon_final(&self) -> f64 {
        self.stages.last().map_or(f64::NAN, |s| s.epsilon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub eps_schedule: Vec<f64>,
    pub delta_schedule: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub strategy: MuStrategy,
    /// faces on which the exterior-normal condition must hold
    pub required_faces: Vec<Face>,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            eps_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4],
            delta_schedule: vec![0.05, 0.01, 0.0],
            tol: 2e-5,
            max_iter: 500,
            strategy: MuStrategy::Adaptive,
            required_faces: Vec::new(),
        }
    }
}

impl ContinuationOptions {
    /// Joint (ε, δ) path; the shorter schedule is padded with its last entry.
    pub fn joint_schedule(&self) -> Result<Vec<(f64, f64)>, ObstacleError> {
        let (e, d) = (&self.eps_schedule, &self.delta_schedule);
        if e.is_empty() || d.is_empty() {
            return Err(ObstacleError::Schedule("empty schedule".into()));
        }
        if e.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
            return Err(ObstacleError::Schedule("epsilon values must lie in (0, 1)".into()));
        }
        if d.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(ObstacleError::Schedule("delta values must be nonnegative".into()));
        }
        if e.windows(2).any(|w| w[1] >= w[0]) || d.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ObstacleError::Schedule("schedules must be strictly decreasing".into()));
        }
        if !(self.tol > 0.0) {
            return Err(ObstacleError::Schedule(format!("tolerance {} must be positive", self.tol)));
        }
        let len = e.len().max(d.len());
        Ok((0..len).map(|i| (e[i.min(e.len() - 1)], d[i.min(d.len() - 1)])).collect())
    }
}

pub fn continuation_solve(
    spec: &OperatorSpec,
    data: &ObstacleData,
    grid: &Grid,
    eps_schedule: &[f64],
    delta_schedule: &[f64],
    tol: f64,
) -> Result<SolveReport, ObstacleError> {
    let opts = ContinuationOptions {
        eps_schedule: eps_schedule.to_vec(),
        delta_schedule: delta_schedule.to_vec(),
        tol,
        ..ContinuationOptions::default()
    };
    continuation_solve_with(spec, data, grid, &opts)
}

pub fn continuation_solve_with(
    spec: &OperatorSpec,
    data: &ObstacleData,
    grid: &Grid,
    opts: &ContinuationOptions,
) -> Result<SolveReport, ObstacleError> {
    let path = opts.joint_schedule()?;
    let mut report = SolveReport {
        final_sup_change: f64::NAN,
        penalty_min: f64::NAN,
        complementarity_residual: f64::NAN,
        equation_residual: f64::NAN,
        obstacle_violation: f64::NAN,
        stages: Vec::new(),
        sup_bound_witness: SupWitness::default(),
        monotone_operator: true,
        stabilized_rows: 0,
        max_viscosity: 0.0,
        tol: opts.tol,
        grid: grid.clone(),
        u: Vec::new(),
        system: None,
    };
    let mut cached: Option<Assembled> = None;
    let mut prev: Option<Vec<f64>> = None;
    for (stage, &(eps, delta)) in path.iter().enumerate() {
        let fail = |report: &SolveReport, e: ObstacleError| ObstacleError::Stage {
            stage,
            source: Box::new(e),
            report: Box::new(report.clone()),
        };
        let asm = match cached.take() {
            Some(a) if a.delta == delta => a,
            _ => assemble_with_faces(spec, data, grid, delta, &opts.required_faces).map_err(|e| fail(&report, e.into()))?,
        };
        report.monotone_operator = asm.op.monotone;
        report.stabilized_rows = asm.op.stabilized_rows;
        report.max_viscosity = asm.op.max_viscosity;
        let prob = PenalizedProblem::from_assembled(asm, eps).map_err(|e| fail(&report, e))?;
        let sol = solve_penalized_from(&prob, opts.tol, opts.max_iter, opts.strategy, prev.as_deref())
            .map_err(|e| fail(&report, e))?;
        let ui = prob.assembled.op.restrict(&sol.u);
        let phi = prob.phi_interior();
        report.stages.push(StageReport {
            epsilon: eps,
            delta,
            inner_iterations: sol.iterations,
            sup_change: sol.sup_change,
            penalty_min: ui.iter().zip(phi).map(|(u, p)| beta(eps, u - p)).fold(f64::INFINITY, f64::min),
            sup_u: sup(&sol.u),
            obstacle_violation: ui.iter().zip(phi).fold(0.0_f64, |m, (u, p)| m.max(p - u)),
            start: sol.start,
            retries: sol.records.iter().map(|r| r.retries).sum(),
            fallbacks: sol.records.iter().filter(|r| r.fallback).count(),
            max_increase: sol.records.iter().fold(0.0_f64, |m, r| m.max(r.max_increase)),
            mu_max: sol.records.iter().fold(0.0_f64, |m, r| m.max(r.mu_max)),
            u0: sol.u0,
            step1_bound: prob.step1_bound(),
            lower_shift: prob.lower_shift(),
        });
        prev = Some(sol.u);
        cached = Some(prob.assembled);
    }
    let asm = cached.expect("at least one stage");
    let u = prev.expect("at least one stage");
    let ui = asm.op.restrict(&u);
    let phi = asm.phi_interior();
    let last = report.stages.last().expect("at least one stage").clone();
    let lu = asm.op.matrix.matvec(&ui);
    let res: Vec<f64> = lu.iter().zip(&asm.rhs).map(|(l, r)| l - r).collect();
    report.complementarity_residual = super::complementarity_residual(&asm.op, &asm.rhs, &ui, &phi).0;
    report.equation_residual = (0..ui.len())
        .filter(|&k| ui[k] - phi[k] > 10.0 * last.epsilon)
        .fold(0.0_f64, |m, k| m.max(res[k].abs()));
    report.obstacle_violation = last.obstacle_violation;
    report.penalty_min = last.penalty_min;
    report.final_sup_change = last.sup_change;
    report.sup_bound_witness = SupWitness {
        sup_u: last.sup_u,
        sup_g: sup(&asm.g),
        sup_f: sup(&asm.f),
        penalty_bound: report.stages.iter().fold(0.0_f64, |m, s| m.max(-s.penalty_min)),
    };
    report.u = u;
    report.system = Some(Box::new(asm));
    Ok(report)
}
