//! Operator data H = Σ a_ij X_iX_j + Σ b_i X_i − a_0 X_0 with zeroth-order term γ,
//! plus the checks the solver relies on.

mod coeff;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use coeff::{CoefficientField, CoefficientKind};

use crate::liealg::PolyVectorField;
use crate::pde::{discretize_second, Face, Grid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("coefficient matrix is not symmetric at {point:?}")]
    NotSymmetric { point: Vec<f64> },
    #[error("ellipticity fails at {point:?}: eigenvalue {value}")]
    Ellipticity { point: Vec<f64>, value: f64 },
    #[error("a0 must be positive, got {value} at {point:?}")]
    A0 { point: Vec<f64>, value: f64 },
    #[error("gamma must be negative on the grid, max is {max}")]
    Gamma { max: f64 },
    #[error("boundary data below the obstacle at {point:?}: g - phi = {gap}")]
    Compatibility { point: Vec<f64>, gap: f64 },
    #[error("non-finite coefficient value at {point:?}")]
    NonFinite { point: Vec<f64> },
}

/// Full operator specification. `fields[0]` is the drift X_0 (possibly the
/// zero field) and `fields[1..]` are X_1..X_q.
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub n: usize,
    pub fields: Vec<PolyVectorField>,
    pub a: Vec<Vec<CoefficientField>>,
    pub b: Vec<CoefficientField>,
    pub a0: CoefficientField,
    pub gamma: CoefficientField,
    /// Largest γ observed on the validation grid.
    pub gamma0: f64,
    /// Ellipticity constant observed on the validation grid.
    pub lambda: f64,
}

impl OperatorSpec {
    pub fn new(
        drift: Option<PolyVectorField>,
        generators: Vec<PolyVectorField>,
        a: Vec<Vec<CoefficientField>>,
        b: Vec<CoefficientField>,
        a0: CoefficientField,
        gamma: CoefficientField,
    ) -> Result<Self, OperatorError> {
        let n = generators.first().map(|f| f.n()).or(drift.as_ref().map(|f| f.n())).unwrap_or(0);
        let q = generators.len();
        if generators.iter().chain(drift.iter()).any(|f| f.n() != n) {
            return Err(OperatorError::Dimension("fields must share the dimension".into()));
        }
        if a.len() != q || a.iter().any(|r| r.len() != q) || b.len() != q {
            return Err(OperatorError::Dimension(format!("A must be {q}x{q} and b of length {q}")));
        }
        let x0 = drift.unwrap_or_else(|| PolyVectorField::zero(n, 2)).set_weight(2);
        let mut fields = vec![x0];
        fields.extend(generators.into_iter().map(|f| f.set_weight(1)));
        Ok(OperatorSpec { n, fields, a, b, a0, gamma, gamma0: f64::NAN, lambda: f64::NAN })
    }

    /// A = identity, b = 0, a_0 = 1 and constant γ.
    pub fn standard(drift: Option<PolyVectorField>, generators: Vec<PolyVectorField>, gamma: f64) -> Result<Self, OperatorError> {
        let q = generators.len();
        let a = (0..q)
            .map(|i| (0..q).map(|j| CoefficientField::constant(if i == j { 1.0 } else { 0.0 })).collect())
            .collect();
        let b = vec![CoefficientField::constant(0.0); q];
        Self::new(drift, generators, a, b, CoefficientField::constant(1.0), CoefficientField::constant(gamma))
    }

    pub fn q(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn drift(&self) -> &PolyVectorField {
        &self.fields[0]
    }

    pub fn generators(&self) -> &[PolyVectorField] {
        &self.fields[1..]
    }

    pub fn a_at(&self, x: &[f64]) -> DMatrix<f64> {
        let q = self.q();
        DMatrix::from_fn(q, q, |i, j| self.a[i][j].eval(x))
    }

    /// Runs symmetry, ellipticity and sign checks at the grid nodes and stores λ and γ_0.
    pub fn validate(&mut self, grid: &Grid) -> Result<(), OperatorError> {
        if grid.dim() != self.n {
            return Err(OperatorError::Dimension(format!("grid has dimension {}, operator {}", grid.dim(), self.n)));
        }
        let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
        self.lambda = ellipticity_check(self, &points)?;
        let gmax = points.par_iter().map(|p| self.gamma.eval(p)).reduce(|| f64::NEG_INFINITY, f64::max);
        if !(gmax < 0.0) {
            return Err(OperatorError::Gamma { max: gmax });
        }
        self.gamma0 = gmax;
        Ok(())
    }

    /// Divides A, b and γ by a_0 so that the drift enters with unit coefficient.
    pub fn normalized(&self) -> OperatorSpec {
        let d = |c: &CoefficientField| c.divided_by(&self.a0);
        OperatorSpec {
            n: self.n,
            fields: self.fields.clone(),
            a: self.a.iter().map(|r| r.iter().map(d).collect()).collect(),
            b: self.b.iter().map(d).collect(),
            a0: CoefficientField::constant(1.0),
            gamma: d(&self.gamma),
            gamma0: f64::NAN,
            lambda: f64::NAN,
        }
    }
}

/// Obstacle-problem data on the closure of the box.
#[derive(Clone, Debug)]
pub struct ObstacleData {
    pub f: CoefficientField,
    pub g: CoefficientField,
    pub phi: CoefficientField,
    /// Lipschitz bound of φ used in g^δ = g + μδ.
    pub mu: f64,
}

impl ObstacleData {
    /// g ≥ φ at every boundary node.
    pub fn check_compatibility(&self, grid: &Grid) -> Result<(), OperatorError> {
        for i in grid.boundary() {
            let p = grid.point(i);
            let gap = self.g.eval(&p) - self.phi.eval(&p);
            if gap < -1e-12 {
                return Err(OperatorError::Compatibility { point: p, gap });
            }
        }
        Ok(())
    }
}

/// Smallest λ ≥ 1 with λ^{-1}|ξ|² ≤ ⟨A ξ, ξ⟩ ≤ λ|ξ|² and λ^{-1} ≤ a_0 ≤ λ at all points.
pub fn ellipticity_check(spec: &OperatorSpec, points: &[Vec<f64>]) -> Result<f64, OperatorError> {
    let q = spec.q();
    let per_point: Result<Vec<f64>, OperatorError> = points
        .par_iter()
        .map(|p| {
            let a = spec.a_at(p);
            if a.iter().any(|v| !v.is_finite()) {
                return Err(OperatorError::NonFinite { point: p.clone() });
            }
            for i in 0..q {
                for j in 0..i {
                    if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * (1.0 + a[(i, j)].abs()) {
                        return Err(OperatorError::NotSymmetric { point: p.clone() });
                    }
                }
            }
            let mut lam: f64 = 1.0;
            if q > 0 {
                let eig = SymmetricEigen::new(a).eigenvalues;
                let lo = eig.min();
                let hi = eig.max();
                if lo <= 0.0 {
                    return Err(OperatorError::Ellipticity { point: p.clone(), value: lo });
                }
                lam = lam.max(hi).max(1.0 / lo);
            }
            let a0 = spec.a0.eval(p);
            if !(a0 > 0.0) {
                return Err(OperatorError::A0 { point: p.clone(), value: a0 });
            }
            Ok(lam.max(a0).max(1.0 / a0))
        })
        .collect();
    Ok(per_point?.into_iter().fold(1.0, f64::max))
}

/// Kernel offsets (node shift, weight) of the bump (1 − (r/δ)²)³ on `grid`.
fn kernel(grid: &Grid, delta: f64) -> Vec<(Vec<isize>, f64)> {
    let n = grid.dim();
    let radius: Vec<isize> = grid.h().iter().map(|h| (delta / h).floor() as isize).collect();
    let mut out = Vec::new();
    let mut off = vec![0isize; n];
    let total: usize = radius.iter().map(|r| (2 * r + 1) as usize).product();
    for mut c in 0..total {
        for k in 0..n {
            let w = (2 * radius[k] + 1) as usize;
            off[k] = (c % w) as isize - radius[k];
            c /= w;
        }
        let r2: f64 = off.iter().zip(grid.h()).map(|(&o, h)| (o as f64 * h).powi(2)).sum();
        let t = 1.0 - r2 / (delta * delta);
        if t > 0.0 {
            out.push((off.clone(), t.powi(3)));
        }
    }
    out
}

/// Per-axis kernel reach in nodes.
pub fn mollifier_reach(grid: &Grid, delta: f64) -> Vec<usize> {
    grid.h().iter().map(|h| if delta > 0.0 { (delta / h).floor() as usize } else { 0 }).collect()
}

/// Discrete convolution with the bump kernel of radius δ, renormalized where truncated.
pub fn mollify(values: &[f64], delta: f64, grid: &Grid) -> Vec<f64> {
    assert_eq!(values.len(), grid.len());
    if delta <= 0.0 {
        return values.to_vec();
    }
    let ker = kernel(grid, delta);
    if ker.len() <= 1 {
        return values.to_vec();
    }
    let n = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let m = grid.multi_index(i);
            let (mut s, mut w) = (0.0, 0.0);
            'k: for (off, wk) in &ker {
                let mut j = 0usize;
                for k in 0..n {
                    let a = m[k] as isize + off[k];
                    if a < 0 || a >= grid.nodes()[k] as isize {
                        continue 'k;
                    }
                    j += a as usize * grid.stride(k);
                }
                s += wk * values[j];
                w += wk;
            }
            s / w
        })
        .collect()
}

/// g^δ = g + μδ.
pub fn mollified_boundary(g: &CoefficientField, mu: f64, delta: f64) -> CoefficientField {
    g.plus_constant(mu * delta)
}

fn on_face(grid: &Grid, p: &[f64], f: Face) -> bool {
    let target = if f.upper { grid.hi()[f.axis] } else { grid.lo()[f.axis] };
    let scale = (grid.hi()[f.axis] - grid.lo()[f.axis]).abs().max(1.0);
    (p[f.axis] - target).abs() <= 1e-12 * scale
}

/// |C(ς) v| for the outward normal of `face`.
fn normal_image(fields: &[PolyVectorField], p: &[f64], face: Face) -> f64 {
    let sign = if face.upper { 1.0 } else { -1.0 };
    fields.iter().map(|f| (f.component(face.axis).eval_f64(p) * sign).powi(2)).sum::<f64>().sqrt()
}

/// For each boundary point, whether some face normal v at it has C(ς)v ≠ 0.
pub fn exterior_normal_check(grid: &Grid, fields: &[PolyVectorField], points: &[Vec<f64>]) -> Vec<bool> {
    points
        .iter()
        .map(|p| grid.faces().into_iter().filter(|&f| on_face(grid, p, f)).any(|f| normal_image(fields, p, f) > 1e-12))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceCheck {
    pub axis: usize,
    pub upper: bool,
    pub passes: bool,
    pub failing_nodes: usize,
    pub total_nodes: usize,
}

/// Exterior-normal condition evaluated face by face at the face nodes.
pub fn face_report(grid: &Grid, fields: &[PolyVectorField]) -> Vec<FaceCheck> {
    grid.faces()
        .into_iter()
        .map(|f| {
            let nodes = grid.face_nodes(f);
            let failing = nodes.iter().filter(|&&i| normal_image(fields, &grid.point(i), f) <= 1e-12).count();
            FaceCheck { axis: f.axis, upper: f.upper, passes: failing == 0, failing_nodes: failing, total_nodes: nodes.len() }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("obstacle convexity fails: min eigenvalue {min_eigenvalue} at {point:?}")]
pub struct ConvexityViolation {
    pub min_eigenvalue: f64,
    pub point: Vec<f64>,
}

/// Smallest eigenvalue of the symmetrized matrix (X_iX_j φ^δ) over interior
/// nodes whose mollification is not truncated by the boundary.
pub fn obstacle_convexity_check(
    phi: &[f64],
    fields: &[PolyVectorField],
    grid: &Grid,
    delta: f64,
) -> Result<f64, ConvexityViolation> {
    let q = fields.len();
    let ph = mollify(phi, delta, grid);
    let mut ops = vec![vec![None; q]; q];
    for i in 0..q {
        for j in 0..q {
            ops[i][j] = Some(discretize_second(&fields[i], &fields[j], grid).expect("fields match grid"));
        }
    }
    let reach = mollifier_reach(grid, delta);
    let deep: Vec<usize> = grid
        .interior()
        .into_iter()
        .filter(|&i| {
            (0..grid.dim()).all(|k| {
                let a = grid.axis_index(i, k);
                a > reach[k] + 1 && a + reach[k] + 2 < grid.nodes()[k]
            })
        })
        .collect();
    let nodes = if deep.is_empty() { grid.interior() } else { deep };
    let row_val = |m: &crate::pde::Csr, i: usize| m.row(i).map(|(j, w)| w * ph[j]).sum::<f64>();
    let (c, at) = nodes
        .par_iter()
        .map(|&i| {
            let m = DMatrix::from_fn(q, q, |a, b| {
                0.5 * (row_val(ops[a][b].as_ref().unwrap(), i) + row_val(ops[b][a].as_ref().unwrap(), i))
            });
            (SymmetricEigen::new(m).eigenvalues.min(), i)
        })
        .reduce(|| (f64::INFINITY, usize::MAX), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    if !(c > 1e-9) {
        let point = if at == usize::MAX { Vec::new() } else { grid.point(at) };
        return Err(ConvexityViolation { min_eigenvalue: c, point });
    }
    Ok(c)
}
