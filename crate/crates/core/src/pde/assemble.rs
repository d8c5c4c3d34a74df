//! Assembly of the discrete operator with Dirichlet data.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Face, Grid};
use super::sparse::{solve_sparse, Csr, CsrBuilder, LinearSolveInfo};
use super::stencil::{compile_field, Row};
use super::PdeError;
use crate::liealg::CompiledPoly;
use crate::operator::{face_report, mollify, mollified_boundary, ObstacleData, OperatorSpec};

/// Interior-node system L u_I + C u_B, with C the coupling to boundary nodes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscreteOperator {
    pub grid: Grid,
    pub interior: Vec<usize>,
    pub matrix: Csr,
    /// interior × all nodes; only boundary columns are populated
    pub coupling: Csr,
    /// Every row has a negative diagonal and nonnegative off-diagonals.
    pub monotone: bool,
    /// Rows whose cross terms needed added axis viscosity.
    pub stabilized_rows: usize,
    /// Largest viscosity coefficient added to a second derivative.
    pub max_viscosity: f64,
    pub description: String,
}

impl DiscreteOperator {
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&i| full[i]).collect()
    }

    /// Full grid function from interior values and boundary values in `boundary`.
    pub fn extend(&self, interior: &[f64], boundary: &[f64]) -> Vec<f64> {
        let mut out = boundary.to_vec();
        for (k, &i) in self.interior.iter().enumerate() {
            out[i] = interior[k];
        }
        out
    }

    /// (L u)_i at interior nodes for a full grid function u.
    pub fn apply(&self, full: &[f64]) -> Vec<f64> {
        let ui = self.restrict(full);
        let a = self.matrix.matvec(&ui);
        let b = self.coupling.matvec(full);
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    }

    /// −C g, the boundary contribution moved to the right-hand side.
    pub fn boundary_rhs(&self, g: &[f64]) -> Vec<f64> {
        self.coupling.matvec(g).into_iter().map(|v| -v).collect()
    }
}

/// Assembled system with the mollified data it was built from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Assembled {
    pub op: DiscreteOperator,
    pub delta: f64,
    /// f^δ / a_0 at interior nodes
    pub f: Vec<f64>,
    /// γ^δ / a_0 at interior nodes
    pub gamma: Vec<f64>,
    /// g^δ at all nodes
    pub g: Vec<f64>,
    /// φ^δ at all nodes
    pub phi: Vec<f64>,
    /// f − C g at interior nodes
    pub rhs: Vec<f64>,
}

impl Assembled {
    pub fn phi_interior(&self) -> Vec<f64> {
        self.op.restrict(&self.phi)
    }
}

pub fn assemble(spec: &OperatorSpec, data: &ObstacleData, grid: &Grid, delta: f64) -> Result<Assembled, PdeError> {
    assemble_with_faces(spec, data, grid, delta, &[])
}

/// [`assemble`] that also fails when any face in `required` violates the exterior-normal condition.
pub fn assemble_with_faces(
    spec: &OperatorSpec,
    data: &ObstacleData,
    grid: &Grid,
    delta: f64,
    required: &[Face],
) -> Result<Assembled, PdeError> {
    let n = grid.dim();
    if spec.n != n {
        return Err(PdeError::Dimension { expected: n, found: spec.n });
    }
    if !required.is_empty() {
        let report = face_report(grid, spec.generators());
        for f in required {
            if report.iter().any(|r| r.axis == f.axis && r.upper == f.upper && !r.passes) {
                return Err(PdeError::ExteriorNormal(*f));
            }
        }
    }
    let q = spec.q();
    let sample = |c: &crate::operator::CoefficientField| grid.sample(|x| c.eval(x));
    let a0 = sample(&spec.a0);
    if let Some(i) = (0..grid.len()).find(|&i| !(a0[i] > 0.0)) {
        return Err(PdeError::Operator(format!("a0 = {} at {:?}", a0[i], grid.point(i))));
    }
    let moll = |v: Vec<f64>| -> Vec<f64> {
        let m = mollify(&v, delta, grid);
        m.iter().zip(&a0).map(|(x, a)| x / a).collect()
    };
    let a: Vec<Vec<Vec<f64>>> =
        (0..q).map(|i| (0..q).map(|j| moll(sample(&spec.a[i][j]))).collect()).collect();
    let b: Vec<Vec<f64>> = (0..q).map(|i| moll(sample(&spec.b[i]))).collect();
    let gamma = moll(sample(&spec.gamma));
    let f = moll(sample(&data.f));
    let phi = mollify(&sample(&data.phi), delta, grid);
    let g = sample(&mollified_boundary(&data.g, data.mu, delta));
    for i in grid.boundary() {
        if g[i] < phi[i] - 1e-12 {
            return Err(PdeError::Compatibility { point: grid.point(i), gap: g[i] - phi[i] });
        }
    }
    let interior = grid.interior();
    for &i in &interior {
        if !(gamma[i] < 0.0) {
            return Err(PdeError::Operator(format!("gamma = {} at {:?} is not negative", gamma[i], grid.point(i))));
        }
        if q > 0 {
            let m = DMatrix::from_fn(q, q, |r, c| a[r][c][i]);
            let lo = SymmetricEigen::new(m).eigenvalues.min();
            if !(lo > 0.0) {
                return Err(PdeError::Operator(format!("A is not positive definite at {:?}", grid.point(i))));
            }
        }
    }

    let c: Vec<Vec<CompiledPoly>> = spec.fields.iter().map(compile_field).collect();
    // xc[i][j][l] = X_i c^j_l for generators i, j ≥ 1
    let xc: Vec<Vec<Vec<CompiledPoly>>> = (1..=q)
        .map(|i| {
            (1..=q)
                .map(|j| spec.fields[j].components().iter().map(|p| spec.fields[i].apply(p).compile()).collect())
                .collect()
        })
        .collect();
    let h = grid.h();

    let rows: Vec<(Row, bool, f64)> = interior
        .par_iter()
        .map(|&node| {
            let x = grid.point(node);
            let cv: Vec<Vec<f64>> = c.iter().map(|f| f.iter().map(|p| p.eval(&x)).collect()).collect();
            let mut bm = vec![vec![0.0; n]; n];
            let mut v = vec![0.0; n];
            for i in 0..q {
                for j in 0..q {
                    let aij = a[i][j][node];
                    if aij == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        let cik = cv[i + 1][k];
                        if cik != 0.0 {
                            for l in 0..n {
                                bm[k][l] += aij * cik * cv[j + 1][l];
                            }
                        }
                    }
                    for l in 0..n {
                        v[l] += aij * xc[i][j][l].eval(&x);
                    }
                }
                for l in 0..n {
                    v[l] += b[i][node] * cv[i + 1][l];
                }
            }
            let nb = |k: usize, d: isize| (node as isize + d * grid.stride(k) as isize) as usize;
            let nb2 = |k: usize, dk: isize, l: usize, dl: isize| {
                (node as isize + dk * grid.stride(k) as isize + dl * grid.stride(l) as isize) as usize
            };
            let mut row: Row = vec![(node, gamma[node])];
            // Axis viscosity where the seven-point cross stencil is not diagonally dominant.
            let mut visc = 0.0_f64;
            for k in 0..n {
                let cross: f64 = (0..n).filter(|&l| l != k).map(|l| bm[k][l].abs() * h[k] / h[l]).sum();
                if cross > bm[k][k] {
                    visc = visc.max(cross - bm[k][k]);
                    bm[k][k] = cross;
                }
            }
            let cross = |k: usize| -> f64 {
                (0..n).filter(|&l| l != k).map(|l| bm[k][l].abs() / (h[k] * h[l])).sum()
            };
            for k in 0..n {
                let w = bm[k][k] / (h[k] * h[k]);
                if w != 0.0 {
                    row.push((nb(k, -1), w));
                    row.push((nb(k, 1), w));
                    row.push((node, -2.0 * w));
                }
            }
            for k in 0..n {
                for l in k + 1..n {
                    let bkl = bm[k][l];
                    if bkl == 0.0 {
                        continue;
                    }
                    let w = bkl.abs() / (h[k] * h[l]);
                    let s: isize = if bkl > 0.0 { 1 } else { -1 };
                    row.push((nb2(k, 1, l, s), w));
                    row.push((nb2(k, -1, l, -s), w));
                    row.push((node, 2.0 * w));
                    for (ax, d) in [(k, 1), (k, -1), (l, 1), (l, -1)] {
                        row.push((nb(ax, d), -w));
                    }
                }
            }
            for l in 0..n {
                let vl = v[l];
                if vl != 0.0 {
                    let avail = bm[l][l] / (h[l] * h[l]) - cross(l);
                    if vl.abs() / (2.0 * h[l]) <= avail * (1.0 + 1e-12) {
                        row.push((nb(l, 1), vl / (2.0 * h[l])));
                        row.push((nb(l, -1), -vl / (2.0 * h[l])));
                    } else if vl > 0.0 {
                        row.push((nb(l, 1), vl / h[l]));
                        row.push((node, -vl / h[l]));
                    } else {
                        row.push((nb(l, -1), -vl / h[l]));
                        row.push((node, vl / h[l]));
                    }
                }
                let dl = cv[0][l];
                if dl > 0.0 {
                    row.push((nb(l, -1), dl / h[l]));
                    row.push((node, -dl / h[l]));
                } else if dl < 0.0 {
                    row.push((nb(l, 1), -dl / h[l]));
                    row.push((node, dl / h[l]));
                }
            }
            // merge duplicates and judge the sign pattern
            row.sort_by_key(|e| e.0);
            let mut merged: Row = Vec::with_capacity(row.len());
            for (j, w) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            let scale = merged.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
            let mono = merged.iter().all(|&(j, w)| if j == node { w < 0.0 } else { w >= -1e-12 * scale });
            (merged, mono, visc)
        })
        .collect();

    let imap = grid.interior_map();
    let mut mb = CsrBuilder::new(interior.len());
    let mut cb = CsrBuilder::new(grid.len());
    let mut monotone = true;
    let (mut stabilized, mut max_visc) = (0, 0.0_f64);
    for (row, mono, visc) in rows {
        monotone &= mono;
        stabilized += (visc > 0.0) as usize;
        max_visc = max_visc.max(visc);
        let (mut ri, mut rb) = (Vec::new(), Vec::new());
        for (j, w) in row {
            if w == 0.0 {
                continue;
            }
            match imap[j] {
                Some(k) => ri.push((k, w)),
                None => rb.push((j, w)),
            }
        }
        mb.push_row(ri);
        cb.push_row(rb);
    }
    let op = DiscreteOperator {
        grid: grid.clone(),
        interior: interior.clone(),
        matrix: mb.finish(),
        coupling: cb.finish(),
        monotone,
        stabilized_rows: stabilized,
        max_viscosity: max_visc,
        description: format!(
            "sum a_ij X_iX_j + sum b_i X_i - X_0 + gamma, q = {q}, n = {n}, delta = {delta}, {} interior nodes",
            interior.len()
        ),
    };
    let fi: Vec<f64> = interior.iter().map(|&i| f[i]).collect();
    let gi: Vec<f64> = interior.iter().map(|&i| gamma[i]).collect();
    let bnd = op.boundary_rhs(&g);
    let rhs = fi.iter().zip(&bnd).map(|(a, b)| a + b).collect();
    Ok(Assembled { op, delta, f: fi, gamma: gi, g, phi, rhs })
}

/// Solves L u_I = rhs on the interior.
pub fn solve_linear(op: &DiscreteOperator, rhs: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>, PdeError> {
    solve_sparse(&op.matrix, rhs, None, tol, max_iter).map(|(x, _)| x)
}

pub fn solve_linear_info(
    op: &DiscreteOperator,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, LinearSolveInfo), PdeError> {
    solve_sparse(&op.matrix, rhs, None, tol, max_iter)
}

/// Random sign tests of the discrete maximum principle: L u ≥ 0 inside and
/// u ≤ 0 on the boundary must give u ≤ 0. Returns the largest max u seen.
pub fn max_principle_witness(op: &DiscreteOperator, trials: usize, seed: u64) -> Result<f64, PdeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let scale = op.matrix.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for _ in 0..trials {
        let r: Vec<f64> = (0..op.interior.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let g: Vec<f64> = (0..op.grid.len()).map(|_| -rng.gen_range(0.0..1.0)).collect();
        let bnd = op.boundary_rhs(&g);
        let rhs: Vec<f64> = r.iter().zip(&bnd).map(|(a, b)| a + b).collect();
        let u = solve_linear(op, &rhs, 1e-10 * scale.max(1.0), 5000)?;
        let m = u.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        worst = worst.max(m);
        if m > 1e-8 {
            return Err(PdeError::MaxPrinciple { max: m });
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{parse_field, PolyVectorField};
    use crate::operator::CoefficientField;

    fn data(f: f64, g: f64) -> ObstacleData {
        ObstacleData {
            f: CoefficientField::constant(f),
            g: CoefficientField::constant(g),
            phi: CoefficientField::constant(-1e6),
            mu: 0.0,
        }
    }

    #[test]
    fn one_d_pattern() {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![6]).unwrap();
        let spec = OperatorSpec::standard(None, vec![PolyVectorField::coordinate(1, 0)], -1.0).unwrap();
        let asm = assemble(&spec, &data(0.0, 0.0), &grid, 0.0).unwrap();
        let h2 = 0.04;
        let m = &asm.op.matrix;
        assert!((m.get(1, 1) - (-2.0 / h2 - 1.0)).abs() < 1e-9);
        assert!((m.get(1, 0) - 1.0 / h2).abs() < 1e-9);
        assert!((m.get(1, 2) - 1.0 / h2).abs() < 1e-9);
        assert_eq!(m.get(0, 2), 0.0);
        assert!(asm.op.monotone);
    }

    #[test]
    fn constants_are_reproduced() {
        let grid = Grid::uniform(0.0, 1.0, 2, 9).unwrap();
        let spec = OperatorSpec::standard(
            Some(parse_field("d/dx2", 2).unwrap()),
            vec![parse_field("d/dx1", 2).unwrap()],
            -1.0,
        )
        .unwrap();
        let asm = assemble(&spec, &data(-1.0, 1.0), &grid, 0.0).unwrap();
        let u = solve_linear(&asm.op, &asm.rhs, 1e-13, 100).unwrap();
        assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let full = asm.op.extend(&u, &asm.g);
        let r: Vec<f64> = asm.op.apply(&full).iter().zip(&asm.f).map(|(a, b)| a - b).collect();
        assert!(crate::pde::sparse::inf_norm(&r) <= 1e-12);
    }

    #[test]
    fn heat_rows_use_the_previous_time_level() {
        let grid = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![5, 5]).unwrap();
        let spec = OperatorSpec::standard(
            Some(parse_field("d/dx2", 2).unwrap()),
            vec![parse_field("d/dx1", 2).unwrap()],
            -1.0,
        )
        .unwrap();
        let asm = assemble(&spec, &data(0.0, 0.0), &grid, 0.0).unwrap();
        let node = grid.linear_index(&[2, 2]);
        let imap = grid.interior_map();
        let k = imap[node].unwrap();
        assert_eq!(asm.op.coupling.row(k).count(), 0);
        let below = imap[grid.linear_index(&[2, 1])].unwrap();
        let above = imap[grid.linear_index(&[2, 3])].unwrap();
        let ht = 0.25;
        assert!((asm.op.matrix.get(k, below) - 1.0 / ht).abs() < 1e-12);
        assert_eq!(asm.op.matrix.get(k, above), 0.0);
        assert!((asm.op.matrix.get(k, k) - (-2.0 / 0.0625 - 1.0 / ht - 1.0)).abs() < 1e-9);
    }
}
