//! Reference problems on the example geometries.

mod kolmogorov;
mod run;

use serde::{Deserialize, Serialize};

use crate::group::{abelian_group, group_by_name, HomogeneousGroup};
use crate::liealg::{parse_field, PolyVectorField};
use crate::obstacle::ContinuationOptions;
use crate::operator::{face_report, CoefficientField, FaceCheck, ObstacleData, OperatorSpec};
use crate::pde::{Face, Grid};

pub use kolmogorov::{kolmogorov_block_check, kolmogorov_corpus, kolmogorov_fields, BlockCheck};
pub use run::{run_benchmark, BenchReport, OracleComparison, RunSettings};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("unknown benchmark '{0}'")]
    Unknown(String),
    #[error("bad grid override: {0}")]
    Grid(String),
}

pub const BENCHMARKS: &[&str] = &["parabolic-1d", "parabolic-2d", "kolmogorov", "example3", "example4-link"];

#[derive(Clone, Debug)]
pub struct BenchmarkProblem {
    pub name: String,
    pub description: String,
    /// coordinate names in grid order
    pub coords: Vec<String>,
    pub group: Option<HomogeneousGroup>,
    pub spec: OperatorSpec,
    pub data: ObstacleData,
    pub grid: Grid,
    pub faces: Vec<FaceCheck>,
    /// faces where the exterior-normal condition holds; assembly insists on them
    pub required_faces: Vec<Face>,
    pub options: ContinuationOptions,
    pub psor_omega: f64,
    pub expected: Expected,
}

/// What a run is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    /// projected SOR on the final assembled system
    PsorOracle,
}

impl BenchmarkProblem {
    /// Same problem on another grid: one node count for every axis or one per axis.
    pub fn with_nodes(mut self, nodes: &[usize]) -> Result<Self, BenchError> {
        let n = self.grid.dim();
        let nodes = match nodes.len() {
            1 => vec![nodes[0]; n],
            k if k == n => nodes.to_vec(),
            k => return Err(BenchError::Grid(format!("{k} node counts for a {n}-dimensional grid"))),
        };
        self.grid = Grid::new(self.grid.lo().to_vec(), self.grid.hi().to_vec(), nodes)
            .map_err(|e| BenchError::Grid(e.to_string()))?;
        self.refresh_faces();
        Ok(self)
    }

    /// A problem outside the registry, with the default continuation schedule.
    pub fn custom(
        name: &str,
        description: &str,
        group: Option<HomogeneousGroup>,
        spec: OperatorSpec,
        data: ObstacleData,
        grid: Grid,
    ) -> Self {
        let coords = (1..=grid.dim()).map(|k| format!("x{k}")).collect();
        let mut p = BenchmarkProblem {
            name: name.to_string(),
            description: description.to_string(),
            coords,
            group,
            spec,
            data,
            grid,
            faces: Vec::new(),
            required_faces: Vec::new(),
            options: ContinuationOptions::default(),
            psor_omega: 1.2,
            expected: Expected::PsorOracle,
        };
        p.refresh_faces();
        p
    }

    fn refresh_faces(&mut self) {
        self.faces = face_report(&self.grid, self.spec.generators());
        self.required_faces = self.faces.iter().filter(|f| f.passes).map(|f| Face { axis: f.axis, upper: f.upper }).collect();
        self.options.required_faces = self.required_faces.clone();
    }
}

fn field(s: &str, n: usize) -> PolyVectorField {
    parse_field(s, n).expect("registered field parses")
}

fn poly(s: &str, n: usize) -> CoefficientField {
    CoefficientField::parse(s, n).expect("registered data parses")
}

#[allow(clippy::too_many_arguments)]
fn problem(
    name: &str,
    description: &str,
    coords: &[&str],
    group: Option<HomogeneousGroup>,
    drift: &str,
    generators: &[&str],
    phi: &str,
    g: &str,
    f: &str,
    mu: f64,
    grid: Grid,
    psor_omega: f64,
) -> BenchmarkProblem {
    let n = coords.len();
    let spec = OperatorSpec::standard(Some(field(drift, n)), generators.iter().map(|s| field(s, n)).collect(), -1.0)
        .expect("registered operator");
    let data = ObstacleData { f: poly(f, n), g: poly(g, n), phi: poly(phi, n), mu };
    let mut p = BenchmarkProblem::custom(name, description, group, spec, data, grid);
    p.coords = coords.iter().map(|c| c.to_string()).collect();
    p.psor_omega = psor_omega;
    p.options = ContinuationOptions {
        eps_schedule: vec![1e-3, 3e-4, 1e-4],
        delta_schedule: vec![0.001, 0.0],
        tol: 2e-5,
        required_faces: p.required_faces.clone(),
        ..ContinuationOptions::default()
    };
    p
}

pub fn build_example(name: &str) -> Result<BenchmarkProblem, BenchError> {
    let grid = |lo: &[f64], hi: &[f64], nodes: &[usize]| Grid::new(lo.to_vec(), hi.to_vec(), nodes.to_vec()).expect("default grid");
    let p = match name {
        "parabolic-1d" => problem(
            name,
            "u_xx - u_t - u on (x,t) in [0,1]^2",
            &["x", "t"],
            Some(abelian_group(name, vec![1, 2])),
            "d/dx2",
            &["d/dx1"],
            "1 + 0.48*(x1 - 0.5)^2",
            "1.12",
            "0",
            0.48,
            grid(&[0.0, 0.0], &[1.0, 1.0], &[129, 129]),
            1.5,
        ),
        "parabolic-2d" => problem(
            name,
            "u_xx + u_yy - u_t - u on (x,y,t) in [0,1]^3, data lifted at t = 0",
            &["x", "y", "t"],
            Some(abelian_group(name, vec![1, 1, 2])),
            "d/dx3",
            &["d/dx1", "d/dx2"],
            "1 + 0.2*((x1 - 0.5)^2 + (x2 - 0.5)^2)",
            "1 + 0.2*((x1 - 0.5)^2 + (x2 - 0.5)^2) + 3.2*x1*(1 - x1)*x2*(1 - x2)*(1 - x3)^2",
            "-0.2*((x1 - 0.5)^2 + (x2 - 0.5)^2)",
            0.2 * 2f64.sqrt(),
            grid(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], &[65, 65, 33]),
            1.8,
        ),
        "kolmogorov" => problem(
            name,
            "u_xx - (x u_y + u_t) - u on (x,t,y) in [-1,1]x[0,1]x[-1,1]",
            &["x", "t", "y"],
            group_by_name("kolmogorov"),
            "x1*d/dx3 + d/dx2",
            &["d/dx1"],
            "0.5 + 0.25*x1^2",
            "0.75",
            "0",
            0.5,
            grid(&[-1.0, 0.0, -1.0], &[1.0, 1.0, 1.0], &[33, 17, 33]),
            1.5,
        ),
        "example3" => problem(
            name,
            "X^2 + Y^2 - Z - 1 on (x,y,z,w,t), X = d_x - xy d_t, Y = d_y + x d_w, Z = d_z + x d_t",
            &["x", "y", "z", "w", "t"],
            group_by_name("example3"),
            "d/dx3 + x1*d/dx5",
            &["d/dx1 - x1*x2*d/dx5", "d/dx2 + x1*d/dx4"],
            "1 + 0.25*((x1 - 1.5)^2 + (x2 - 1.5)^2)",
            "1 + 0.25*((x1 - 1.5)^2 + (x2 - 1.5)^2) + 3.2*(x1 - 1)*(2 - x1)*(x2 - 1)*(2 - x2)*(1 - x3)^2",
            "0.2 - 0.25*((x1 - 1.5)^2 + (x2 - 1.5)^2)",
            0.25 * 2f64.sqrt(),
            grid(&[1.0, 1.0, 0.0, 0.0, 0.0], &[2.0, 2.0, 1.0, 2.0, 4.0], &[9, 9, 9, 9, 9]),
            1.2,
        ),
        "example4-link" => problem(
            name,
            "X1^2 + X2^2 - X0 - 1 on (x,y,s,t,w), X0 = x d_w - d_t, X1 = d_x + y d_s, X2 = d_y - x d_s",
            &["x", "y", "s", "t", "w"],
            group_by_name("example4-link"),
            "x1*d/dx5 - d/dx4",
            &["d/dx1 + x2*d/dx3", "d/dx2 - x1*d/dx3"],
            "1 + 0.25*((x1 - 1.5)^2 + (x2 - 1.5)^2)",
            "1 + 0.25*((x1 - 1.5)^2 + (x2 - 1.5)^2) + 3.2*(x1 - 1)*(2 - x1)*(x2 - 1)*(2 - x2)*x4^2",
            "0.2 - 0.25*((x1 - 1.5)^2 + (x2 - 1.5)^2)",
            0.25 * 2f64.sqrt(),
            grid(&[1.0, 1.0, 0.0, 0.0, 0.0], &[2.0, 2.0, 2.0, 1.0, 1.0], &[9, 9, 9, 9, 9]),
            1.2,
        ),
        _ => return Err(BenchError::Unknown(name.to_string())),
    };
    Ok(p)
}
