//! report.json and solution.csv: writers and the matching readers.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use subobstacle::bench::BenchReport;
use subobstacle::group::GroupCheckReport;
use subobstacle::obstacle::{SolveReport, StageReport};
use subobstacle::operator::FaceCheck;
use subobstacle::pde::{read_grid_csv, write_grid_csv, Grid, GridCsv};

use crate::config::RunConfig;

pub const REPORT_FILE: &str = "report.json";
pub const SOLUTION_FILE: &str = "solution.csv";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub problem: String,
    pub seed: u64,
    pub config: RunConfig,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    GroupCheck {
        group: String,
        report: GroupCheckReport,
        homogeneous_dimension: u32,
        /// left-invariance residual of each field of the problem
        left_invariance: Vec<f64>,
        homogeneity_degrees: Vec<Option<i64>>,
        passed: bool,
    },
    Hormander {
        spans: bool,
        step: Option<u32>,
        max_weight: u32,
        points: usize,
        ranks: Vec<usize>,
        /// commutators up to the step, as `multiindex: field`
        basis: Vec<String>,
    },
    ObstacleCheck {
        compatibility: Result<(), String>,
        ellipticity: Result<f64, String>,
        /// (δ, smallest eigenvalue or failure) for each δ of the schedule
        convexity: Vec<(f64, Result<f64, String>)>,
        faces: Vec<FaceCheck>,
        max_principle: Result<f64, String>,
        passed: bool,
    },
    Solved {
        report: SolveReport,
    },
    Benchmark {
        report: BenchReport,
        checks: Vec<Check>,
    },
    Failed {
        error: String,
        /// stages completed before the failure
        stages: Vec<StageReport>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// absent when the quantity is undefined (e.g. no contact)
    pub value: Option<f64>,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        let value = value.is_finite().then_some(value);
        Check { name: name.to_string(), value, limit, passed: value.is_some_and(|v| v <= limit) }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Csv(String),
}

pub fn report_to_string(r: &RunReport) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(r)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(dir: &Path, r: &RunReport) -> Result<(), ReportError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(REPORT_FILE), report_to_string(r)?)?;
    fs::write(dir.join(CONFIG_FILE), crate::config::write_config(&r.config))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<RunReport, ReportError> {
    Ok(serde_json::from_reader(BufReader::new(fs::File::open(path)?))?)
}

pub fn write_solution(dir: &Path, grid: &Grid, u: &[f64]) -> Result<(), ReportError> {
    fs::create_dir_all(dir)?;
    let f = fs::File::create(dir.join(SOLUTION_FILE))?;
    let mut w = std::io::BufWriter::new(f);
    write_grid_csv(&mut w, grid, u)?;
    std::io::Write::flush(&mut w)?;
    Ok(())
}

pub fn read_solution(path: &Path) -> Result<GridCsv, ReportError> {
    read_grid_csv(BufReader::new(fs::File::open(path)?)).map_err(|e| ReportError::Csv(e.to_string()))
}
