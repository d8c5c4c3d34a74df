use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "subobstacle", version, about = "Obstacle problems for subelliptic operators with drift")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Group axioms, homogeneous dimension and left invariance of the fields
    CheckGroup(ProblemArgs),
    /// Hörmander rank of the fields at seeded rational points
    CheckHormander(ProblemArgs),
    /// Data compatibility, ellipticity, obstacle convexity, boundary faces, maximum principle
    CheckObstacle(ProblemArgs),
    /// Penalized continuation solve; writes report.json and solution.csv
    Solve(ProblemArgs),
    /// Reference problems
    Bench {
        #[command(subcommand)]
        action: BenchAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum BenchAction {
    /// List the reference problems
    List,
    /// Solve a reference problem and compare it with the oracle
    Run {
        name: String,
        #[command(flatten)]
        args: ProblemArgs,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProblemArgs {
    /// registered example (or group name for check-group)
    #[arg(long, conflicts_with = "config")]
    pub example: Option<String>,
    /// TOML file with [problem], [solve] and [run] sections
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// nodes per axis: one count or a comma list
    #[arg(long, value_delimiter = ',')]
    pub nodes: Option<Vec<usize>>,
    #[arg(long = "eps-schedule", value_delimiter = ',')]
    pub eps_schedule: Option<Vec<f64>>,
    #[arg(long = "delta-schedule", value_delimiter = ',')]
    pub delta_schedule: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// random samples for the group and rank checks
    #[arg(long)]
    pub samples: Option<usize>,
    /// largest weighted commutator length tried
    #[arg(long = "max-weight")]
    pub max_weight: Option<u32>,
}
