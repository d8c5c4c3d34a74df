//! Command-line front end: checks, solves and the reference problems.

pub mod args;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use subobstacle::bench::{build_example, run_benchmark, BenchmarkProblem, RunSettings, BENCHMARKS};
use subobstacle::group::{
    group_by_name, group_names, homogeneous_dimension, left_invariance_check, rational_samples, verify_group,
    HomogeneousGroup,
};
use subobstacle::liealg::{hoermander_rank, homogeneity_degree};
use subobstacle::obstacle::{ObstacleError, StageReport};
use subobstacle::operator::{ellipticity_check, face_report, obstacle_convexity_check};
use subobstacle::pde::{assemble, max_principle_witness, PdeError};

use args::{BenchAction, Cli, Command, ProblemArgs};
use config::{RunConfig, UsageError};
use report::{write_report, write_solution, Check, Outcome, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

const DEFAULT_SAMPLES: usize = 10;
const DEFAULT_MAX_WEIGHT: u32 = 6;

enum Failure {
    Usage(String),
    Validation(String),
    Solver(String),
    Io(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<report::ReportError> for Failure {
    fn from(e: report::ReportError) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        EXIT_OK
                    }
                }
                _ => EXIT_USAGE,
            };
        }
    };
    let res = match cli.command {
        Command::CheckGroup(a) => check_group(&a),
        Command::CheckHormander(a) => check_hormander(&a),
        Command::CheckObstacle(a) => check_obstacle(&a),
        Command::Solve(a) => solve(&a),
        Command::Bench { action: BenchAction::List } => {
            bench_list();
            Ok(EXIT_OK)
        }
        Command::Bench { action: BenchAction::Run { name, args } } => bench_run(&name, &args),
    };
    match res {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("run with --help for usage");
            EXIT_USAGE
        }
        Err(Failure::Validation(m)) => {
            eprintln!("validation failed: {m}");
            EXIT_VALIDATION
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failed: {m}");
            EXIT_SOLVER
        }
        Err(Failure::Io(m)) => {
            eprintln!("i/o error: {m}");
            EXIT_SOLVER
        }
    }
}

fn emit(cfg: &RunConfig, command: &str, problem: &str, outcome: Outcome, default_out: Option<PathBuf>) -> Result<Option<PathBuf>, Failure> {
    let dir = cfg.run.out.as_ref().map(PathBuf::from).or(default_out);
    if let Some(dir) = &dir {
        let r = RunReport { command: command.into(), problem: problem.into(), seed: cfg.seed(), config: cfg.echo(), outcome };
        write_report(dir, &r)?;
        println!("report: {}", dir.join(report::REPORT_FILE).display());
    }
    Ok(dir)
}

/// Group of the example, or a registered group when `--example` names one.
fn group_for(cfg: &RunConfig) -> Result<(String, HomogeneousGroup, Option<BenchmarkProblem>), Failure> {
    if let Some(name) = &cfg.problem.example {
        if !BENCHMARKS.contains(&name.as_str()) {
            if let Some(g) = group_by_name(name) {
                return Ok((name.clone(), g, None));
            }
            return Err(Failure::Usage(format!(
                "unknown example or group '{name}' (examples: {}; groups: {})",
                BENCHMARKS.join(", "),
                group_names().join(", ")
            )));
        }
    }
    let p = cfg.problem()?;
    let g = p.group.clone().ok_or_else(|| Failure::Usage(format!("problem '{}' has no registered group", p.name)))?;
    Ok((p.name.clone(), g, Some(p)))
}

fn check_group(a: &ProblemArgs) -> Result<i32, Failure> {
    let cfg = RunConfig::from_args(a)?;
    let (name, group, problem) = group_for(&cfg)?;
    let samples = cfg.run.samples.unwrap_or(100);
    let rep = verify_group(group.law(), group.dilation(), samples, cfg.seed());
    let q = homogeneous_dimension(group.dilation());
    let fields = problem.as_ref().map(|p| p.spec.fields.clone()).unwrap_or_default();
    let left: Vec<f64> = fields.iter().map(|f| left_invariance_check(f, &group, samples.min(20), cfg.seed())).collect();
    let degrees: Vec<Option<i64>> = fields.iter().map(|f| homogeneity_degree(f, group.dilation().sigma())).collect();
    let degrees_ok = degrees.iter().enumerate().all(|(i, d)| *d == Some(if i == 0 { 2 } else { 1 }) || fields[i].is_zero());
    let passed = rep.passed() && left.iter().all(|&r| r == 0.0) && degrees_ok;
    println!("group={name} n={} sigma={:?} Q={q}", group.n(), group.dilation().sigma());
    println!(
        "identity={} inverse={} associativity={} associative_exact={} automorphism={}",
        rep.identity_ok, rep.inverse_ok, rep.associativity_residual, rep.associative_exact, rep.automorphism_ok
    );
    if !fields.is_empty() {
        println!("left_invariance={left:?} degrees={degrees:?}");
    }
    println!("passed={passed}");
    let outcome = Outcome::GroupCheck {
        group: name.clone(),
        report: rep,
        homogeneous_dimension: q,
        left_invariance: left,
        homogeneity_degrees: degrees,
        passed,
    };
    emit(&cfg, "check-group", &name, outcome, None)?;
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn check_hormander(a: &ProblemArgs) -> Result<i32, Failure> {
    let cfg = RunConfig::from_args(a)?;
    let p = cfg.problem()?;
    let samples = cfg.run.samples.unwrap_or(DEFAULT_SAMPLES);
    let max_weight = cfg.run.max_weight.unwrap_or(DEFAULT_MAX_WEIGHT);
    let fields: Vec<_> = p.spec.fields.iter().filter(|f| !f.is_zero()).cloned().collect();
    let points = rational_samples(p.spec.n, samples, cfg.seed());
    let rep = hoermander_rank(&fields, &points, max_weight).map_err(|e| Failure::Usage(e.to_string()))?;
    let step = rep.step.map_or("none".to_string(), |s| s.to_string());
    println!("spans={} step={step}", rep.spans);
    println!("ranks={:?} n={} points={samples} max_weight={max_weight}", rep.ranks, p.spec.n);
    let basis: Vec<String> = rep.bracket_basis.iter().map(|(alpha, f)| format!("{alpha}: {f}")).collect();
    for b in &basis {
        println!("  {b}");
    }
    let spans = rep.spans;
    let outcome = Outcome::Hormander { spans, step: rep.step, max_weight, points: samples, ranks: rep.ranks, basis };
    emit(&cfg, "check-hormander", &p.name, outcome, None)?;
    Ok(if spans { EXIT_OK } else { EXIT_VALIDATION })
}

fn check_obstacle(a: &ProblemArgs) -> Result<i32, Failure> {
    let cfg = RunConfig::from_args(a)?;
    let p = cfg.problem()?;
    let opts = cfg.options(&p)?;
    let grid = &p.grid;
    let compatibility = p.data.check_compatibility(grid).map_err(|e| e.to_string());
    let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let ellipticity = ellipticity_check(&p.spec, &points).map_err(|e| e.to_string());
    let phi = grid.sample(|x| p.data.phi.eval(x));
    let mut deltas = opts.delta_schedule.clone();
    deltas.dedup();
    let convexity: Vec<(f64, Result<f64, String>)> = deltas
        .iter()
        .map(|&d| (d, obstacle_convexity_check(&phi, p.spec.generators(), grid, d).map_err(|e| e.to_string())))
        .collect();
    let faces = face_report(grid, p.spec.generators());
    let last_delta = *opts.delta_schedule.last().expect("validated schedule");
    let max_principle = assemble(&p.spec, &p.data, grid, last_delta)
        .map_err(|e| e.to_string())
        .and_then(|asm| max_principle_witness(&asm.op, 4, cfg.seed()).map_err(|e| e.to_string()));
    let passed =
        compatibility.is_ok() && ellipticity.is_ok() && convexity.iter().all(|(_, r)| r.is_ok()) && max_principle.is_ok();
    let show = |r: &Result<f64, String>| match r {
        Ok(v) => format!("{v:e}"),
        Err(e) => format!("FAILED ({e})"),
    };
    println!("problem={} nodes={:?}", p.name, grid.nodes());
    println!("compatibility={}", compatibility.as_ref().map_or_else(|e| format!("FAILED ({e})"), |_| "ok".into()));
    println!("ellipticity={}", show(&ellipticity));
    for (d, r) in &convexity {
        println!("convexity delta={d} min_eigenvalue={}", show(r));
    }
    for f in &faces {
        println!("face axis={} upper={} exterior_normal={} ({}/{} nodes fail)", f.axis, f.upper, f.passes, f.failing_nodes, f.total_nodes);
    }
    println!("max_principle={}", show(&max_principle));
    println!("passed={passed}");
    let outcome = Outcome::ObstacleCheck { compatibility, ellipticity, convexity, faces, max_principle, passed };
    emit(&cfg, "check-obstacle", &p.name, outcome, None)?;
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn failure_code(e: &ObstacleError) -> i32 {
    match e {
        ObstacleError::Stage { source, .. } => failure_code(source),
        ObstacleError::Operator(_) | ObstacleError::CenterInside(_) => EXIT_VALIDATION,
        ObstacleError::Pde(
            PdeError::Compatibility { .. } | PdeError::ExteriorNormal(_) | PdeError::MaxPrinciple { .. } | PdeError::Operator(_),
        ) => EXIT_VALIDATION,
        ObstacleError::Schedule(_) => EXIT_USAGE,
        _ => EXIT_SOLVER,
    }
}

fn completed_stages(e: &ObstacleError) -> Vec<StageReport> {
    e.partial_report().map(|r| r.stages.clone()).unwrap_or_default()
}

fn default_out(name: &str) -> PathBuf {
    PathBuf::from("runs").join(name)
}

fn solve(a: &ProblemArgs) -> Result<i32, Failure> {
    let cfg = RunConfig::from_args(a)?;
    let p = cfg.problem()?;
    let opts = cfg.options(&p)?;
    match subobstacle::obstacle::continuation_solve_with(&p.spec, &p.data, &p.grid, &opts) {
        Ok(rep) => {
            println!("problem={} nodes={:?}", p.name, p.grid.nodes());
            for s in &rep.stages {
                println!(
                    "  eps={:e} delta={} iterations={} sup_change={:e} penalty_min={:e} sup_u={}",
                    s.epsilon, s.delta, s.inner_iterations, s.sup_change, s.penalty_min, s.sup_u
                );
            }
            println!("complementarity_residual={:e}", rep.complementarity_residual);
            println!("obstacle_violation={:e}", rep.obstacle_violation);
            println!("equation_residual={:e}", rep.equation_residual);
            let u = rep.u.clone();
            let grid = rep.grid.clone();
            let dir = emit(&cfg, "solve", &p.name, Outcome::Solved { report: rep }, Some(default_out(&p.name)))?;
            if let Some(dir) = dir {
                write_solution(&dir, &grid, &u)?;
            }
            Ok(EXIT_OK)
        }
        Err(e) => {
            let code = failure_code(&e);
            let outcome = Outcome::Failed { error: e.to_string(), stages: completed_stages(&e) };
            emit(&cfg, "solve", &p.name, outcome, Some(default_out(&p.name)))?;
            Err(if code == EXIT_VALIDATION {
                Failure::Validation(e.to_string())
            } else if code == EXIT_USAGE {
                Failure::Usage(e.to_string())
            } else {
                Failure::Solver(e.to_string())
            })
        }
    }
}

fn bench_list() {
    for name in BENCHMARKS {
        let p = build_example(name).expect("registered benchmark");
        println!("{name}\t{:?}\t{}", p.grid.nodes(), p.description);
    }
}

/// Pass/fail checks of a benchmark run.
pub fn benchmark_checks(r: &subobstacle::bench::BenchReport) -> Vec<Check> {
    let s = &r.solve;
    let eps = s.epsilon_final();
    let mut out = Vec::new();
    if let Some(o) = &r.oracle {
        out.push(Check::at_most("oracle_distance", o.sup_distance, (10.0 * eps).max(1e-3)));
        out.push(Check::at_most("oracle_residual", o.oracle_residual, 1e-8));
    }
    out.push(Check::at_most("obstacle_violation", s.obstacle_violation, 10.0 * eps));
    out.push(Check::at_most("equation_residual", s.equation_residual, 10.0 * s.tol));
    let mags: Vec<f64> = s.stages.iter().map(|st| -st.penalty_min).collect();
    let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().cloned().fold(0.0_f64, f64::max);
    let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    out.push(Check::at_most("penalty_min_ratio", ratio, 4.0));
    out.push(Check::at_most("sup_u_variation", r.sup_bound.variation, 0.05));
    out.push(Check::at_most("max_increase", s.stages.iter().fold(0.0_f64, |m, st| m.max(st.max_increase)), 1e-10));
    out
}

fn bench_run(name: &str, a: &ProblemArgs) -> Result<i32, Failure> {
    if a.example.is_some() {
        return Err(Failure::Usage("bench run takes the problem name as its argument, not --example".into()));
    }
    if !BENCHMARKS.contains(&name) {
        return Err(Failure::Usage(format!("unknown benchmark '{name}' (known: {})", BENCHMARKS.join(", "))));
    }
    let mut a = a.clone();
    a.example = Some(name.to_string());
    let cfg = RunConfig::from_args(&a)?;
    let p = cfg.problem()?;
    let mut settings = RunSettings::for_problem(&p);
    settings.options = cfg.options(&p)?;
    settings.seed = cfg.seed();
    match run_benchmark(&p, &settings) {
        Ok(rep) => {
            let checks = benchmark_checks(&rep);
            println!("benchmark={name} nodes={:?}", rep.nodes);
            for c in &checks {
                let v = c.value.map_or("undefined".to_string(), |v| format!("{v:e}"));
                println!("  {} {} = {v} (limit {:e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.limit);
            }
            let passed = checks.iter().all(|c| c.passed);
            let u = rep.solve.u.clone();
            let grid = rep.solve.grid.clone();
            let dir = emit(&cfg, "bench-run", name, Outcome::Benchmark { report: rep, checks }, Some(default_out(name)))?;
            if let Some(dir) = dir {
                write_solution(&dir, &grid, &u)?;
            }
            Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
        }
        Err(e) => {
            let code = failure_code(&e);
            let outcome = Outcome::Failed { error: e.to_string(), stages: completed_stages(&e) };
            emit(&cfg, "bench-run", name, outcome, Some(default_out(name)))?;
            Err(if code == EXIT_VALIDATION { Failure::Validation(e.to_string()) } else { Failure::Solver(e.to_string()) })
        }
    }
}
