//! Run configuration: TOML sections merged with command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use subobstacle::bench::{build_example, BenchmarkProblem, BENCHMARKS};
use subobstacle::group::group_by_name;
use subobstacle::liealg::parse_field;
use subobstacle::obstacle::ContinuationOptions;
use subobstacle::operator::{CoefficientField, ObstacleData, OperatorSpec};
use subobstacle::pde::Grid;

use crate::args::ProblemArgs;

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub run: RunSection,
}

/// Either `example` (optionally with `nodes`) or a full custom problem.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// registered group the fields live on
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_weight: Option<u32>,
}

pub fn read_config(path: &Path) -> Result<RunConfig, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| UsageError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse_config(text: &str) -> Result<RunConfig, UsageError> {
    toml::from_str(text).map_err(|e| UsageError(e.to_string()))
}

pub fn write_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}

impl RunConfig {
    /// Config file (if any) with the flags laid over it.
    pub fn from_args(a: &ProblemArgs) -> Result<Self, UsageError> {
        let mut cfg = match &a.config {
            Some(p) => read_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(e) = &a.example {
            cfg.problem.example = Some(e.clone());
        }
        if let Some(v) = &a.nodes {
            cfg.problem.nodes = Some(v.clone());
        }
        if let Some(v) = &a.eps_schedule {
            cfg.solve.eps_schedule = Some(v.clone());
        }
        if let Some(v) = &a.delta_schedule {
            cfg.solve.delta_schedule = Some(v.clone());
        }
        if a.tol.is_some() {
            cfg.solve.tol = a.tol;
        }
        if a.seed.is_some() {
            cfg.run.seed = a.seed;
        }
        if let Some(o) = &a.out {
            cfg.run.out = Some(o.display().to_string());
        }
        if a.samples.is_some() {
            cfg.run.samples = a.samples;
        }
        if a.max_weight.is_some() {
            cfg.run.max_weight = a.max_weight;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UsageError> {
        if self.run.samples == Some(0) {
            return usage("--samples must be positive");
        }
        if self.run.max_weight == Some(0) {
            return usage("--max-weight must be positive");
        }
        if let Some(t) = self.solve.tol {
            if !(t > 0.0 && t.is_finite()) {
                return usage(format!("tolerance {t} must be positive"));
            }
        }
        if self.solve.max_iter == Some(0) {
            return usage("max_iter must be positive");
        }
        if let Some(n) = &self.problem.nodes {
            if n.is_empty() || n.iter().any(|&k| k < 3) {
                return usage("every axis needs at least 3 nodes");
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(0)
    }

    /// The problem the config describes, on its final grid.
    pub fn problem(&self) -> Result<BenchmarkProblem, UsageError> {
        let p = &self.problem;
        let base = match &p.example {
            Some(name) => {
                let custom_keys = [
                    p.name.is_some(),
                    p.group.is_some(),
                    p.drift.is_some(),
                    p.generators.is_some(),
                    p.gamma.is_some(),
                    p.phi.is_some(),
                    p.g.is_some(),
                    p.f.is_some(),
                    p.mu.is_some(),
                    p.lo.is_some(),
                    p.hi.is_some(),
                ];
                if custom_keys.iter().any(|&b| b) {
                    return usage("an example problem only takes `nodes` as an override");
                }
                build_example(name)
                    .map_err(|_| UsageError(format!("unknown example '{name}' (known: {})", BENCHMARKS.join(", "))))?
            }
            None => self.custom()?,
        };
        match &p.nodes {
            Some(n) => base.with_nodes(n).map_err(|e| UsageError(e.to_string())),
            None => Ok(base),
        }
    }

    fn custom(&self) -> Result<BenchmarkProblem, UsageError> {
        let p = &self.problem;
        let need = |v: &Option<String>, key: &str| v.clone().ok_or_else(|| UsageError(format!("problem needs `{key}` or `example`")));
        let lo = p.lo.clone().ok_or_else(|| UsageError("problem needs `lo`".into()))?;
        let hi = p.hi.clone().ok_or_else(|| UsageError("problem needs `hi`".into()))?;
        let n = lo.len();
        let nodes = p.nodes.clone().unwrap_or_else(|| vec![17]);
        let nodes = if nodes.len() == 1 { vec![nodes[0]; n] } else { nodes };
        let grid = Grid::new(lo, hi, nodes).map_err(|e| UsageError(e.to_string()))?;
        let field = |s: &str| parse_field(s, n).map_err(|e| UsageError(format!("field '{s}': {e}")));
        let drift = p.drift.as_deref().map(field).transpose()?;
        let generators = p
            .generators
            .as_ref()
            .ok_or_else(|| UsageError("problem needs `generators`".into()))?
            .iter()
            .map(|s| field(s))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = OperatorSpec::standard(drift, generators, p.gamma.unwrap_or(-1.0)).map_err(|e| UsageError(e.to_string()))?;
        let coeff = |s: String| CoefficientField::parse(&s, n).map_err(|e| UsageError(format!("'{s}': {e}")));
        let data = ObstacleData {
            f: coeff(p.f.clone().unwrap_or_else(|| "0".into()))?,
            g: coeff(need(&p.g, "g")?)?,
            phi: coeff(need(&p.phi, "phi")?)?,
            mu: p.mu.ok_or_else(|| UsageError("problem needs `mu`, a Lipschitz bound of phi".into()))?,
        };
        let group = match &p.group {
            Some(g) => Some(group_by_name(g).ok_or_else(|| UsageError(format!("unknown group '{g}'")))?),
            None => None,
        };
        let name = p.name.clone().unwrap_or_else(|| "custom".into());
        Ok(BenchmarkProblem::custom(&name, "from config", group, spec, data, grid))
    }

    /// Continuation options: the problem's defaults with config overrides.
    pub fn options(&self, p: &BenchmarkProblem) -> Result<ContinuationOptions, UsageError> {
        let mut o = p.options.clone();
        if let Some(v) = &self.solve.eps_schedule {
            o.eps_schedule = v.clone();
        }
        if let Some(v) = &self.solve.delta_schedule {
            o.delta_schedule = v.clone();
        }
        if let Some(t) = self.solve.tol {
            o.tol = t;
        }
        if let Some(m) = self.solve.max_iter {
            o.max_iter = m;
        }
        o.required_faces = p.required_faces.clone();
        o.joint_schedule().map_err(|e| UsageError(e.to_string()))?;
        Ok(o)
    }

    /// The config as echoed in reports: everything but the output location.
    pub fn echo(&self) -> RunConfig {
        let mut c = self.clone();
        c.run.out = None;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config("[problem]\nexample = \"kolmogorov\"\nspeed = 3\n").is_err());
        assert!(parse_config("[other]\n").is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = parse_config(
            "[problem]\nexample = \"parabolic-1d\"\nnodes = [17]\n[solve]\neps_schedule = [0.01, 0.001]\ntol = 0.0001\n[run]\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(parse_config(&write_config(&cfg)).unwrap(), cfg);
        assert_eq!(cfg.problem().unwrap().grid.nodes(), &[17, 17]);
    }

    #[test]
    fn custom_problem() {
        let cfg = parse_config(
            "[problem]\ndrift = \"d/dx2\"\ngenerators = [\"d/dx1\"]\nphi = \"0.5 - 4*(x1 - 1/2)^2\"\ng = \"0\"\nmu = 4.0\nlo = [0.0, 0.0]\nhi = [1.0, 1.0]\nnodes = [9, 5]\n",
        )
        .unwrap();
        let p = cfg.problem().unwrap();
        assert_eq!(p.grid.nodes(), &[9, 5]);
        assert_eq!(p.name, "custom");
        assert!(cfg.options(&p).is_ok());
    }

    #[test]
    fn example_takes_no_custom_fields() {
        let cfg = parse_config("[problem]\nexample = \"kolmogorov\"\nphi = \"1\"\n").unwrap();
        assert!(cfg.problem().is_err());
    }

    #[test]
    fn bad_schedule() {
        let mut cfg = parse_config("[problem]\nexample = \"parabolic-1d\"\n").unwrap();
        cfg.solve.eps_schedule = Some(vec![0.001, 0.01]);
        let p = cfg.problem().unwrap();
        assert!(cfg.options(&p).is_err());
    }
}
