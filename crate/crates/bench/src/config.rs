//! Experiment configuration: one TOML file per experiment plus flag overrides.
//!
//! ```toml
//! name = "example1_hard"
//! repeats = 5
//! seed = 0
//! output = "results/example1_hard"
//!
//! [problem]
//! kind = "example1"
//! q = 20
//!
//! [preferences]
//! fan = { count = 5, from = 0.15707963267948966, to = 1.413716694115407 }
//!
//! [init]
//! kind = "hard"
//!
//! [method]
//! kind = "foops"
//! alpha = 0.2
//! beta = 0.1
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use foops::baselines::{LSConfig, LsSettings};
use foops::merit::SmoothnessEstimate;
use foops::solver::Initializer;
use foops::{problems, InnerSchedule, MOProblem, PreferenceSpec, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Example1 { q: usize },
    Fig2,
    QuadraticPair,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<MOProblem> {
        Ok(match *self {
            ProblemSpec::Example1 { q } => {
                if q == 0 {
                    return Err(BenchError::Config("example1 needs q >= 1".into()));
                }
                problems::example1(q).0
            }
            ProblemSpec::Fig2 => problems::fig2(),
            ProblemSpec::QuadraticPair => problems::quadratic_pair(),
        })
    }

    pub fn dim(&self) -> usize {
        match *self {
            ProblemSpec::Example1 { q } => q,
            ProblemSpec::Fig2 | ProblemSpec::QuadraticPair => 1,
        }
    }

    /// Reference point for hypervolume in loss space.
    pub fn default_nadir(&self) -> Vec<f64> {
        match self {
            ProblemSpec::Example1 { .. } => vec![1.0, 1.0],
            // Objective value at either end of the Pareto set [-1/2, 1/2].
            ProblemSpec::Fig2 => vec![1.125f64.powf(1.0 / 6.0); 2],
            ProblemSpec::QuadraticPair => vec![4.0, 4.0],
        }
    }

    /// Global analytic bounds on the objective Hessians and gradient spread.
    ///
    /// example1: `||hess f_m|| <= 2`, `||grad f_m|| <= sqrt(2) e^(-1/2)`.
    /// fig2: `|f_m''| <= 8^(5/6) / 3`, `|f_m'| <= 0.3805`.
    pub fn smoothness(&self) -> SmoothnessEstimate {
        match self {
            ProblemSpec::Example1 { .. } => SmoothnessEstimate {
                hessian_bound: 2.0,
                gradient_spread: 2.0 * 2f64.sqrt() * (-0.5f64).exp(),
            },
            ProblemSpec::Fig2 => SmoothnessEstimate {
                hessian_bound: 8f64.powf(5.0 / 6.0) / 3.0,
                gradient_spread: 0.761,
            },
            ProblemSpec::QuadraticPair => SmoothnessEstimate { hessian_bound: 2.0, gradient_spread: 4.0 },
        }
    }

    /// Decision-space points tracing the Pareto front, ordered by `F1`.
    ///
    /// Example 1 uses its known Pareto segment. The one-dimensional problems
    /// filter a dense grid on `[-2, 2]` down to its non-dominated points.
    pub fn pareto_set_samples(&self, problem: &MOProblem, n: usize) -> Vec<Vec<f64>> {
        let n = n.max(2);
        let mut xs: Vec<Vec<f64>> = match *self {
            ProblemSpec::Example1 { q } => (0..n)
                .map(|i| problems::example1_pareto_point(q, -1.0 + 2.0 * i as f64 / (n - 1) as f64))
                .collect(),
            ProblemSpec::Fig2 | ProblemSpec::QuadraticPair => {
                let grid: Vec<Vec<f64>> =
                    (0..n).map(|i| vec![-2.0 + 4.0 * i as f64 / (n - 1) as f64]).collect();
                let values: Vec<Vec<f64>> = grid.iter().map(|x| problem.objectives(x)).collect();
                foops::metrics::non_dominated(&values).into_iter().map(|i| grid[i].clone()).collect()
            }
        };
        xs.sort_by(|a, b| problem.objectives(a)[0].total_cmp(&problem.objectives(b)[0]));
        xs
    }
}

/// Evenly spaced rays `(cos a, sin a)` for `count` angles in `[from, to]` (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fan {
    pub count: usize,
    pub from: f64,
    pub to: f64,
}

impl Fan {
    /// Five rays between `pi / 20` and `9 pi / 20`.
    pub fn standard() -> Self {
        Self { count: 5, from: PI / 20.0, to: 9.0 * PI / 20.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferenceList {
    #[serde(default)]
    pub rays: Vec<Vec<f64>>,
    #[serde(default)]
    pub fan: Option<Fan>,
}

impl PreferenceList {
    pub fn resolve(&self) -> Result<Vec<PreferenceSpec>> {
        let mut out = Vec::new();
        for ray in &self.rays {
            out.push(PreferenceSpec::new(ray.clone()).map_err(|e| BenchError::Config(e.to_string()))?);
        }
        if let Some(fan) = self.fan {
            out.extend(
                PreferenceSpec::angular_fan(fan.count, fan.from, fan.to)
                    .map_err(|e| BenchError::Config(e.to_string()))?,
            );
        }
        Ok(out)
    }
}

fn default_alpha() -> f64 {
    0.2
}
fn default_t_max() -> usize {
    1000
}
fn default_tol() -> f64 {
    1e-8
}
fn default_n_weights() -> usize {
    101
}

/// Step size, budget and tolerance shared by the LS runs of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsRun {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for LsRun {
    fn default() -> Self {
        Self { alpha: default_alpha(), t_max: default_t_max(), tol: default_tol() }
    }
}

impl LsRun {
    /// Step size and budget used for LS in the synthetic Example 1 study.
    pub const SYNTHETIC: LsRun = LsRun { alpha: 0.1, t_max: 150, tol: 1e-8 };

    pub fn settings(&self, x0: Vec<f64>) -> LsSettings {
        LsSettings { alpha: self.alpha, t_max: self.t_max, tol: self.tol, ..LsSettings::new(x0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodSpec {
    Foops(SolverConfig),
    Ls {
        lambda: Vec<f64>,
        #[serde(flatten)]
        run: LsRun,
    },
    LsSweep {
        #[serde(default = "default_n_weights")]
        n_weights: usize,
        #[serde(flatten)]
        run: LsRun,
    },
}

impl MethodSpec {
    pub fn label(&self) -> &'static str {
        match self {
            MethodSpec::Foops(_) => "foops",
            MethodSpec::Ls { .. } => "ls",
            MethodSpec::LsSweep { .. } => "ls_sweep",
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}
fn default_repeats() -> usize {
    1
}
fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub preferences: PreferenceList,
    pub init: Initializer,
    pub method: MethodSpec,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Repeat `r` starts from `init` sampled with seed `seed + r`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Hypervolume reference point; defaults per problem.
    #[serde(default)]
    pub nadir: Option<Vec<f64>>,
}

impl ExperimentSpec {
    /// Paper-style defaults: FOOPS with default hyperparameters, hard
    /// initialization and the standard five-ray fan.
    pub fn new(problem: ProblemSpec) -> Self {
        let preferences = match problem {
            ProblemSpec::Example1 { .. } => PreferenceList { rays: vec![], fan: Some(Fan::standard()) },
            _ => PreferenceList { rays: vec![vec![1.0, 1.0]], fan: None },
        };
        Self {
            name: default_name(),
            problem,
            preferences,
            init: Initializer::Hard,
            method: MethodSpec::Foops(SolverConfig::default()),
            repeats: 1,
            seed: 0,
            output: default_output(),
            nadir: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            BenchError::Config(msg) => BenchError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn nadir(&self) -> Vec<f64> {
        self.nadir.clone().unwrap_or_else(|| self.problem.default_nadir())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: foops::Error| BenchError::Config(e.to_string());
        if self.repeats == 0 {
            return Err(BenchError::Config("repeats must be at least 1".into()));
        }
        let problem = self.problem.build()?;
        let prefs = self.preferences.resolve()?;
        for p in &prefs {
            if p.num_objectives() != problem.num_objectives() {
                return Err(BenchError::Config(format!(
                    "preference ray {:?} has {} entries, problem has {} objectives",
                    p.ray(),
                    p.num_objectives(),
                    problem.num_objectives()
                )));
            }
        }
        match &self.method {
            MethodSpec::Foops(c) => {
                if prefs.is_empty() {
                    return Err(BenchError::Config("foops runs need at least one preference".into()));
                }
                c.validate().map_err(cfg)?;
            }
            MethodSpec::Ls { lambda, run } => {
                if prefs.is_empty() {
                    return Err(BenchError::Config("ls runs need at least one preference".into()));
                }
                if lambda.len() != problem.num_objectives() {
                    return Err(BenchError::Config("lambda length must match the objectives".into()));
                }
                LSConfig::new(lambda.clone(), run.settings(vec![0.0; problem.dim()])).map_err(cfg)?;
            }
            MethodSpec::LsSweep { n_weights, run } => {
                if *n_weights < 2 {
                    return Err(BenchError::Config("ls_sweep needs n_weights >= 2".into()));
                }
                run.settings(vec![0.0; problem.dim()]).validate().map_err(cfg)?;
            }
        }
        self.init.sample(problem.dim(), self.seed).map_err(cfg)?;
        let nadir = self.nadir();
        if nadir.len() != problem.num_objectives() || nadir.iter().any(|v| !v.is_finite()) {
            return Err(BenchError::Config("nadir must be finite with one entry per objective".into()));
        }
        Ok(())
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub problem: Option<String>,
    pub q: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub method: Option<String>,
    pub gamma0: Option<f64>,
    pub gamma_step: Option<f64>,
    pub gamma_max: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub k: Option<usize>,
    pub tau: Option<f64>,
    pub l: Option<f64>,
    pub theta: Option<f64>,
    pub eps: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ExperimentSpec) -> Result<()> {
        if self.problem.is_some() || self.q.is_some() {
            let q = self.q.or(match spec.problem {
                ProblemSpec::Example1 { q } => Some(q),
                _ => None,
            });
            let name = self.problem.as_deref().unwrap_or(match spec.problem {
                ProblemSpec::Example1 { .. } => "example1",
                ProblemSpec::Fig2 => "fig2",
                ProblemSpec::QuadraticPair => "quadratic_pair",
            });
            let problem = parse_problem(name, q)?;
            if problem != spec.problem {
                let dims_changed = problem.dim() != spec.problem.dim();
                let kind_changed = std::mem::discriminant(&problem) != std::mem::discriminant(&spec.problem);
                spec.problem = problem;
                if kind_changed {
                    spec.preferences = ExperimentSpec::new(problem).preferences;
                    spec.nadir = None;
                }
                if dims_changed {
                    if let Initializer::Fixed { .. } = spec.init {
                        return Err(BenchError::Config(
                            "a fixed x0 cannot follow a change of problem dimension".into(),
                        ));
                    }
                }
            }
        }
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(out) = &self.out {
            spec.output = out.clone();
        }
        if let Some(m) = &self.method {
            if m != spec.method.label() {
                spec.method = match m.as_str() {
                    "foops" => MethodSpec::Foops(SolverConfig::default()),
                    "ls" => {
                        let m = spec.problem.build()?.num_objectives();
                        MethodSpec::Ls { lambda: vec![1.0 / m as f64; m], run: LsRun::default() }
                    }
                    "ls_sweep" | "ls-sweep" => {
                        MethodSpec::LsSweep { n_weights: default_n_weights(), run: LsRun::default() }
                    }
                    other => return Err(BenchError::Config(format!("unknown method {other:?}"))),
                };
            }
        }
        match &mut spec.method {
            MethodSpec::Foops(c) => {
                set(&mut c.penalty.gamma0, self.gamma0);
                set(&mut c.penalty.gamma_step, self.gamma_step);
                set(&mut c.penalty.gamma_max, self.gamma_max);
                set(&mut c.penalty.theta, self.theta);
                set(&mut c.alpha, self.alpha);
                set(&mut c.beta, self.beta);
                set(&mut c.merit.tau, self.tau);
                set(&mut c.merit.l, self.l);
                set(&mut c.eps_stop, self.eps);
                if let Some(k) = self.k {
                    c.inner_schedule = InnerSchedule::Constant { k };
                }
            }
            MethodSpec::Ls { run, .. } | MethodSpec::LsSweep { run, .. } => {
                set(&mut run.alpha, self.alpha);
                set(&mut run.tol, self.eps);
                let ignored = [
                    ("--gamma0", self.gamma0.is_some()),
                    ("--gamma-step", self.gamma_step.is_some()),
                    ("--gamma-max", self.gamma_max.is_some()),
                    ("--theta", self.theta.is_some()),
                    ("--beta", self.beta.is_some()),
                    ("--tau", self.tau.is_some()),
                    ("--l", self.l.is_some()),
                    ("--K", self.k.is_some()),
                ];
                for (flag, given) in ignored {
                    if given {
                        log::warn!("{flag} has no effect on linear scalarization runs");
                    }
                }
            }
        }
        Ok(())
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

pub fn parse_problem(name: &str, q: Option<usize>) -> Result<ProblemSpec> {
    match name {
        "example1" => Ok(ProblemSpec::Example1 { q: q.unwrap_or(20) }),
        "fig2" => Ok(ProblemSpec::Fig2),
        "quadratic_pair" | "quadratic-pair" => Ok(ProblemSpec::QuadraticPair),
        other => Err(BenchError::Config(format!(
            "unknown problem {other:?} (expected example1, fig2 or quadratic_pair)"
        ))),
    }
}
