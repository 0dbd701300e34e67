//! Double-loop penalty solver.
//!
//! Each outer iteration `t`:
//!
//! 1. runs `K_t` inner updates `y <- U_y(y, grad_y h(x_t, y); beta)` warm
//!    started from the previous inner iterate,
//! 2. forms `d_t = grad f0(x_t) + gamma_t theta |g_t|^(theta - 1) grad v(x_t)`
//!    with the merit gap `g_t` and `grad v` taken at the inner iterate,
//! 3. stops when the squared gradient mapping `||x_t - Proj(x_t - alpha d_t)||^2 / alpha^2`
//!    is at most `eps_stop`, otherwise updates `x_{t+1} = U_x(x_t, d_t; alpha)`.
//!
//! The stopping test is evaluated after the first inner loop because `d_0`
//! needs an inner iterate. Oracle states for `x` and `y` are created once per
//! solve and never reset.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::linalg;
use crate::merit::{inner_steps, merit_at, merit_eval, InnerMethod, MeritConfig};
use crate::oracle::OracleKind;
use crate::penalty::{assemble, PenaltyConfig};
use crate::problem::MOProblem;
use crate::trace::{SolveStatus, SolveTrace, TraceRow};

/// Number of inner updates per outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerSchedule {
    Constant { k: usize },
    /// `K_t = k0 + floor(growth * t)`
    Linear { k0: usize, growth: f64 },
}

impl InnerSchedule {
    pub fn steps_at(&self, t: usize) -> usize {
        match *self {
            InnerSchedule::Constant { k } => k,
            InnerSchedule::Linear { k0, growth } => k0 + (growth * t as f64).floor() as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Outer step size.
    pub alpha: f64,
    /// Inner step size.
    pub beta: f64,
    pub inner_schedule: InnerSchedule,
    pub penalty: PenaltyConfig,
    pub merit: MeritConfig,
    pub oracle_x: OracleKind,
    pub oracle_y: OracleKind,
    /// Threshold on the squared gradient mapping.
    pub eps_stop: f64,
    /// Maximum number of outer updates.
    pub t_max: usize,
    pub seed: u64,
    /// Abort when `||x_t||` exceeds this bound.
    pub divergence_bound: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            beta: 0.1,
            inner_schedule: InnerSchedule::Constant { k: 100 },
            penalty: PenaltyConfig::default(),
            merit: MeritConfig::default(),
            oracle_x: OracleKind::Pgd,
            oracle_y: OracleKind::Pgd,
            eps_stop: 1e-10,
            t_max: 1000,
            seed: 0,
            divergence_bound: 1e8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("eps_stop", self.eps_stop)?;
        positive("divergence_bound", self.divergence_bound)?;
        if self.t_max == 0 {
            return Err(Error::InvalidConfig("t_max must be at least 1".into()));
        }
        if let InnerSchedule::Linear { growth, .. } = self.inner_schedule {
            if !(growth >= 0.0 && growth.is_finite()) {
                return Err(Error::InvalidConfig("inner schedule growth must be >= 0".into()));
            }
        }
        self.penalty.validate()?;
        self.merit.validate()?;
        self.oracle_x.validate()?;
        self.oracle_y.validate()
    }

    pub fn inner_method(&self) -> InnerMethod {
        InnerMethod { oracle: self.oracle_y, step: self.beta }
    }
}

/// Seeded initial-point distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Initializer {
    /// `U[-0.3, 0.3]^q`
    Easy,
    /// Each coordinate uniform on `[-0.5, -0.15]` or `[0.15, 0.5]` with equal
    /// probability.
    Hard,
    Uniform { low: f64, high: f64 },
    Gaussian { mean: f64, std: f64 },
    Fixed { x0: Vec<f64> },
}

impl Initializer {
    pub fn sample(&self, q: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = match self {
            Initializer::Easy => (0..q).map(|_| rng.gen_range(-0.3..=0.3)).collect(),
            Initializer::Hard => (0..q)
                .map(|_| {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    sign * rng.gen_range(0.15..=0.5)
                })
                .collect(),
            Initializer::Uniform { low, high } => {
                if !(low < high) {
                    return Err(Error::InvalidConfig("uniform initializer needs low < high".into()));
                }
                (0..q).map(|_| rng.gen_range(*low..*high)).collect()
            }
            Initializer::Gaussian { mean, std } => {
                let normal = Normal::new(*mean, *std)
                    .map_err(|e| Error::InvalidConfig(format!("gaussian initializer: {e}")))?;
                (0..q).map(|_| normal.sample(&mut rng)).collect()
            }
            Initializer::Fixed { x0 } => {
                ensure_len(x0, q)?;
                x0.clone()
            }
        };
        Ok(x)
    }
}

/// Runs the double-loop solver from `x0`.
///
/// Returns the full trace. Inner inexactness is recorded per row and never
/// fatal; a non-finite iterate or `||x|| > divergence_bound` yields
/// [`Error::Diverged`] carrying the partial trace.
pub fn solve(problem: &MOProblem, cfg: &SolverConfig, x0: &[f64]) -> Result<SolveTrace> {
    cfg.validate()?;
    ensure_len(x0, problem.dim())?;
    ensure_finite("x0", x0)?;
    let start = Instant::now();
    let set = problem.feasible_set();
    let inner = cfg.inner_method();

    let mut trace = SolveTrace::new("foops", problem.name());
    let mut x = set.project(x0)?;
    let mut y = x.clone();
    let mut state_x = cfg.oracle_x.initial_state(x.len());
    let mut state_y = cfg.oracle_y.initial_state(x.len());

    let mut t = 0;
    loop {
        let gamma = cfg.penalty.gamma_at(t);
        let steps = cfg.inner_schedule.steps_at(t);
        let sol = inner_steps(&cfg.merit, problem, &x, &y, &inner, steps, &mut state_y)?;
        let merit = merit_at(&cfg.merit, problem, &x, &sol);
        y = sol.y;
        let eval = assemble(&cfg.penalty, problem, &x, gamma, merit)?;
        let mapping = set.gradient_mapping(&x, &eval.grad, cfg.alpha);
        let g_norm = linalg::norm(&mapping);

        trace.rows.push(TraceRow {
            iter: t,
            x: x.clone(),
            objectives: problem.objectives(&x),
            f0: problem.f0(&x),
            merit_value: eval.merit.value,
            merit_gap: eval.merit.gap,
            penalty: eval.penalty,
            gamma,
            grad_mapping_norm: g_norm,
            inner_iters: sol.iters,
            inner_residual: sol.residual,
        });

        if !(g_norm.is_finite() && eval.value.is_finite()) {
            return Err(diverged(trace, t, "non-finite penalty objective", start));
        }
        if g_norm * g_norm <= cfg.eps_stop {
            trace.status = if sol.residual <= cfg.merit.inner_tol {
                SolveStatus::Converged
            } else {
                SolveStatus::InnerWarning
            };
            break;
        }
        if t == cfg.t_max {
            trace.status = SolveStatus::MaxIter;
            break;
        }

        x = cfg.oracle_x.update(set, &x, &eval.grad, cfg.alpha, &mut state_x)?;
        if !linalg::is_finite(&x) {
            return Err(diverged(trace, t + 1, "non-finite iterate", start));
        }
        if linalg::norm(&x) > cfg.divergence_bound {
            return Err(diverged(trace, t + 1, "iterate norm exceeded divergence bound", start));
        }
        t += 1;
    }
    trace.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(trace)
}

fn diverged(mut trace: SolveTrace, iteration: usize, reason: &str, start: Instant) -> Error {
    trace.status = SolveStatus::MaxIter;
    trace.wall_time_secs = start.elapsed().as_secs_f64();
    Error::Diverged { iteration, reason: reason.to_string(), trace: Box::new(trace) }
}

/// Certified stationarity measure `||x - Proj(x - alpha grad phi_gamma(x))|| / alpha`.
///
/// The inner problem is solved to `cfg.merit.inner_tol` with `inner`, so the
/// merit gradient is accurate up to that tolerance.
pub fn stationarity_measure(
    problem: &MOProblem,
    cfg: &SolverConfig,
    x: &[f64],
    gamma: f64,
    y_init: &[f64],
    inner: &InnerMethod,
) -> Result<f64> {
    let merit = merit_eval(&cfg.merit, problem, x, y_init, inner)?;
    let eval = assemble(&cfg.penalty, problem, x, gamma, merit)?;
    let mapping = problem.feasible_set().gradient_mapping(x, &eval.grad, cfg.alpha);
    Ok(linalg::norm(&mapping))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    #[test]
    fn schedules() {
        assert_eq!(InnerSchedule::Constant { k: 7 }.steps_at(100), 7);
        let lin = InnerSchedule::Linear { k0: 10, growth: 0.5 };
        assert_eq!(lin.steps_at(0), 10);
        assert_eq!(lin.steps_at(5), 12);
    }

    #[test]
    fn initializers_respect_their_ranges() {
        let easy = Initializer::Easy.sample(200, 3).unwrap();
        assert!(easy.iter().all(|v| v.abs() <= 0.3));
        let hard = Initializer::Hard.sample(200, 3).unwrap();
        assert!(hard.iter().all(|v| (0.15..=0.5).contains(&v.abs())));
        assert!(hard.iter().any(|v| *v < 0.0) && hard.iter().any(|v| *v > 0.0));
        assert_eq!(Initializer::Hard.sample(5, 9).unwrap(), Initializer::Hard.sample(5, 9).unwrap());
        assert!(Initializer::Fixed { x0: vec![1.0] }.sample(2, 0).is_err());
        assert!(Initializer::Uniform { low: 1.0, high: 0.0 }.sample(2, 0).is_err());
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        assert!(SolverConfig { alpha: 0.0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { t_max: 0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig { eps_stop: -1.0, ..ok.clone() }.validate().is_err());
        assert!(SolverConfig {
            oracle_x: OracleKind::Momentum { coefficient: 1.5 },
            ..ok
        }
        .validate()
        .is_err());
    }

    #[test]
    fn zero_objective_and_zero_penalty_do_not_move() {
        let p = problems::quadratic_pair();
        let cfg = SolverConfig {
            penalty: PenaltyConfig::constant(1.0, 0.0),
            beta: 1.0 / 404.0,
            inner_schedule: InnerSchedule::Constant { k: 5000 },
            t_max: 20,
            ..SolverConfig::default()
        };
        let trace = solve(&p, &cfg, &[0.7]).unwrap();
        assert!(trace.rows.iter().all(|r| r.x == vec![0.7]));
        assert_eq!(trace.status, SolveStatus::Converged);
    }

    #[test]
    fn rejects_bad_start() {
        let p = problems::quadratic_pair();
        let cfg = SolverConfig::default();
        assert!(solve(&p, &cfg, &[f64::NAN]).is_err());
        assert!(solve(&p, &cfg, &[0.0, 1.0]).is_err());
    }
}
