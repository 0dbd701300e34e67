//! Linear scalarization baseline: projected gradient descent on
//! `lambda^T F(x)` for a fixed weight `lambda` in the simplex.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::linalg;
use crate::problem::MOProblem;
use crate::trace::{SolveStatus, SolveTrace, TraceRow};

/// Everything an LS run needs except the weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsSettings {
    pub alpha: f64,
    pub t_max: usize,
    pub x0: Vec<f64>,
    /// Stop once the gradient-mapping norm is at most `tol`.
    pub tol: f64,
    pub divergence_bound: f64,
}

impl LsSettings {
    pub fn new(x0: Vec<f64>) -> Self {
        Self { alpha: 0.2, t_max: 1000, x0, tol: 1e-8, divergence_bound: 1e8 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidConfig("t_max must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig("tol must be nonnegative".into()));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(Error::InvalidConfig("divergence_bound must be positive".into()));
        }
        ensure_finite("x0", &self.x0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LSConfig {
    pub lambda: Vec<f64>,
    #[serde(flatten)]
    pub run: LsSettings,
}

impl LSConfig {
    pub fn new(lambda: Vec<f64>, run: LsSettings) -> Result<Self> {
        let cfg = Self { lambda, run };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidConfig("lambda must be nonnegative".into()));
        }
        let total: f64 = self.lambda.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("lambda must sum to 1, sums to {total}")));
        }
        self.run.validate()
    }
}

/// Projected gradient descent on `lambda^T F`.
///
/// The trace shares the solver schema; merit and penalty columns are `NaN`
/// and `f0` is the problem's preference objective, so LS runs can be scored
/// on the same preference.
pub fn ls_solve(problem: &MOProblem, cfg: &LSConfig) -> Result<SolveTrace> {
    cfg.validate()?;
    ensure_len(&cfg.lambda, problem.num_objectives())?;
    ensure_len(&cfg.run.x0, problem.dim())?;
    let start = Instant::now();
    let set = problem.feasible_set();
    let run = &cfg.run;
    let mut trace = SolveTrace::new("ls", problem.name());
    let mut x = set.project(&run.x0)?;
    let mut t = 0;
    loop {
        let grad = linalg::weighted_rows(&cfg.lambda, &problem.jacobian(&x));
        let g_norm = linalg::norm(&set.gradient_mapping(&x, &grad, run.alpha));
        trace.rows.push(TraceRow {
            iter: t,
            x: x.clone(),
            objectives: problem.objectives(&x),
            f0: problem.f0(&x),
            merit_value: f64::NAN,
            merit_gap: f64::NAN,
            penalty: f64::NAN,
            gamma: f64::NAN,
            grad_mapping_norm: g_norm,
            inner_iters: 0,
            inner_residual: f64::NAN,
        });
        if !g_norm.is_finite() {
            return Err(diverged(trace, t, "non-finite gradient", start));
        }
        if g_norm <= run.tol {
            trace.status = SolveStatus::Converged;
            break;
        }
        if t == run.t_max {
            trace.status = SolveStatus::MaxIter;
            break;
        }
        let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - run.alpha * gi).collect();
        if !linalg::is_finite(&trial) {
            return Err(diverged(trace, t + 1, "non-finite iterate", start));
        }
        x = set.project(&trial)?;
        if linalg::norm(&x) > run.divergence_bound {
            return Err(diverged(trace, t + 1, "iterate norm exceeded divergence bound", start));
        }
        t += 1;
    }
    trace.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(trace)
}

fn diverged(mut trace: SolveTrace, iteration: usize, reason: &str, start: Instant) -> Error {
    trace.wall_time_secs = start.elapsed().as_secs_f64();
    Error::Diverged { iteration, reason: reason.to_string(), trace: Box::new(trace) }
}

/// Evenly spaced weights on the simplex: all `k / (n - 1)` compositions.
/// For two objectives these are `(1 - i/(n-1), i/(n-1))`, `i = 0..n`.
pub fn simplex_grid(num_objectives: usize, n_weights: usize) -> Result<Vec<Vec<f64>>> {
    if n_weights < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 weights, got {n_weights}")));
    }
    if num_objectives < 2 {
        return Err(Error::InvalidInput("need at least 2 objectives".into()));
    }
    let res = n_weights - 1;
    let mut out = Vec::new();
    let mut counts = vec![0usize; num_objectives];
    compositions(res, 0, &mut counts, &mut out);
    Ok(out
        .into_iter()
        .map(|c| c.iter().map(|k| *k as f64 / res as f64).collect())
        .collect())
}

fn compositions(left: usize, pos: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        out.push(counts.clone());
        return;
    }
    for k in (0..=left).rev() {
        counts[pos] = k;
        compositions(left - k, pos + 1, counts, out);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: Vec<f64>,
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
    pub f0: f64,
    pub status: SolveStatus,
}

/// Runs [`ls_solve`] for every weight of [`simplex_grid`] from the shared
/// settings. A diverged run contributes its last finite row.
pub fn ls_weight_sweep(problem: &MOProblem, n_weights: usize, shared: &LsSettings) -> Result<Vec<SweepPoint>> {
    simplex_grid(problem.num_objectives(), n_weights)?
        .into_iter()
        .map(|lambda| {
            let cfg = LSConfig { lambda: normalized(lambda), run: shared.clone() };
            let trace = match ls_solve(problem, &cfg) {
                Ok(t) => t,
                Err(Error::Diverged { trace, .. }) => *trace,
                Err(e) => return Err(e),
            };
            let last = trace
                .last()
                .ok_or_else(|| Error::InvalidInput("empty LS trace".into()))?;
            Ok(SweepPoint {
                lambda: cfg.lambda.clone(),
                x: last.x.clone(),
                objectives: last.objectives.clone(),
                f0: last.f0,
                status: trace.status,
            })
        })
        .collect()
}

fn normalized(mut lambda: Vec<f64>) -> Vec<f64> {
    let total: f64 = lambda.iter().sum();
    lambda.iter_mut().for_each(|w| *w /= total);
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    #[test]
    fn vertex_weight_reaches_minimizer_of_f1() {
        let (p, _) = problems::example1(1);
        let cfg = LSConfig::new(vec![1.0, 0.0], LsSettings::new(vec![0.3])).unwrap();
        let t = ls_solve(&p, &cfg).unwrap();
        assert_eq!(t.status, SolveStatus::Converged);
        assert!((t.final_x().unwrap()[0] - 1.0).abs() < 1e-6);
        assert!(t.last().unwrap().merit_gap.is_nan());
    }

    #[test]
    fn balanced_weight_on_quadratic_pair() {
        let p = problems::quadratic_pair();
        let cfg = LSConfig::new(vec![0.5, 0.5], LsSettings::new(vec![0.7])).unwrap();
        let t = ls_solve(&p, &cfg).unwrap();
        assert!(t.final_x().unwrap()[0].abs() < 1e-8);
    }

    #[test]
    fn config_checks() {
        let run = LsSettings::new(vec![0.0]);
        assert!(LSConfig::new(vec![0.6, 0.6], run.clone()).is_err());
        assert!(LSConfig::new(vec![-0.5, 1.5], run.clone()).is_err());
        assert!(LSConfig::new(vec![0.5, 0.5 + 1e-13], run.clone()).is_ok());
        assert!(LSConfig::new(vec![0.5, 0.5], LsSettings { alpha: 0.0, ..run }).is_err());
    }

    #[test]
    fn grid_of_weights() {
        assert_eq!(simplex_grid(2, 2).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(simplex_grid(2, 101).unwrap().len(), 101);
        let g3 = simplex_grid(3, 3).unwrap();
        assert_eq!(g3.len(), 6);
        assert!(g3.iter().all(|w| (w.iter().sum::<f64>() - 1.0).abs() < 1e-15));
        assert!(simplex_grid(2, 1).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let p = problems::quadratic_pair();
        let run = LsSettings { alpha: 2.0, ..LsSettings::new(vec![0.5]) };
        let cfg = LSConfig::new(vec![0.5, 0.5], run).unwrap();
        assert!(matches!(ls_solve(&p, &cfg), Err(Error::Diverged { .. })));
    }
}
