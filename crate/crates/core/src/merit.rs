//! Smoothed merit function for weak Pareto optimality.
//!
//! For `l >= 0` and `tau > 0`,
//!
//! ```text
//! h(x, y) = tau * ln sum_m exp((f_m(y) - f_m(x)) / tau) + (l / 2) ||x - y||^2
//! v(x)    = -min_{y in X} h(x, y)
//! ```
//!
//! `v(x) >= -h(x, x) = -tau ln M`, with the minimum value `-tau ln M` attained
//! on the Pareto set. With `y*` the inner minimizer and `pi` the softmax of
//! `(f(y*) - f(x)) / tau`, the gradient is
//! `grad v(x) = sum_m pi_m grad f_m(x) - l (x - y*)`.
//!
//! The inner problem is strongly convex in `y` when `l` exceeds the weak
//! convexity modulus of the objectives. It is solved with a first-order
//! oracle; [`MeritEval`] records the gradient-mapping residual of the final
//! inner iterate so callers can widen tolerances accordingly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::grid::GridSpec;
use crate::linalg;
use crate::oracle::{OracleKind, OracleState};
use crate::problem::MOProblem;

/// Smallest accepted temperature.
pub const MIN_TAU: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeritConfig {
    /// Proximal weight `l >= 0`.
    pub l: f64,
    /// Log-sum-exp temperature, at least [`MIN_TAU`].
    pub tau: f64,
    /// Gradient-mapping tolerance of the standalone inner solve.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
}

impl Default for MeritConfig {
    fn default() -> Self {
        Self { l: 1.0, tau: 0.01, inner_tol: 1e-8, inner_max_iter: 20_000 }
    }
}

impl MeritConfig {
    pub fn new(l: f64, tau: f64) -> Result<Self> {
        let cfg = Self { l, tau, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_inner(mut self, tol: f64, max_iter: usize) -> Self {
        self.inner_tol = tol;
        self.inner_max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l >= 0.0 && self.l.is_finite()) {
            return Err(Error::InvalidConfig(format!("l must be finite and >= 0, got {}", self.l)));
        }
        if !(self.tau >= MIN_TAU && self.tau.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tau must be finite and >= {MIN_TAU}, got {}",
                self.tau
            )));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::InvalidConfig("inner_tol must be positive".into()));
        }
        if self.inner_max_iter == 0 {
            return Err(Error::InvalidConfig("inner_max_iter must be positive".into()));
        }
        Ok(())
    }

    /// `tau ln M`, the offset that makes the merit gap nonnegative.
    pub fn offset(&self, num_objectives: usize) -> f64 {
        self.tau * (num_objectives as f64).ln()
    }
}

/// Merit value, inner minimizer, softmax weights and gradient at one `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritEval {
    /// `v_{l,tau}(x)` evaluated at the returned inner iterate.
    pub value: f64,
    /// `v + tau ln M`; zero on the exact minimizers of `v`.
    pub gap: f64,
    pub y_star: Vec<f64>,
    pub pi: Vec<f64>,
    pub grad: Vec<f64>,
    pub inner_iters: usize,
    /// Gradient-mapping norm of the inner problem at `y_star`.
    pub inner_residual: f64,
    /// `false` when the inner tolerance was not reached.
    pub inner_converged: bool,
}

/// Oracle and step used for the inner `y` updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerMethod {
    pub oracle: OracleKind,
    pub step: f64,
}

impl InnerMethod {
    pub fn pgd(step: f64) -> Self {
        Self { oracle: OracleKind::Pgd, step }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub y: Vec<f64>,
    pub iters: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Max-shifted `tau * ln sum exp(a / tau)` and the matching softmax weights.
pub fn log_sum_exp(a: &[f64], tau: f64) -> (f64, Vec<f64>) {
    let a_max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut pi: Vec<f64> = a.iter().map(|ai| ((ai - a_max) / tau).exp()).collect();
    let total: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= total;
    }
    (a_max + tau * total.ln(), pi)
}

/// Everything about `x` that stays fixed during the inner solve.
struct Anchor<'a> {
    cfg: &'a MeritConfig,
    problem: &'a MOProblem,
    x: &'a [f64],
    fx: Vec<f64>,
}

impl<'a> Anchor<'a> {
    fn new(cfg: &'a MeritConfig, problem: &'a MOProblem, x: &'a [f64]) -> Self {
        let fx = problem.objectives(x);
        Self { cfg, problem, x, fx }
    }

    fn diffs(&self, fy: &[f64]) -> Vec<f64> {
        fy.iter().zip(&self.fx).map(|(a, b)| a - b).collect()
    }

    fn value_and_pi(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let (lse, pi) = log_sum_exp(&self.diffs(&self.problem.objectives(y)), self.cfg.tau);
        let prox = 0.5 * self.cfg.l * linalg::dist(self.x, y).powi(2);
        (lse + prox, pi)
    }

    fn grad_y(&self, y: &[f64]) -> Vec<f64> {
        let (_, pi) = log_sum_exp(&self.diffs(&self.problem.objectives(y)), self.cfg.tau);
        let mut g = linalg::weighted_rows(&pi, &self.problem.jacobian(y));
        for ((gi, yi), xi) in g.iter_mut().zip(y).zip(self.x) {
            *gi += self.cfg.l * (yi - xi);
        }
        g
    }

    fn residual(&self, y: &[f64], g: &[f64], step: f64) -> f64 {
        linalg::norm(&self.problem.feasible_set().gradient_mapping(y, g, step))
    }

    /// Assemble the merit quantities at the inner iterate `y`.
    fn eval_at(&self, y: Vec<f64>, iters: usize, residual: f64, converged: bool) -> MeritEval {
        let (h, pi) = self.value_and_pi(&y);
        let mut grad = linalg::weighted_rows(&pi, &self.problem.jacobian(self.x));
        for ((gi, xi), yi) in grad.iter_mut().zip(self.x).zip(&y) {
            *gi -= self.cfg.l * (xi - yi);
        }
        MeritEval {
            value: -h,
            gap: -h + self.cfg.offset(self.fx.len()),
            y_star: y,
            pi,
            grad,
            inner_iters: iters,
            inner_residual: residual,
            inner_converged: converged,
        }
    }
}

fn check_point(problem: &MOProblem, what: &str, x: &[f64]) -> Result<()> {
    ensure_len(x, problem.dim())?;
    ensure_finite(what, x)
}

pub fn h_value(cfg: &MeritConfig, problem: &MOProblem, x: &[f64], y: &[f64]) -> f64 {
    Anchor::new(cfg, problem, x).value_and_pi(y).0
}

/// Softmax weights `pi_m(x, y)` of `(f_m(y) - f_m(x)) / tau`.
pub fn softmax_weights(cfg: &MeritConfig, problem: &MOProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
    Anchor::new(cfg, problem, x).value_and_pi(y).1
}

/// `grad_y h = sum_m pi_m(x, y) grad f_m(y) + l (y - x)`.
pub fn h_grad_y(cfg: &MeritConfig, problem: &MOProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
    Anchor::new(cfg, problem, x).grad_y(y)
}

/// `grad_x h = -sum_m pi_m(x, y) grad f_m(x) - l (y - x)`.
pub fn h_grad_x(cfg: &MeritConfig, problem: &MOProblem, x: &[f64], y: &[f64]) -> Vec<f64> {
    let pi = softmax_weights(cfg, problem, x, y);
    let mut g = linalg::weighted_rows(&pi, &problem.jacobian(x));
    for ((gi, xi), yi) in g.iter_mut().zip(x).zip(y) {
        *gi = -*gi - cfg.l * (yi - xi);
    }
    g
}

/// Minimizes `h(x, .)` from `y_init` until the gradient-mapping norm
/// `||y - Proj(y - step grad_y h)|| / step` drops to `cfg.inner_tol`.
///
/// Returns the iterate with the smallest residual seen; `converged` is false
/// when `cfg.inner_max_iter` updates were not enough.
pub fn inner_solve(
    cfg: &MeritConfig,
    problem: &MOProblem,
    x: &[f64],
    y_init: &[f64],
    inner: &InnerMethod,
) -> Result<InnerSolution> {
    cfg.validate()?;
    check_point(problem, "x", x)?;
    check_point(problem, "y_init", y_init)?;
    let anchor = Anchor::new(cfg, problem, x);
    solve_to_tolerance(&anchor, y_init, inner)
}

fn solve_to_tolerance(
    anchor: &Anchor<'_>,
    y_init: &[f64],
    inner: &InnerMethod,
) -> Result<InnerSolution> {
    let cfg = anchor.cfg;
    let set = anchor.problem.feasible_set();
    let mut state = inner.oracle.initial_state(y_init.len());
    let mut y = set.project(y_init)?;
    let mut best = InnerSolution { y: y.clone(), iters: 0, residual: f64::INFINITY, converged: false };

    for k in 0..=cfg.inner_max_iter {
        let g = anchor.grad_y(&y);
        let residual = anchor.residual(&y, &g, inner.step);
        if !residual.is_finite() {
            break;
        }
        if residual < best.residual {
            best = InnerSolution { y: y.clone(), iters: k, residual, converged: false };
        }
        if residual <= cfg.inner_tol {
            best.converged = true;
            break;
        }
        if k == cfg.inner_max_iter {
            break;
        }
        y = inner.oracle.update(set, &y, &g, inner.step, &mut state)?;
        if !linalg::is_finite(&y) {
            break;
        }
    }
    Ok(best)
}

/// Runs exactly `steps` inner updates from `y_init` with a caller-owned
/// oracle state, then reports the residual at the final iterate.
pub fn inner_steps(
    cfg: &MeritConfig,
    problem: &MOProblem,
    x: &[f64],
    y_init: &[f64],
    inner: &InnerMethod,
    steps: usize,
    state: &mut OracleState,
) -> Result<InnerSolution> {
    let anchor = Anchor::new(cfg, problem, x);
    let set = problem.feasible_set();
    let mut y = y_init.to_vec();
    for _ in 0..steps {
        let g = anchor.grad_y(&y);
        y = inner.oracle.update(set, &y, &g, inner.step, state)?;
    }
    let g = anchor.grad_y(&y);
    let residual = anchor.residual(&y, &g, inner.step);
    Ok(InnerSolution { y, iters: steps, residual, converged: residual <= cfg.inner_tol })
}

/// Merit quantities at `x` using `y` as the inner solution, without solving.
pub fn merit_at(
    cfg: &MeritConfig,
    problem: &MOProblem,
    x: &[f64],
    inner: &InnerSolution,
) -> MeritEval {
    Anchor::new(cfg, problem, x).eval_at(inner.y.clone(), inner.iters, inner.residual, inner.converged)
}

/// Solves the inner problem from `y_init` and evaluates `v`, `pi` and
/// `grad v` at the result.
pub fn merit_eval(
    cfg: &MeritConfig,
    problem: &MOProblem,
    x: &[f64],
    y_init: &[f64],
    inner: &InnerMethod,
) -> Result<MeritEval> {
    cfg.validate()?;
    check_point(problem, "x", x)?;
    check_point(problem, "y_init", y_init)?;
    if !(inner.step > 0.0) {
        return Err(Error::InvalidConfig("inner step must be positive".into()));
    }
    let anchor = Anchor::new(cfg, problem, x);
    let sol = solve_to_tolerance(&anchor, y_init, inner)?;
    if !sol.converged {
        log::warn!(
            "inner solve stopped at residual {:.3e} > tol {:.1e} after {} iterations",
            sol.residual,
            cfg.inner_tol,
            sol.iters
        );
    }
    Ok(anchor.eval_at(sol.y, sol.iters, sol.residual, sol.converged))
}

/// [`merit_eval`] from several starting points, keeping the inner solution
/// with the smallest `h`. Useful when `l` is too small for the inner problem
/// to be convex, e.g. `l = 0` on nonconvex objectives.
pub fn merit_eval_multistart(
    cfg: &MeritConfig,
    problem: &MOProblem,
    x: &[f64],
    starts: &[Vec<f64>],
    inner: &InnerMethod,
) -> Result<MeritEval> {
    let mut best: Option<MeritEval> = None;
    for y0 in starts {
        let eval = merit_eval(cfg, problem, x, y0, inner)?;
        if best.as_ref().map_or(true, |b| eval.value > b.value) {
            best = Some(eval);
        }
    }
    best.ok_or_else(|| Error::InvalidInput("no starting points given".into()))
}

/// Grid oracle for `u(x) = sup_y min_m (f_m(x) - f_m(y))`.
///
/// `x` itself is always a candidate, so the result is nonnegative like the
/// exact merit. The grid must cover the region where the supremum is
/// attained.
pub fn brute_u_bar(problem: &MOProblem, x: &[f64], grid: &GridSpec) -> Result<f64> {
    grid.validate()?;
    ensure_len(x, problem.dim())?;
    if grid.dim() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), got: grid.dim() });
    }
    let fx = problem.objectives(x);
    let best = grid
        .nodes()
        .into_iter()
        .filter(|y| problem.feasible_set().contains(y))
        .map(|y| {
            let fy = problem.objectives(&y);
            fx.iter().zip(&fy).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(best)
}

/// Smoothness estimate of the objectives over a probe box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessEstimate {
    /// Largest Hessian spectral norm over objectives and probe points.
    pub hessian_bound: f64,
    /// Largest gradient spread `max ||grad f_m - grad f_n||`.
    pub gradient_spread: f64,
}

impl SmoothnessEstimate {
    /// Upper estimate of the Lipschitz constant of `grad_y h`:
    /// `l + L_F + D^2 / (4 tau)`. The last term bounds the covariance part of
    /// the log-sum-exp Hessian (Popoviciu's inequality on the softmax
    /// distribution of gradients).
    pub fn inner_lipschitz(&self, cfg: &MeritConfig) -> f64 {
        cfg.l + self.hessian_bound + self.gradient_spread.powi(2) / (4.0 * cfg.tau)
    }

    /// Inner step `1 / L_h`.
    pub fn inner_step(&self, cfg: &MeritConfig) -> f64 {
        1.0 / self.inner_lipschitz(cfg)
    }

    /// Whether `l` dominates the (estimated) weak convexity modulus, which
    /// makes the inner problem strongly convex.
    pub fn inner_strongly_convex(&self, cfg: &MeritConfig) -> bool {
        cfg.l > self.hessian_bound
    }
}

/// Estimates smoothness constants by power iteration on finite-difference
/// Hessian-vector products at `samples` uniform points of the probe box.
pub fn estimate_smoothness(
    problem: &MOProblem,
    lower: &[f64],
    upper: &[f64],
    samples: usize,
    seed: u64,
) -> Result<SmoothnessEstimate> {
    ensure_len(lower, problem.dim())?;
    ensure_len(upper, problem.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = problem.dim();
    let mut hessian_bound: f64 = 0.0;
    let mut gradient_spread: f64 = 0.0;

    for _ in 0..samples.max(1) {
        let x: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| rng.gen_range(*l..=*u)).collect();
        let jac = problem.jacobian(&x);
        for a in 0..jac.len() {
            for b in a + 1..jac.len() {
                gradient_spread = gradient_spread.max(linalg::dist(&jac[a], &jac[b]));
            }
        }
        let h = 1e-5 * (1.0 + linalg::norm(&x));
        for m in 0..problem.num_objectives() {
            let mut v: Vec<f64> = (0..q).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut lambda = 0.0;
            for _ in 0..30 {
                let nv = linalg::norm(&v);
                if nv == 0.0 {
                    break;
                }
                v.iter_mut().for_each(|vi| *vi /= nv);
                let plus: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| xi + h * vi).collect();
                let minus: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| xi - h * vi).collect();
                let hv: Vec<f64> = problem.jacobian(&plus)[m]
                    .iter()
                    .zip(&problem.jacobian(&minus)[m])
                    .map(|(p, n)| (p - n) / (2.0 * h))
                    .collect();
                lambda = linalg::norm(&hv);
                v = hv;
            }
            hessian_bound = hessian_bound.max(lambda);
        }
    }
    Ok(SmoothnessEstimate { hessian_bound, gradient_spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    fn cfg(l: f64, tau: f64) -> MeritConfig {
        MeritConfig::new(l, tau).unwrap()
    }

    #[test]
    fn h_at_diagonal_is_tau_ln_m() {
        let p = problems::example1(3).0;
        let x = [0.2, -0.4, 1.1];
        let v = h_value(&cfg(1.0, 0.01), &p, &x, &x);
        assert!((v - 0.01 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn h_at_diagonal_three_objectives() {
        use std::sync::Arc;
        let p = MOProblem::new(
            "three",
            1,
            3,
            Arc::new(|x: &[f64]| vec![x[0], x[0] * x[0], x[0].sin()]),
            Arc::new(|x: &[f64]| vec![vec![1.0], vec![2.0 * x[0]], vec![x[0].cos()]]),
        )
        .unwrap();
        let v = h_value(&cfg(0.5, 0.1), &p, &[0.7], &[0.7]);
        assert!((v - 0.1 * 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn lse_survives_tiny_tau() {
        let (v, pi) = log_sum_exp(&[1000.0, 999.0], 1e-6);
        assert!((v - 1000.0).abs() < 1e-9);
        assert!((pi[0] - 1.0).abs() < 1e-12 && pi[1] >= 0.0);
    }

    #[test]
    fn grad_y_at_diagonal_is_mean_gradient() {
        let p = problems::example1(2).0;
        let x = [0.3, -0.1];
        let g = h_grad_y(&cfg(1.0, 0.05), &p, &x, &x);
        let j = p.jacobian(&x);
        for i in 0..2 {
            assert!((g[i] - 0.5 * (j[0][i] + j[1][i])).abs() < 1e-15);
        }
        let qp = problems::quadratic_pair();
        assert_eq!(h_grad_y(&cfg(1.0, 0.01), &qp, &[0.0], &[0.0]), vec![0.0]);
    }

    #[test]
    fn config_validation() {
        assert!(MeritConfig::new(-1.0, 0.1).is_err());
        assert!(MeritConfig::new(1.0, 0.0).is_err());
        assert!(MeritConfig::new(1.0, 1e-7).is_err());
        assert!(MeritConfig::new(0.0, 1e-6).is_ok());
        assert!(MeritConfig::new(1.0, 0.1).unwrap().with_inner(0.0, 10).validate().is_err());
    }

    #[test]
    fn quadratic_pair_minimizer_at_origin() {
        let p = problems::quadratic_pair();
        let c = cfg(2.0, 0.01).with_inner(1e-10, 100_000);
        let step = 1.0 / (2.0 + 2.0 + 16.0 / (4.0 * 0.01));
        let e = merit_eval(&c, &p, &[0.0], &[0.3], &InnerMethod::pgd(step)).unwrap();
        assert!(e.inner_converged);
        assert!(e.y_star[0].abs() < 1e-10);
        assert!((e.value + 0.01 * 2f64.ln()).abs() < 1e-12);
        assert!(e.grad[0].abs() < 1e-9);
        assert!(e.gap.abs() < 1e-12);
    }

    #[test]
    fn unconverged_inner_solve_returns_best_iterate() {
        let p = problems::example1(2).0;
        let c = cfg(1.0, 0.01).with_inner(1e-14, 3);
        let e = merit_eval(&c, &p, &[0.5, 0.5], &[0.5, 0.5], &InnerMethod::pgd(0.01)).unwrap();
        assert!(!e.inner_converged);
        assert!(e.inner_residual.is_finite());
        assert!(e.inner_iters <= 3);
    }

    #[test]
    fn brute_u_bar_on_fig2() {
        let p = problems::fig2();
        let grid = GridSpec::interval(-2.0, 2.0, 4001).unwrap();
        assert!(brute_u_bar(&p, &[0.1], &grid).unwrap() < 1e-12);
        assert!(brute_u_bar(&p, &[2.0], &grid).unwrap() > 0.1);
        let empty = GridSpec { lower: vec![0.0], upper: vec![1.0], points_per_dim: 0, lipschitz: None };
        assert!(brute_u_bar(&p, &[0.0], &empty).is_err());
    }

    #[test]
    fn smoothness_estimate_on_quadratic_pair() {
        let p = problems::quadratic_pair();
        let est = estimate_smoothness(&p, &[-2.0], &[2.0], 5, 1).unwrap();
        assert!((est.hessian_bound - 2.0).abs() < 1e-4);
        assert!((est.gradient_spread - 4.0).abs() < 1e-12);
        let c = cfg(2.0, 0.01);
        assert!((est.inner_lipschitz(&c) - 404.0).abs() < 1e-3);
    }
}
