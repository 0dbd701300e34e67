//! Penalty objective `phi_gamma(x) = f0(x) + gamma * p(x)` with
//! `p(x) = (v(x) + tau ln M)^theta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::merit::{merit_eval, InnerMethod, MeritConfig, MeritEval};
use crate::problem::MOProblem;

/// Penalty exponent and the linear-capped schedule
/// `gamma_t = min(gamma0 + gamma_step * t, gamma_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyConfig {
    pub theta: f64,
    pub gamma0: f64,
    pub gamma_step: f64,
    pub gamma_max: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self { theta: 1.0, gamma0: 0.05, gamma_step: 0.01, gamma_max: 1.5 }
    }
}

impl PenaltyConfig {
    /// Constant `gamma` with exponent `theta`.
    pub fn constant(theta: f64, gamma: f64) -> Self {
        Self { theta, gamma0: gamma, gamma_step: 0.0, gamma_max: gamma }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 1.0 && self.theta.is_finite()) {
            return Err(Error::UnsupportedConfiguration(format!(
                "penalty exponent theta must be >= 1, got {}",
                self.theta
            )));
        }
        if !(self.gamma0 >= 0.0 && self.gamma_max >= self.gamma0 && self.gamma_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "need gamma_max >= gamma0 >= 0, got gamma0 = {}, gamma_max = {}",
                self.gamma0, self.gamma_max
            )));
        }
        if !(self.gamma_step >= 0.0) {
            return Err(Error::InvalidConfig("gamma_step must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn gamma_at(&self, t: usize) -> f64 {
        (self.gamma0 + self.gamma_step * t as f64).min(self.gamma_max)
    }
}

/// `sign(a) |a|^e`.
fn signed_pow(a: f64, e: f64) -> f64 {
    a.signum() * a.abs().powf(e)
}

/// `p = sign(g) |g|^theta` with `g = v + tau ln M` the merit gap.
///
/// The signed power keeps `p` defined when an inexact inner solve leaves the
/// gap slightly negative; it equals `g^theta` whenever `g >= 0`.
pub fn penalty_value(pcfg: &PenaltyConfig, merit: &MeritEval) -> f64 {
    signed_pow(merit.gap, pcfg.theta)
}

/// `theta |g|^(theta - 1) grad v`, the gradient of [`penalty_value`].
///
/// Since `grad v(x) = -grad_x h(x, y*)`, `gamma` times this vector is the
/// penalty part of the outer update direction
/// `grad f0 - gamma theta |g|^(theta - 1) grad_x h(x, y*)`. For `g >= 0`,
/// which holds at exact inner minimizers, `|g|^(theta - 1)` and
/// `sign(g) |g|^(theta - 1)` coincide; for `theta = 1` the factor is exactly 1.
pub fn penalty_grad_contrib(pcfg: &PenaltyConfig, merit: &MeritEval) -> Result<Vec<f64>> {
    if pcfg.theta < 1.0 {
        return Err(Error::UnsupportedConfiguration(format!(
            "theta = {} < 1 gives a nonsmooth penalty",
            pcfg.theta
        )));
    }
    let factor = if pcfg.theta == 1.0 {
        1.0
    } else {
        pcfg.theta * merit.gap.abs().powf(pcfg.theta - 1.0)
    };
    Ok(merit.grad.iter().map(|g| factor * g).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyEval {
    pub value: f64,
    pub grad: Vec<f64>,
    pub penalty: f64,
    pub merit: MeritEval,
}

/// Evaluates `phi_gamma` and its gradient at `x`, solving the inner problem
/// once from `y_init`. The returned merit evaluation carries `y*` for warm
/// starts.
pub fn phi_gamma(
    pcfg: &PenaltyConfig,
    problem: &MOProblem,
    mcfg: &MeritConfig,
    x: &[f64],
    gamma: f64,
    y_init: &[f64],
    inner: &InnerMethod,
) -> Result<PenaltyEval> {
    if pcfg.theta < 1.0 {
        return Err(Error::UnsupportedConfiguration(format!(
            "theta = {} < 1 gives a nonsmooth penalty",
            pcfg.theta
        )));
    }
    let merit = merit_eval(mcfg, problem, x, y_init, inner)?;
    assemble(pcfg, problem, x, gamma, merit)
}

/// Combines an existing merit evaluation at `x` with `f0`.
pub fn assemble(
    pcfg: &PenaltyConfig,
    problem: &MOProblem,
    x: &[f64],
    gamma: f64,
    merit: MeritEval,
) -> Result<PenaltyEval> {
    let penalty = penalty_value(pcfg, &merit);
    let contrib = penalty_grad_contrib(pcfg, &merit)?;
    let mut grad = problem.grad_f0(x);
    for (g, c) in grad.iter_mut().zip(&contrib) {
        *g += gamma * c;
    }
    Ok(PenaltyEval { value: problem.f0(x) + gamma * penalty, grad, penalty, merit })
}
