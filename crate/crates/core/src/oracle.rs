//! First-order update oracles `U(w, dw; alpha, t)`.
//!
//! Every oracle ends with a projection onto the feasible set. Stateful
//! oracles keep their state in an [`OracleState`] owned by the caller, so the
//! same kind can drive independent `x` and `y` sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::FeasibleSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleKind {
    /// `Proj(w - alpha dw)`
    Pgd,
    /// Heavy ball: `u_t = c u_{t-1} + dw`, `Proj(w - alpha u_t)`.
    Momentum { coefficient: f64 },
    /// Lookahead: `v_{t+1} = w - alpha dw`, `Proj(v_{t+1} + c (v_{t+1} - v_t))`.
    Nesterov { coefficient: f64 },
    /// Bias-corrected Adam moments, `Proj(w - alpha m_hat / (sqrt(v_hat) + eps))`.
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OracleKind {
    fn default() -> Self {
        OracleKind::Pgd
    }
}

impl OracleKind {
    pub fn adam() -> Self {
        OracleKind::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OracleKind::Pgd => Ok(()),
            OracleKind::Momentum { coefficient } | OracleKind::Nesterov { coefficient } => {
                if (0.0..1.0).contains(&coefficient) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "momentum coefficient must lie in [0, 1), got {coefficient}"
                    )))
                }
            }
            OracleKind::Adam { beta1, beta2, eps } => {
                let unit = |b: f64| b > 0.0 && b < 1.0;
                if unit(beta1) && unit(beta2) && eps > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "adam needs beta1, beta2 in (0, 1) and eps > 0, got ({beta1}, {beta2}, {eps})"
                    )))
                }
            }
        }
    }

    pub fn initial_state(&self, dim: usize) -> OracleState {
        match self {
            OracleKind::Pgd => OracleState::Stateless,
            OracleKind::Momentum { .. } => OracleState::Momentum { velocity: vec![0.0; dim] },
            OracleKind::Nesterov { .. } => OracleState::Nesterov { previous: None },
            OracleKind::Adam { .. } => OracleState::Adam {
                first: vec![0.0; dim],
                second: vec![0.0; dim],
                step: 0,
            },
        }
    }

    /// One oracle step from `w` along `delta` with step size `alpha`.
    pub fn update(
        &self,
        set: &FeasibleSet,
        w: &[f64],
        delta: &[f64],
        alpha: f64,
        state: &mut OracleState,
    ) -> Result<Vec<f64>> {
        if delta.len() != w.len() {
            return Err(Error::DimensionMismatch { expected: w.len(), got: delta.len() });
        }
        let mut next = match (self, state) {
            (OracleKind::Pgd, OracleState::Stateless) => {
                w.iter().zip(delta).map(|(wi, di)| wi - alpha * di).collect::<Vec<_>>()
            }
            (OracleKind::Momentum { coefficient }, OracleState::Momentum { velocity }) => {
                check_state_len(velocity.len(), w.len())?;
                for (u, d) in velocity.iter_mut().zip(delta) {
                    *u = coefficient * *u + d;
                }
                w.iter().zip(velocity.iter()).map(|(wi, u)| wi - alpha * u).collect()
            }
            (OracleKind::Nesterov { coefficient }, OracleState::Nesterov { previous }) => {
                let lookahead: Vec<f64> =
                    w.iter().zip(delta).map(|(wi, di)| wi - alpha * di).collect();
                let prev = previous.get_or_insert_with(|| w.to_vec());
                check_state_len(prev.len(), w.len())?;
                let out = lookahead
                    .iter()
                    .zip(prev.iter())
                    .map(|(v, p)| v + coefficient * (v - p))
                    .collect();
                *prev = lookahead;
                out
            }
            (OracleKind::Adam { beta1, beta2, eps }, OracleState::Adam { first, second, step }) => {
                check_state_len(first.len(), w.len())?;
                *step += 1;
                let t = *step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                first
                    .iter_mut()
                    .zip(second.iter_mut())
                    .zip(w.iter().zip(delta))
                    .map(|((m, v), (wi, d))| {
                        *m = beta1 * *m + (1.0 - beta1) * d;
                        *v = beta2 * *v + (1.0 - beta2) * d * d;
                        wi - alpha * (*m / c1) / ((*v / c2).sqrt() + eps)
                    })
                    .collect()
            }
            (kind, _) => {
                return Err(Error::InvalidInput(format!(
                    "oracle state does not match oracle kind {kind:?}"
                )))
            }
        };
        set.project_in_place(&mut next);
        Ok(next)
    }
}

fn check_state_len(state: usize, dim: usize) -> Result<()> {
    if state == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: state, got: dim })
    }
}

/// Mutable oracle state. Created once per sequence by
/// [`OracleKind::initial_state`].
#[derive(Debug, Clone, PartialEq)]
pub enum OracleState {
    Stateless,
    Momentum { velocity: Vec<f64> },
    Nesterov { previous: Option<Vec<f64>> },
    Adam { first: Vec<f64>, second: Vec<f64>, step: u64 },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgd_plain_step() {
        let kind = OracleKind::Pgd;
        let mut st = kind.initial_state(2);
        let w = kind
            .update(&FeasibleSet::AllSpace, &[1.0, 1.0], &[1.0, 0.0], 0.5, &mut st)
            .unwrap();
        assert_eq!(w, vec![0.5, 1.0]);
    }

    #[test]
    fn pgd_projects() {
        let set = FeasibleSet::boxed(vec![0.0], vec![1.0]).unwrap();
        let kind = OracleKind::Pgd;
        let mut st = kind.initial_state(1);
        assert_eq!(kind.update(&set, &[0.2], &[1.0], 1.0, &mut st).unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_momentum_is_pgd() {
        let pgd = OracleKind::Pgd;
        let mom = OracleKind::Momentum { coefficient: 0.0 };
        let mut s1 = pgd.initial_state(3);
        let mut s2 = mom.initial_state(3);
        let mut a = vec![0.3, -1.0, 2.0];
        let mut b = a.clone();
        for k in 0..20 {
            let d: Vec<f64> = a.iter().map(|v| v * (k as f64 * 0.1).sin()).collect();
            a = pgd.update(&FeasibleSet::AllSpace, &a, &d, 0.3, &mut s1).unwrap();
            b = mom.update(&FeasibleSet::AllSpace, &b, &d, 0.3, &mut s2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn momentum_accumulates() {
        let kind = OracleKind::Momentum { coefficient: 0.5 };
        let mut st = kind.initial_state(1);
        let w = kind.update(&FeasibleSet::AllSpace, &[0.0], &[1.0], 1.0, &mut st).unwrap();
        assert_eq!(w, vec![-1.0]);
        let w = kind.update(&FeasibleSet::AllSpace, &w, &[1.0], 1.0, &mut st).unwrap();
        assert_eq!(w, vec![-2.5]);
    }

    #[test]
    fn nesterov_first_step_uses_initial_point_as_previous() {
        let kind = OracleKind::Nesterov { coefficient: 0.5 };
        let mut st = kind.initial_state(1);
        // v1 = 1 - 0.5 * 2 = 0; out = 0 + 0.5 (0 - 1) = -0.5
        let w = kind.update(&FeasibleSet::AllSpace, &[1.0], &[2.0], 0.5, &mut st).unwrap();
        assert_eq!(w, vec![-0.5]);
    }

    /// Scalar Adam recursion on `f(w) = (w - 3)^2 / 2`, written out directly.
    fn reference_adam(w0: f64, steps: usize, alpha: f64) -> f64 {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let (mut w, mut m, mut v) = (w0, 0.0, 0.0);
        for t in 1..=steps {
            let g = w - 3.0;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t as i32));
            let vh = v / (1.0 - b2.powi(t as i32));
            w -= alpha * mh / (vh.sqrt() + eps);
        }
        w
    }

    #[test]
    fn adam_matches_reference_recursion() {
        let kind = OracleKind::adam();
        let mut st = kind.initial_state(1);
        let mut w = vec![0.0];
        for _ in 0..100 {
            let d = vec![w[0] - 3.0];
            w = kind.update(&FeasibleSet::AllSpace, &w, &d, 0.1, &mut st).unwrap();
        }
        assert!((w[0] - reference_adam(0.0, 100, 0.1)).abs() < 1e-12);
    }

    #[test]
    fn adam_converges_on_quadratic() {
        let kind = OracleKind::adam();
        let mut st = kind.initial_state(1);
        let mut w = vec![0.0];
        // Decaying step settles the sign-like Adam oscillation.
        for t in 0..3000 {
            let d = vec![w[0] - 3.0];
            let alpha = 0.5 / (1.0 + t as f64 / 10.0);
            w = kind.update(&FeasibleSet::AllSpace, &w, &d, alpha, &mut st).unwrap();
        }
        assert!((w[0] - 3.0).abs() < 1e-4, "w = {}", w[0]);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let kind = OracleKind::Momentum { coefficient: 0.3 };
        let mut st = kind.initial_state(2);
        assert!(kind.update(&FeasibleSet::AllSpace, &[0.0], &[1.0, 2.0], 0.1, &mut st).is_err());
        assert!(kind.update(&FeasibleSet::AllSpace, &[0.0], &[1.0], 0.1, &mut st).is_err());
        let mut wrong = OracleState::Stateless;
        assert!(kind.update(&FeasibleSet::AllSpace, &[0.0], &[1.0], 0.1, &mut wrong).is_err());
    }

    #[test]
    fn validation() {
        assert!(OracleKind::Momentum { coefficient: 1.0 }.validate().is_err());
        assert!(OracleKind::Nesterov { coefficient: -0.1 }.validate().is_err());
        assert!(OracleKind::Adam { beta1: 0.9, beta2: 1.0, eps: 1e-8 }.validate().is_err());
        assert!(OracleKind::adam().validate().is_ok());
    }
}
