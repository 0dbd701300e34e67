//! Multi-objective problem definitions.
//!
//! A [`MOProblem`] bundles the vector objective `F: R^q -> R^M`, its Jacobian,
//! a scalar preference objective `f0` with its gradient, and a convex feasible
//! set with a Euclidean projection. Gradients are supplied analytically; the
//! [`crate::fd`] module provides central-difference checks for them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::linalg;

pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Closed convex feasible set with an exact projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    AllSpace,
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl FeasibleSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        ensure_len(&upper, lower.len())?;
        if lower.iter().zip(&upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u) {
            return Err(Error::InvalidInput(
                "box bounds must satisfy lower <= upper componentwise".into(),
            ));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// Euclidean projection. Identity on `R^q`, componentwise clamp on boxes.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_finite("projection input", x)?;
        if let FeasibleSet::Box { lower, .. } = self {
            ensure_len(x, lower.len())?;
        }
        let mut out = x.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// Projection without input validation, for inner loops that have
    /// already checked finiteness and dimension.
    pub fn project_in_place(&self, x: &mut [f64]) {
        if let FeasibleSet::Box { lower, upper } = self {
            for ((xi, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
                *xi = xi.clamp(*lo, *hi);
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            FeasibleSet::AllSpace => true,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower)
                .zip(upper)
                .all(|((xi, lo), hi)| lo <= xi && xi <= hi),
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self, FeasibleSet::AllSpace)
    }

    /// Gradient mapping `(x - Proj(x - step * g)) / step`.
    pub fn gradient_mapping(&self, x: &[f64], g: &[f64], step: f64) -> Vec<f64> {
        let mut moved: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - step * gi).collect();
        self.project_in_place(&mut moved);
        x.iter().zip(&moved).map(|(a, b)| (a - b) / step).collect()
    }
}

/// Desired direction in objective space: a point is preferred when its
/// objective vector is parallel to `ray`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceSpec {
    ray: Vec<f64>,
}

impl PreferenceSpec {
    pub fn new(ray: Vec<f64>) -> Result<Self> {
        if ray.len() < 2 {
            return Err(Error::InvalidPreference(
                "preference ray needs at least two components".into(),
            ));
        }
        if ray.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidPreference(format!(
                "preference ray must be strictly positive, got {ray:?}"
            )));
        }
        Ok(Self { ray })
    }

    /// Two-objective ray at `angle` radians from the first objective axis.
    pub fn from_angle(angle: f64) -> Result<Self> {
        Self::new(vec![angle.cos(), angle.sin()])
    }

    /// `count` rays with equal angular spacing over `[from, to]`.
    pub fn angular_fan(count: usize, from: f64, to: f64) -> Result<Vec<Self>> {
        match count {
            0 => Ok(Vec::new()),
            1 => Ok(vec![Self::from_angle(0.5 * (from + to))?]),
            n => (0..n)
                .map(|i| Self::from_angle(from + (to - from) * i as f64 / (n - 1) as f64))
                .collect(),
        }
    }

    pub fn ray(&self) -> &[f64] {
        &self.ray
    }

    pub fn num_objectives(&self) -> usize {
        self.ray.len()
    }

    /// `H_i = r_{i+1} F_1 - r_1 F_{i+1}` for `i = 1..M-1`.
    ///
    /// For `M = 2` this vanishes exactly when `F` is parallel to `r`. For
    /// larger `M` each component pins one ratio `F_{i+1} / F_1`.
    pub fn residual(&self, f: &[f64]) -> Result<Vec<f64>> {
        ensure_len(f, self.ray.len())?;
        Ok(self.residual_unchecked(f))
    }

    fn residual_unchecked(&self, f: &[f64]) -> Vec<f64> {
        let r1 = self.ray[0];
        (1..self.ray.len())
            .map(|i| self.ray[i] * f[0] - r1 * f[i])
            .collect()
    }

    /// `||H(F)||^2`.
    pub fn violation(&self, f: &[f64]) -> Result<f64> {
        Ok(linalg::norm_sq(&self.residual(f)?))
    }

    /// Builds `f0(x) = ||H(F(x))||^2` and its gradient from the problem's
    /// objectives and Jacobian.
    pub fn objective(&self, objectives: VectorFn, jacobian: JacobianFn) -> (ScalarFn, VectorFn) {
        let spec = self.clone();
        let values = objectives.clone();
        let f0: ScalarFn = Arc::new(move |x: &[f64]| {
            linalg::norm_sq(&spec.residual_unchecked(&values(x)))
        });

        let spec = self.clone();
        let grad: VectorFn = Arc::new(move |x: &[f64]| {
            let f = objectives(x);
            let jac = jacobian(x);
            let h = spec.residual_unchecked(&f);
            let r1 = spec.ray[0];
            // d/dx sum_i H_i^2 = 2 sum_i H_i (r_{i+1} grad f_1 - r_1 grad f_{i+1})
            let mut weights = vec![0.0; f.len()];
            for (i, hi) in h.iter().enumerate() {
                weights[0] += 2.0 * hi * spec.ray[i + 1];
                weights[i + 1] -= 2.0 * hi * r1;
            }
            linalg::weighted_rows(&weights, &jac)
        });
        (f0, grad)
    }
}

/// A vector objective with a scalar preference objective over a feasible set.
///
/// Cloning is cheap; all callables are shared behind `Arc`.
#[derive(Clone)]
pub struct MOProblem {
    name: String,
    dim: usize,
    num_objectives: usize,
    objectives: VectorFn,
    jacobian: JacobianFn,
    f0: ScalarFn,
    grad_f0: VectorFn,
    feasible: FeasibleSet,
}

impl fmt::Debug for MOProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MOProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("num_objectives", &self.num_objectives)
            .field("feasible", &self.feasible)
            .finish_non_exhaustive()
    }
}

impl MOProblem {
    /// Problem with `f0 = 0` on `R^dim`.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        num_objectives: usize,
        objectives: VectorFn,
        jacobian: JacobianFn,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("decision dimension must be positive".into()));
        }
        if num_objectives < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least two objectives, got {num_objectives}"
            )));
        }
        Ok(Self {
            name: name.into(),
            dim,
            num_objectives,
            objectives,
            jacobian,
            f0: Arc::new(|_| 0.0),
            grad_f0: Arc::new(move |x: &[f64]| vec![0.0; x.len()]),
            feasible: FeasibleSet::AllSpace,
        })
    }

    pub fn with_preference_objective(mut self, f0: ScalarFn, grad_f0: VectorFn) -> Self {
        self.f0 = f0;
        self.grad_f0 = grad_f0;
        self
    }

    /// Sets `f0 = ||H(F(x))||^2` for the given preference ray.
    pub fn with_preference(self, spec: &PreferenceSpec) -> Result<Self> {
        if spec.num_objectives() != self.num_objectives {
            return Err(Error::DimensionMismatch {
                expected: self.num_objectives,
                got: spec.num_objectives(),
            });
        }
        let (f0, grad) = spec.objective(self.objectives.clone(), self.jacobian.clone());
        Ok(self.with_preference_objective(f0, grad))
    }

    pub fn with_feasible_set(mut self, set: FeasibleSet) -> Result<Self> {
        if let FeasibleSet::Box { lower, .. } = &set {
            ensure_len(lower, self.dim)?;
        }
        self.feasible = set;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_objectives(&self) -> usize {
        self.num_objectives
    }

    pub fn feasible_set(&self) -> &FeasibleSet {
        &self.feasible
    }

    pub fn objectives(&self, x: &[f64]) -> Vec<f64> {
        (self.objectives)(x)
    }

    /// `M x q` Jacobian; row `m` is the gradient of `f_m`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        (self.jacobian)(x)
    }

    pub fn f0(&self, x: &[f64]) -> f64 {
        (self.f0)(x)
    }

    pub fn grad_f0(&self, x: &[f64]) -> Vec<f64> {
        (self.grad_f0)(x)
    }

    pub fn objectives_fn(&self) -> VectorFn {
        self.objectives.clone()
    }

    pub fn jacobian_fn(&self) -> JacobianFn {
        self.jacobian.clone()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_len(x, self.dim)?;
        self.feasible.project(x)
    }
}
