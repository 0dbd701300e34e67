//! Pareto-quality metrics: hypervolume, Pareto stationarity, grid
//! certification of epsilon-weak Pareto optimality and preference violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::grid::GridSpec;
use crate::linalg;
use crate::problem::{MOProblem, PreferenceSpec};

/// A finite set of objective vectors together with the reference (nadir)
/// point used for hypervolume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub points: Vec<Vec<f64>>,
    pub nadir: Vec<f64>,
}

impl FrontSample {
    pub fn new(points: Vec<Vec<f64>>, nadir: Vec<f64>) -> Result<Self> {
        let s = Self { points, nadir };
        s.validate()?;
        Ok(s)
    }

    pub fn num_objectives(&self) -> usize {
        self.nadir.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nadir.is_empty() {
            return Err(Error::InvalidInput("nadir point is empty".into()));
        }
        ensure_finite("nadir", &self.nadir)?;
        for p in &self.points {
            ensure_len(p, self.nadir.len())?;
            ensure_finite("front point", p)?;
        }
        Ok(())
    }

    /// Points that are not componentwise below the nadir. They contribute no
    /// volume.
    pub fn outside_nadir(&self) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| !weakly_dominates(p, &self.nadir))
            .map(|(i, _)| i)
            .collect()
    }

    fn counted(&self) -> Vec<&Vec<f64>> {
        let outside = self.outside_nadir();
        if !outside.is_empty() {
            log::warn!("{} front point(s) exceed the nadir and add no volume", outside.len());
        }
        self.points.iter().filter(|p| weakly_dominates(p, &self.nadir)).collect()
    }
}

/// `a <= b` componentwise.
pub fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Pareto dominance: `a <= b` componentwise with at least one strict
/// inequality.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    weakly_dominates(a, b) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// `a < b` in every component.
pub fn strictly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x < y)
}

/// Indices of points not dominated by any other point.
pub fn non_dominated(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| !points.iter().any(|p| dominates(p, &points[i])))
        .collect()
}

/// Exact two-objective hypervolume by a sweep over the first coordinate.
pub fn hypervolume_2d(sample: &FrontSample) -> Result<f64> {
    sample.validate()?;
    if sample.num_objectives() != 2 {
        return Err(Error::UnsupportedDimension { expected: 2, got: sample.num_objectives() });
    }
    let mut pts: Vec<&Vec<f64>> = sample.counted();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let (r1, r2) = (sample.nadir[0], sample.nadir[1]);
    let mut level = r2;
    let mut volume = 0.0;
    for p in pts {
        if p[1] < level {
            volume += (r1 - p[0]) * (level - p[1]);
            level = p[1];
        }
    }
    Ok(volume)
}

/// Monte Carlo hypervolume for any number of objectives.
///
/// Samples uniformly in the box spanned by the componentwise minimum of the
/// counted points and the nadir. Returns `(estimate, standard_error)`.
pub fn hypervolume_mc(sample: &FrontSample, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    sample.validate()?;
    if n_samples < 1000 {
        return Err(Error::InvalidInput(format!("need at least 1000 samples, got {n_samples}")));
    }
    let pts = sample.counted();
    if pts.is_empty() {
        return Ok((0.0, 0.0));
    }
    let m = sample.num_objectives();
    let lower: Vec<f64> = (0..m)
        .map(|d| pts.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min))
        .collect();
    let box_volume: f64 = lower.iter().zip(&sample.nadir).map(|(l, u)| u - l).product();
    if box_volume <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..n_samples {
        for d in 0..m {
            u[d] = lower[d] + rng.gen::<f64>() * (sample.nadir[d] - lower[d]);
        }
        if pts.iter().any(|p| weakly_dominates(p, &u)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / n_samples as f64;
    let std_error = box_volume * (frac * (1.0 - frac) / n_samples as f64).sqrt();
    Ok((frac * box_volume, std_error))
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cumulative += uj;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|x| (x - shift).max(0.0)).collect()
}

/// Weights `lambda` in the simplex minimizing `||sum_m lambda_m g_m||`.
///
/// Closed form for two gradients, projected gradient on the simplex
/// otherwise.
pub fn min_norm_weights(grads: &[Vec<f64>]) -> Vec<f64> {
    let m = grads.len();
    if m == 1 {
        return vec![1.0];
    }
    if m == 2 {
        let diff = linalg::sub(&grads[0], &grads[1]);
        let denom = linalg::norm_sq(&diff);
        let a = if denom == 0.0 {
            0.5
        } else {
            (-linalg::dot(&grads[1], &diff) / denom).clamp(0.0, 1.0)
        };
        return vec![a, 1.0 - a];
    }
    // Gram matrix of the gradients; the objective is lambda^T G lambda.
    let gram: Vec<Vec<f64>> = grads
        .iter()
        .map(|a| grads.iter().map(|b| linalg::dot(a, b)).collect())
        .collect();
    let trace: f64 = (0..m).map(|i| gram[i][i]).sum();
    if trace == 0.0 {
        return vec![1.0 / m as f64; m];
    }
    let step = 1.0 / trace;
    let mut lambda = vec![1.0 / m as f64; m];
    for _ in 0..100_000 {
        let grad: Vec<f64> = gram.iter().map(|row| linalg::dot(row, &lambda)).collect();
        let trial: Vec<f64> = lambda.iter().zip(&grad).map(|(l, g)| l - step * g).collect();
        let next = project_simplex(&trial);
        let moved = linalg::dist(&next, &lambda);
        lambda = next;
        if moved <= 1e-15 {
            break;
        }
    }
    lambda
}

/// `min_{lambda in simplex} ||J(x)^T lambda||`, zero exactly at Pareto
/// stationary points of an unconstrained problem.
pub fn pareto_stationarity_residual(problem: &MOProblem, x: &[f64]) -> Result<f64> {
    if !problem.feasible_set().is_unconstrained() {
        return Err(Error::UnsupportedConfiguration(
            "stationarity residual is only implemented for unconstrained problems".into(),
        ));
    }
    ensure_len(x, problem.dim())?;
    ensure_finite("x", x)?;
    let jac = problem.jacobian(x);
    let lambda = min_norm_weights(&jac);
    Ok(linalg::norm(&linalg::weighted_rows(&lambda, &jac)))
}

/// Grid check of epsilon-weak Pareto optimality: true iff no grid node `y`
/// has `F(y) < F(x) - eps` in every component.
///
/// Logs a warning when the grid slack implied by its declared Lipschitz bound
/// exceeds `eps`, since the check is then not conclusive.
pub fn eps_weak_pareto_certify(problem: &MOProblem, x: &[f64], grid: &GridSpec, eps: f64) -> Result<bool> {
    grid.validate()?;
    ensure_len(x, problem.dim())?;
    ensure_finite("x", x)?;
    if problem.dim() > 2 {
        return Err(Error::UnsupportedDimension { expected: 2, got: problem.dim() });
    }
    if grid.dim() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), got: grid.dim() });
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidInput(format!("eps must be nonnegative, got {eps}")));
    }
    if let Some(slack) = grid.slack() {
        if slack > eps {
            log::warn!("grid slack {slack:.3e} exceeds eps {eps:.3e}; certification is not conclusive");
        }
    }
    let target: Vec<f64> = problem.objectives(x).iter().map(|f| f - eps).collect();
    let beaten = grid
        .nodes()
        .into_iter()
        .filter(|y| problem.feasible_set().contains(y))
        .any(|y| strictly_dominates(&problem.objectives(&y), &target));
    Ok(!beaten)
}

/// `||H(F)||^2` for the preference ray.
pub fn preference_violation(spec: &PreferenceSpec, f: &[f64]) -> Result<f64> {
    spec.violation(f)
}
