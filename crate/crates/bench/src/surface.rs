//! Merit surfaces of the one-dimensional `fig2` problem.

use std::path::Path;

use foops::grid::GridSpec;
use foops::merit::{brute_u_bar, merit_eval_multistart, InnerMethod};
use foops::{problems, MOProblem, MeritConfig};
use serde::Serialize;

use crate::config::ProblemSpec;
use crate::error::{BenchError, Result};

pub const SURFACE_COLUMNS: [&str; 5] = ["l", "tau", "x", "v", "u_bar"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub l: f64,
    pub tau: f64,
    pub x: f64,
    pub v: f64,
    pub u_bar: f64,
}

/// Grid for `u_bar` on `[-3, 3]` with the analytic Lipschitz bound of `F`.
pub fn fig2_grid(points: usize) -> Result<GridSpec> {
    let lipschitz = 0.5 * ProblemSpec::Fig2.smoothness().gradient_spread;
    Ok(GridSpec::interval(-3.0, 3.0, points)?.with_lipschitz(lipschitz))
}

/// `v_{l,tau}(x)` on `fig2` from several inner starts with a certified step.
pub fn fig2_v(problem: &MOProblem, l: f64, tau: f64, x: f64) -> Result<f64> {
    let cfg = MeritConfig::new(l, tau)?.with_inner(1e-10, 200_000);
    let inner = InnerMethod::pgd(ProblemSpec::Fig2.smoothness().inner_step(&cfg));
    let starts = [vec![x], vec![0.0], vec![-0.5], vec![0.5]];
    Ok(merit_eval_multistart(&cfg, problem, &[x], &starts, &inner)?.value)
}

/// `v` and `u_bar` at `points` evenly spaced `x` in `[lo, hi]` for every
/// `(l, tau)` pair.
pub fn merit_surface(ls: &[f64], taus: &[f64], lo: f64, hi: f64, points: usize) -> Result<Vec<SurfaceRow>> {
    if points < 2 || !(lo < hi) {
        return Err(BenchError::Config("surface needs points >= 2 and lo < hi".into()));
    }
    let problem = problems::fig2();
    let grid = fig2_grid(6001)?;
    let xs: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let u: Vec<f64> = xs
        .iter()
        .map(|x| brute_u_bar(&problem, &[*x], &grid))
        .collect::<foops::Result<_>>()?;
    let mut rows = Vec::new();
    for &l in ls {
        for &tau in taus {
            for (x, u_bar) in xs.iter().zip(&u) {
                rows.push(SurfaceRow { l, tau, x: *x, v: fig2_v(&problem, l, tau, *x)?, u_bar: *u_bar });
            }
        }
    }
    Ok(rows)
}

pub fn write_surface_csv(path: &Path, rows: &[SurfaceRow]) -> Result<()> {
    let io = |e: csv::Error| BenchError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(SURFACE_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([r.l, r.tau, r.x, r.v, r.u_bar].map(|v| v.to_string())).map_err(io)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}
