//! Uniform tensor grids used by the brute-force oracles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of grid nodes.
pub const MAX_GRID_POINTS: usize = 20_000_000;

/// Uniform grid over the box `[lower, upper]` with `points_per_dim` nodes per
/// axis (endpoints included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points_per_dim: usize,
    /// Declared Lipschitz bound of the objectives over the grid box. Used to
    /// turn grid resolution into a worst-case slack.
    pub lipschitz: Option<f64>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points_per_dim: usize) -> Result<Self> {
        let spec = Self { lower, upper, points_per_dim, lipschitz: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn interval(lower: f64, upper: f64, points: usize) -> Result<Self> {
        Self::new(vec![lower], vec![upper], points)
    }

    pub fn with_lipschitz(mut self, bound: f64) -> Self {
        self.lipschitz = Some(bound);
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::InvalidInput("grid bounds must be non-empty and equal length".into()));
        }
        if self.points_per_dim == 0 {
            return Err(Error::InvalidInput("grid is empty".into()));
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(Error::InvalidInput("grid bounds must be finite with lower <= upper".into()));
        }
        let total = (self.points_per_dim as f64).powi(self.dim() as i32);
        if total > MAX_GRID_POINTS as f64 {
            return Err(Error::InvalidInput(format!("grid has {total} nodes, limit {MAX_GRID_POINTS}")));
        }
        Ok(())
    }

    /// Largest per-axis node spacing.
    pub fn spacing(&self) -> f64 {
        if self.points_per_dim < 2 {
            return self
                .lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| u - l)
                .fold(0.0, f64::max);
        }
        let n = (self.points_per_dim - 1) as f64;
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l) / n)
            .fold(0.0, f64::max)
    }

    /// `spacing * sqrt(q) * lipschitz`: worst-case change of a Lipschitz
    /// function between any point of the box and its nearest node, with room
    /// to spare.
    pub fn slack(&self) -> Option<f64> {
        self.lipschitz
            .map(|lip| self.spacing() * (self.dim() as f64).sqrt() * lip)
    }

    pub fn axis(&self, d: usize) -> Vec<f64> {
        let n = self.points_per_dim;
        if n == 1 {
            return vec![0.5 * (self.lower[d] + self.upper[d])];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                self.lower[d] + t * (self.upper[d] - self.lower[d])
            })
            .collect()
    }

    /// All nodes in row-major order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|d| self.axis(d)).collect();
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_nodes() {
        let g = GridSpec::interval(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.nodes(), vec![vec![-1.0], vec![-0.5], vec![0.0], vec![0.5], vec![1.0]]);
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.slack(), None);
        assert_eq!(g.with_lipschitz(2.0).slack(), Some(1.0));
    }

    #[test]
    fn square_nodes() {
        let g = GridSpec::new(vec![0.0, 0.0], vec![1.0, 2.0], 3).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes.len(), 9);
        assert_eq!(nodes[1], vec![0.0, 1.0]);
        assert_eq!(g.spacing(), 1.0);
    }

    #[test]
    fn rejects_empty_and_inverted() {
        assert!(GridSpec::interval(0.0, 1.0, 0).is_err());
        assert!(GridSpec::interval(1.0, 0.0, 3).is_err());
        assert!(GridSpec::new(vec![], vec![], 3).is_err());
    }
}
