//! First-order optimization on the Pareto set.
//!
//! Minimizes a scalar preference objective `f0` over the weakly Pareto optimal
//! set of a vector objective `F`. Pareto optimality is encoded through a
//! log-sum-exp smoothed merit function `v_{l,tau}` whose minimum value is
//! `-tau ln M`, and the resulting constrained program is solved with a penalty
//! method driven by a double loop of first-order updates.
//!
//! Module map:
//!
//! * [`problem`] and [`problems`]: problem definitions, feasible sets,
//!   preference rays and the bundled analytic test problems.
//! * [`merit`]: the smoothed merit function, its inner minimizer and gradient.
//! * [`penalty`]: the penalty objective `f0 + gamma * (v + tau ln M)^theta`.
//! * [`oracle`] and [`solver`]: update oracles and the double-loop solver.
//! * [`baselines`]: linear scalarization.
//! * [`metrics`]: hypervolume, Pareto stationarity and preference violation.

pub mod baselines;
pub mod error;
pub mod fd;
pub mod grid;
pub mod linalg;
pub mod merit;
pub mod metrics;
pub mod oracle;
pub mod penalty;
pub mod problem;
pub mod problems;
pub mod solver;
pub mod trace;

pub use error::{Error, Result};
pub use merit::{MeritConfig, MeritEval};
pub use oracle::{OracleKind, OracleState};
pub use penalty::PenaltyConfig;
pub use problem::{FeasibleSet, MOProblem, PreferenceSpec};
pub use solver::{InnerSchedule, SolverConfig};
pub use trace::{SolveStatus, SolveTrace, TraceRow};
