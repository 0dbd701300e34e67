//! Bundled analytic test problems.

use std::sync::Arc;

use crate::problem::{MOProblem, PreferenceSpec};

/// Two-objective exponential problem
/// `F(x) = (1 - exp(-||x - c||^2), 1 - exp(-||x + c||^2))` with `c = 1_q / sqrt(q)`.
///
/// The centre is normalized so that `||c|| = 1` for every `q`; for `q = 1`
/// this is `c = 1`. The Pareto set is the segment `{s c : s in [-1, 1]}` and
/// the front is the same concave curve for every dimension. Returned with the
/// preference ray `r = (4, 5)`, i.e. `H(x) = 5 f_1(x) - 4 f_2(x)`.
pub fn example1(q: usize) -> (MOProblem, PreferenceSpec) {
    assert!(q >= 1, "example1 needs q >= 1");
    let c = 1.0 / (q as f64).sqrt();

    let objectives = Arc::new(move |x: &[f64]| {
        let (dm, dp) = shifted_sq_norms(x, c);
        vec![1.0 - (-dm).exp(), 1.0 - (-dp).exp()]
    });
    let jacobian = Arc::new(move |x: &[f64]| {
        let (dm, dp) = shifted_sq_norms(x, c);
        let (em, ep) = ((-dm).exp(), (-dp).exp());
        vec![
            x.iter().map(|xi| 2.0 * em * (xi - c)).collect(),
            x.iter().map(|xi| 2.0 * ep * (xi + c)).collect(),
        ]
    });
    let problem = MOProblem::new(format!("example1_q{q}"), q, 2, objectives, jacobian)
        .expect("example1 dimensions are valid");
    let pref = PreferenceSpec::new(vec![4.0, 5.0]).expect("positive ray");
    (problem, pref)
}

fn shifted_sq_norms(x: &[f64], c: f64) -> (f64, f64) {
    x.iter().fold((0.0, 0.0), |(dm, dp), xi| {
        (dm + (xi - c) * (xi - c), dp + (xi + c) * (xi + c))
    })
}

/// Point on the Pareto set of [`example1`] with parameter `s in [-1, 1]`.
pub fn example1_pareto_point(q: usize, s: f64) -> Vec<f64> {
    vec![s / (q as f64).sqrt(); q]
}

/// One-dimensional problem
/// `F(x) = (((x + 1/2)^2 + 1/8)^(1/6), ((x - 1/2)^2 + 1/8)^(1/6))`.
///
/// Every `x in [-1/2, 1/2]` is Pareto optimal.
pub fn fig2() -> MOProblem {
    let base = |x: f64, shift: f64| (x + shift) * (x + shift) + 0.125;
    let objectives = Arc::new(move |x: &[f64]| {
        vec![base(x[0], 0.5).powf(1.0 / 6.0), base(x[0], -0.5).powf(1.0 / 6.0)]
    });
    let jacobian = Arc::new(move |x: &[f64]| {
        let d = |shift: f64| (x[0] + shift) / (3.0 * base(x[0], shift).powf(5.0 / 6.0));
        vec![vec![d(0.5)], vec![d(-0.5)]]
    });
    MOProblem::new("fig2", 1, 2, objectives, jacobian).expect("fig2 dimensions are valid")
}

/// Symmetric convex fixture `F(x) = ((x - 1)^2, (x + 1)^2)` on `R`.
///
/// Each objective is 2-strongly convex; the Pareto set is `[-1, 1]`.
pub fn quadratic_pair() -> MOProblem {
    let objectives =
        Arc::new(|x: &[f64]| vec![(x[0] - 1.0) * (x[0] - 1.0), (x[0] + 1.0) * (x[0] + 1.0)]);
    let jacobian = Arc::new(|x: &[f64]| vec![vec![2.0 * (x[0] - 1.0)], vec![2.0 * (x[0] + 1.0)]]);
    MOProblem::new("quadratic_pair", 1, 2, objectives, jacobian)
        .expect("quadratic_pair dimensions are valid")
}

/// Strongly convex two-dimensional problem
/// `F(x) = ((x_1 - 1)^2 + x_2^2, x_1^2 / 2 + x_2^2)` with preference ray `(8, 9)`,
/// i.e. `H(x) = 9 f_1 - 8 f_2`. The point `(3, 0)` satisfies `H = 0` but is not
/// Pareto stationary.
pub fn example2() -> (MOProblem, PreferenceSpec) {
    let objectives = Arc::new(|x: &[f64]| {
        vec![
            (x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1],
            0.5 * x[0] * x[0] + x[1] * x[1],
        ]
    });
    let jacobian = Arc::new(|x: &[f64]| {
        vec![vec![2.0 * (x[0] - 1.0), 2.0 * x[1]], vec![x[0], 2.0 * x[1]]]
    });
    let problem = MOProblem::new("example2", 2, 2, objectives, jacobian)
        .expect("example2 dimensions are valid");
    (problem, PreferenceSpec::new(vec![8.0, 9.0]).expect("positive ray"))
}
