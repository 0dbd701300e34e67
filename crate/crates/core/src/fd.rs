//! Central finite differences for checking analytic gradients.

use crate::linalg;

/// Step used for central differences at `x`: `1e-6 * (1 + ||x||)`.
pub fn default_step(x: &[f64]) -> f64 {
    1e-6 * (1.0 + linalg::norm(x))
}

/// Central-difference gradient of a scalar function with step `h`.
pub fn gradient<F>(f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let plus = f(&probe);
            probe[i] = x[i] - h;
            let minus = f(&probe);
            probe[i] = x[i];
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Jacobian of a vector function; row `m` is the gradient
/// of component `m`.
pub fn jacobian<F>(f: F, x: &[f64], h: f64) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut probe = x.to_vec();
    let mut columns = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let plus = f(&probe);
        probe[i] = x[i] - h;
        let minus = f(&probe);
        probe[i] = x[i];
        columns.push(
            plus.iter()
                .zip(&minus)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    let rows = columns.first().map_or(0, Vec::len);
    (0..rows)
        .map(|m| columns.iter().map(|col| col[m]).collect())
        .collect()
}

/// `||a - b|| / max(||a||, ||b||, floor)`.
///
/// The floor keeps the ratio meaningful when both gradients are tiny.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = linalg::norm(a).max(linalg::norm(b)).max(floor);
    linalg::dist(a, b) / scale
}
