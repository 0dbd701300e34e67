//! Dense vector helpers on plain slices.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

/// `sum_m weights[m] * rows[m]`
pub fn weighted_rows(weights: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    debug_assert_eq!(weights.len(), rows.len());
    let dim = rows.first().map_or(0, Vec::len);
    let mut out = vec![0.0; dim];
    for (w, row) in weights.iter().zip(rows) {
        axpy(*w, row, &mut out);
    }
    out
}

pub fn is_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}
