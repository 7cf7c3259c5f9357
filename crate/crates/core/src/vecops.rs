//! Dense vector helpers on slices.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `‖a‖_p` for `p ≥ 1`.
#[inline]
#[allow(dead_code)]
pub fn norm_p(a: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return norm(a);
    }
    a.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

#[inline]
#[allow(dead_code)]
pub fn dist_p(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return dist(a, b);
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}
