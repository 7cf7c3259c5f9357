//! Power-type smoothness of the `ℓ_p` norm on `ℝⁿ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optimize::nelder_mead_min;
use crate::vecops::norm_p;

/// `(‖u + h‖^p + ‖u − h‖^p − 2‖u‖^p)/‖h‖^p`.
pub fn midpoint_ratio(u: &[f64], h: &[f64], p: f64) -> f64 {
    let plus: Vec<f64> = u.iter().zip(h).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = u.iter().zip(h).map(|(a, b)| a - b).collect();
    let nh = norm_p(h, p);
    (norm_p(&plus, p).powf(p) + norm_p(&minus, p).powf(p) - 2.0 * norm_p(u, p).powf(p)) / nh.powf(p)
}

/// Sampled estimate (from below) of the smallest `C` with
/// `‖u + h‖^p + ‖u − h‖^p − 2‖u‖^p ≤ C‖h‖^p` on `(ℝⁿ, ‖·‖_p)`.
///
/// Pairs are drawn with Gaussian directions and a log-uniform ratio
/// `‖u‖/‖h‖ ∈ [1e-2, 1e2]`; the eight best samples are then polished by
/// Nelder–Mead. Deterministic in `seed`.
pub fn lp_smoothness_constant(p: f64, n: usize, samples: usize, seed: u64) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Domain(format!("p must lie in (1, 2], got {p}")));
    }
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| -> f64 {
        // Box–Muller
        let a: f64 = rng.gen_range(f64::EPSILON..1.0);
        let b: f64 = rng.gen();
        (-2.0 * a.ln()).sqrt() * (std::f64::consts::TAU * b).cos()
    };
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let keep = 8;
    for _ in 0..samples.max(1) {
        let mut u: Vec<f64> = (0..n).map(|_| gauss(&mut rng)).collect();
        let h: Vec<f64> = (0..n).map(|_| gauss(&mut rng)).collect();
        let ratio =
            10f64.powf(rng.gen_range(-2.0..2.0)) * norm_p(&h, p) / norm_p(&u, p).max(1e-300);
        u.iter_mut().for_each(|v| *v *= ratio);
        let r = midpoint_ratio(&u, &h, p);
        if !r.is_finite() {
            continue;
        }
        if best.len() < keep || r > best[best.len() - 1].0 {
            let mut x = u;
            x.extend(h);
            best.push((r, x));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(keep);
        }
    }
    let mut value = best.first().map_or(0.0, |b| b.0);
    for (_, x) in &best {
        let obj = |z: &[f64]| {
            let (u, h) = (&z[..n], &z[n..]);
            let q = norm_p(u, p) / norm_p(h, p);
            // outside the sampled ratio range cancellation dominates
            if !(1e-2..=1e2).contains(&q) {
                return 0.0;
            }
            let r = midpoint_ratio(u, h, p);
            if r.is_finite() {
                -r
            } else {
                0.0
            }
        };
        let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
        let (_, v) = nelder_mead_min(obj, x, 0.05 * scale, 400, 1e-15);
        value = value.max(-v);
    }
    Ok(value)
}
