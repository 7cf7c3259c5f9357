//! Exact evaluation of `conv(g + (M/2)|x|²) − (M/2)|x|²` for `ω(t) = t`.
//!
//! With `g_y(x) = f(y) + ⟨G(y), x − y⟩ + (M/2)|x − y|²` and
//! `a_y = G(y) − M y`, the convex envelope of `min_y (g_y + (M/2)|x|²)` is
//! reached by one point per piece, which gives
//!
//! `F(x) = min over λ in the simplex of Σ λ_y g_y(x) − (Σ λ_y |a_y|² − |Σ λ_y a_y|²)/(4M)`,
//!
//! a convex quadratic program in `λ` solved here by a primal active-set
//! method.

use nalgebra::{DMatrix, DVector};

use crate::jet::Jet;
use crate::vecops::dot;

/// Pointwise C^{1,1} extension of a jet with constant `M`.
#[derive(Debug, Clone)]
pub struct QuadraticEnvelope {
    jet: Jet,
    big_m: f64,
    a: Vec<Vec<f64>>,
}

impl QuadraticEnvelope {
    pub fn new(jet: &Jet, big_m: f64) -> Self {
        let a = jet
            .points()
            .iter()
            .zip(jet.gradients())
            .map(|(y, g)| g.iter().zip(y).map(|(gi, yi)| gi - big_m * yi).collect())
            .collect();
        QuadraticEnvelope {
            jet: jet.clone(),
            big_m,
            a,
        }
    }

    fn piece(&self, y: usize, x: &[f64]) -> f64 {
        let p = &self.jet.points()[y];
        let d: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
        self.jet.values()[y] + dot(&self.jet.gradients()[y], &d) + 0.5 * self.big_m * dot(&d, &d)
    }

    /// `F(x)`; equals `g(x)` when `M = 0`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let k = self.jet.len();
        let pieces: Vec<f64> = (0..k).map(|y| self.piece(y, x)).collect();
        let j0 = (0..k)
            .min_by(|&i, &j| pieces[i].total_cmp(&pieces[j]))
            .unwrap_or(0);
        if k < 2 || self.big_m.is_nan() || self.big_m <= 0.0 {
            return pieces[j0];
        }
        // centred at a_{j0}; the variance term does not depend on the centre
        let centred: Vec<Vec<f64>> = self
            .a
            .iter()
            .map(|ai| ai.iter().zip(&self.a[j0]).map(|(u, v)| u - v).collect())
            .collect();
        let four_m = 4.0 * self.big_m;
        let c: Vec<f64> = (0..k)
            .map(|y| pieces[y] - dot(&centred[y], &centred[y]) / four_m)
            .collect();
        let lambda = simplex_qp(&centred, &c, self.big_m);
        let dim = self.jet.dim();
        let mut w = vec![0.0; dim];
        let mut linear = 0.0;
        for &(i, l) in &lambda {
            linear += l * c[i];
            for (wk, ak) in w.iter_mut().zip(&centred[i]) {
                *wk += l * ak;
            }
        }
        (linear + dot(&w, &w) / four_m).min(pieces[j0])
    }
}

/// Minimize `⟨c, λ⟩ + |Σ λ_i a_i|²/(4M)` over the simplex. Returns the
/// support of the minimizer with its weights.
fn simplex_qp(a: &[Vec<f64>], c: &[f64], big_m: f64) -> Vec<(usize, f64)> {
    let k = c.len();
    let two_m = 2.0 * big_m;
    let q = |i: usize, j: usize| dot(&a[i], &a[j]) / two_m;
    let scale = (0..k).map(|i| q(i, i)).fold(1.0f64, f64::max);
    let ridge = 1e-13 * scale;
    let tol = 1e-14 * c.iter().fold(scale, |s, v| s.max(v.abs()));
    let start = (0..k)
        .min_by(|&i, &j| (c[i] + 0.5 * q(i, i)).total_cmp(&(c[j] + 0.5 * q(j, j))))
        .unwrap_or(0);
    let mut free = vec![start];
    let mut lam = vec![1.0];
    for _ in 0..50 + 20 * k {
        let r = free.len();
        let mut kkt = DMatrix::<f64>::zeros(r + 1, r + 1);
        let mut rhs = DVector::<f64>::zeros(r + 1);
        for (p, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                kkt[(p, s)] = q(i, j) + if p == s { ridge } else { 0.0 };
            }
            kkt[(p, r)] = -1.0;
            kkt[(r, p)] = 1.0;
            rhs[p] = -c[i];
        }
        rhs[r] = 1.0;
        let Some(sol) = kkt.lu().solve(&rhs) else {
            break;
        };
        let target: Vec<f64> = (0..r).map(|p| sol[p]).collect();
        if target.iter().all(|&t| t >= 0.0) {
            lam = target;
            let mu = sol[r];
            let mut w = vec![0.0; a.first().map_or(0, Vec::len)];
            for (p, &i) in free.iter().enumerate() {
                for (wk, ak) in w.iter_mut().zip(&a[i]) {
                    *wk += lam[p] * ak;
                }
            }
            let entering = (0..k)
                .filter(|i| !free.contains(i))
                .map(|i| (i, c[i] + dot(&a[i], &w) / two_m - mu))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            match entering {
                Some((i, price)) if price < -tol => {
                    free.push(i);
                    lam.push(0.0);
                }
                _ => break,
            }
        } else {
            // move towards the target until a weight hits zero
            let (mut step, mut leave) = (1.0, 0);
            for p in 0..r {
                if target[p] < 0.0 {
                    let s = lam[p] / (lam[p] - target[p]);
                    if s < step {
                        step = s;
                        leave = p;
                    }
                }
            }
            for p in 0..r {
                lam[p] += step * (target[p] - lam[p]);
            }
            free.remove(leave);
            lam.remove(leave);
        }
    }
    free.into_iter().zip(lam).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_in_one_dimension_match_the_hull() {
        // g = min of two parabolas; the envelope bridges them with curvature −M
        let jet = Jet::new(
            1,
            vec![vec![-1.0], vec![1.0]],
            vec![0.0, 0.0],
            vec![vec![1.0], vec![-1.0]],
        )
        .unwrap();
        let big_m = 1.0;
        let env = QuadraticEnvelope::new(&jet, big_m);
        let xs: Vec<f64> = (0..401).map(|i| -4.0 + 0.02 * i as f64).collect();
        let lifted: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let g =
                    ((x + 1.0) + 0.5 * (x + 1.0).powi(2)).min(-(x - 1.0) + 0.5 * (x - 1.0).powi(2));
                g + 0.5 * big_m * x * x
            })
            .collect();
        let hull = crate::envelope::lower_hull_values(&xs, &lifted);
        for (i, &x) in xs.iter().enumerate() {
            let oracle = hull[i] - 0.5 * big_m * x * x;
            assert!((env.value(&[x]) - oracle).abs() < 1e-3, "x = {x}");
        }
        // interpolates the jet
        assert!(env.value(&[-1.0]).abs() < 1e-12);
        assert!(env.value(&[1.0]).abs() < 1e-12);
    }

    #[test]
    fn between_m_and_g_and_exact_on_e() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.7, 0.8],
        ];
        let vals = vec![0.1, -0.3, 0.4, 0.0];
        let grads = vec![
            vec![1.0, -0.5],
            vec![0.2, 0.3],
            vec![-0.4, 0.9],
            vec![0.0, 0.0],
        ];
        let jet = Jet::new(2, pts.clone(), vals.clone(), grads).unwrap();
        let unit = crate::modulus::Modulus::linear(1.0).unwrap();
        let big_m = crate::jet::compute_a(&jet, &unit, &Default::default())
            .unwrap()
            .constant;
        let env = QuadraticEnvelope::new(&jet, big_m);
        for (p, v) in pts.iter().zip(&vals) {
            assert!((env.value(p) - v).abs() < 1e-9);
        }
        for i in 0..200 {
            let x = [-2.0 + 0.02 * i as f64, 1.5 - 0.017 * i as f64];
            let v = env.value(&x);
            let lo = crate::envelope::eval_m(&jet, &unit, big_m, &x);
            let hi = crate::envelope::eval_g(&jet, &unit, big_m, &x);
            assert!(v <= hi + 1e-12 && v >= lo - 1e-9, "{lo} {v} {hi}");
        }
    }
}
