//! Lower bounds for the extension from explicit members of the family
//! `h(z) = a + ⟨ξ, z⟩ − Σ λᵢ M φ(|z − pᵢ|)`, `λ` in the simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::jet::Jet;
use crate::modulus::Modulus;
use crate::optimize::nelder_mead_min;
use crate::vecops::{dist, dot};

use super::eval_g;

/// Search limits for [`family_f_lower_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyBudget {
    /// Largest number of knots `pᵢ` (at most 8).
    pub knots: usize,
    /// Nelder–Mead iterations per restart.
    pub iters: usize,
    /// Grid on which `h ≤ g` is enforced.
    pub constraint: GridSpec,
}

struct Members<'a> {
    m: &'a Modulus,
    big_m: f64,
    dim: usize,
    knots: usize,
    nodes: &'a [Vec<f64>],
    g: &'a [f64],
}

impl Members<'_> {
    /// Split `θ = (ξ, p₁…p_k, logits)`.
    fn parts<'t>(&self, theta: &'t [f64]) -> (&'t [f64], &'t [f64], Vec<f64>) {
        let n = self.dim;
        let k = self.knots;
        let xi = &theta[..n];
        let knots = &theta[n..n + k * n];
        let logits = &theta[n + k * n..];
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let s: f64 = w.iter().sum();
        (xi, knots, w.into_iter().map(|v| v / s).collect())
    }

    /// `h(z) − a`.
    fn shape(&self, xi: &[f64], knots: &[f64], lambda: &[f64], z: &[f64]) -> f64 {
        let n = self.dim;
        let mut v = dot(xi, z);
        for (i, l) in lambda.iter().enumerate() {
            v -= l * self.big_m * self.m.phi(dist(z, &knots[i * n..(i + 1) * n]));
        }
        v
    }

    /// Best value at `x` of the members with the given shape: `a` is as large
    /// as the constraint `h ≤ g` on the nodes allows.
    fn value(&self, theta: &[f64], x: &[f64]) -> f64 {
        let (xi, knots, lambda) = self.parts(theta);
        let a = self
            .nodes
            .iter()
            .zip(self.g)
            .map(|(z, gz)| gz - self.shape(xi, knots, &lambda, z))
            .fold(f64::INFINITY, f64::min);
        a + self.shape(xi, knots, &lambda, x)
    }
}

/// Largest value at `x` found for members `h` of the family with `h ≤ g` on
/// the constraint grid. The search starts from `ψ_y^−` for the point `y ∈ E`
/// whose cone is highest at `x`, and restarts with 1 to `budget.knots`
/// knots seeded at the points of `E` nearest to `x`.
pub fn family_f_lower_bound(
    jet: &Jet,
    m: &Modulus,
    big_m: f64,
    x: &[f64],
    budget: &FamilyBudget,
) -> Result<f64> {
    if budget.knots == 0 || budget.knots > 8 {
        return Err(Error::Domain("knot budget must be in 1..=8".into()));
    }
    if budget.constraint.dim() != jet.dim() || x.len() != jet.dim() {
        return Err(Error::InvalidGrid("dimension mismatch".into()));
    }
    let n = jet.dim();
    let spec = &budget.constraint;
    let nodes: Vec<Vec<f64>> = (0..spec.len()).map(|i| spec.coord_flat(i)).collect();
    let g: Vec<f64> = nodes.iter().map(|z| eval_g(jet, m, big_m, z)).collect();

    // E ordered by the value of its lower cone at x
    let cone = |i: usize| {
        let y = &jet.points()[i];
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        jet.values()[i] + dot(&jet.gradients()[i], &d) - big_m * m.phi(dist(x, y))
    };
    let mut order: Vec<usize> = (0..jet.len()).collect();
    order.sort_by(|&a, &b| cone(b).total_cmp(&cone(a)));

    let mut best = f64::NEG_INFINITY;
    for k in 1..=budget.knots.min(jet.len().max(1)) {
        let fam = Members {
            m,
            big_m,
            dim: n,
            knots: k,
            nodes: &nodes,
            g: &g,
        };
        let mut theta = jet.gradients()[order[0]].clone();
        for i in 0..k {
            theta.extend_from_slice(&jet.points()[order[i % order.len()]]);
        }
        theta.extend(std::iter::repeat_n(0.0, k));
        let start = fam.value(&theta, x);
        best = best.max(start);
        let step = 0.1 * spec.diameter() / (spec.len() as f64).powf(1.0 / n as f64);
        let (_, v) = nelder_mead_min(
            |t| -fam.value(t, x),
            &theta,
            step.max(1e-6),
            budget.iters,
            1e-14,
        );
        best = best.max(-v);
    }
    Ok(best)
}
