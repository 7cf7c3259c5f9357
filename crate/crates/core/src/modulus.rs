//! Moduli of continuity and their calculus.
//!
//! A modulus `ω` is concave, increasing, `ω(0) = 0` and unbounded. Every
//! modulus carries four evaluators:
//!
//! * `ω(t)` and its inverse `ω⁻¹(s)`,
//! * the primitive `φ(t) = ∫₀ᵗ ω`,
//! * the conjugate `φ*(s) = ∫₀ˢ ω⁻¹ = sup_t { st − φ(t) }`.
//!
//! Three kinds are supported: Hölder `t^α`, linear `a·t`, and tabulated
//! samples interpolated piecewise linearly through the origin and extended
//! beyond the last sample with the last slope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::golden_section_max;
use crate::report::{CheckReport, Condition};

/// The scalar profile used by envelope constructions: a modulus `ω` and its
/// primitive `φ`. Implemented by [`Modulus`] and by the truncated profile of
/// the Lipschitz variant.
pub trait Profile: Sync {
    fn omega(&self, t: f64) -> f64;
    fn phi(&self, t: f64) -> f64;
}

/// Serialized form of a modulus, as it appears in JSON configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModulusSpec {
    Holder { alpha: f64 },
    Linear { slope: f64 },
    Tabulated { samples: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Holder { alpha: f64 },
    Linear { slope: f64 },
    Tabulated(Table),
}

/// Piecewise-linear concave modulus through `(0, 0)` and the given knots.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    /// Knot abscissae, `t[0] = 0`.
    t: Vec<f64>,
    /// Knot values, `w[0] = 0`.
    w: Vec<f64>,
    /// Slope of segment `k` (between knots `k` and `k + 1`); the last entry is
    /// reused for extrapolation.
    slope: Vec<f64>,
    /// `φ(t[k])`.
    phi_at: Vec<f64>,
    /// `φ*(w[k])`.
    phi_star_at: Vec<f64>,
    samples: Vec<[f64; 2]>,
}

impl Table {
    fn new(samples: &[[f64; 2]]) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidModulus(msg));
        if samples.is_empty() {
            return bad("tabulated modulus needs at least one sample".into());
        }
        let mut t = vec![0.0];
        let mut w = vec![0.0];
        for (i, &[ti, wi]) in samples.iter().enumerate() {
            if !ti.is_finite() || !wi.is_finite() {
                return bad(format!("sample {i} is not finite"));
            }
            if i == 0 && ti == 0.0 {
                if wi != 0.0 {
                    return bad("modulus must vanish at 0".into());
                }
                continue;
            }
            t.push(ti);
            w.push(wi);
        }
        if t.len() < 2 {
            return bad("tabulated modulus needs a sample with t > 0".into());
        }
        let mut slope = Vec::with_capacity(t.len() - 1);
        for k in 0..t.len() - 1 {
            let dt = t[k + 1] - t[k];
            let dw = w[k + 1] - w[k];
            if dt <= 0.0 {
                return bad(format!(
                    "sample abscissae must increase (at t = {})",
                    t[k + 1]
                ));
            }
            if dw <= 0.0 {
                return bad(format!(
                    "modulus must be strictly increasing (at t = {})",
                    t[k + 1]
                ));
            }
            let s = dw / dt;
            if let Some(&prev) = slope.last() {
                if s > prev * (1.0 + 1e-12) {
                    return bad(format!("samples are not concave (at t = {})", t[k + 1]));
                }
            }
            slope.push(s);
        }
        let mut phi_at = vec![0.0];
        let mut phi_star_at = vec![0.0];
        for k in 0..t.len() - 1 {
            let dt = t[k + 1] - t[k];
            let dw = w[k + 1] - w[k];
            phi_at.push(phi_at[k] + 0.5 * (w[k] + w[k + 1]) * dt);
            phi_star_at.push(phi_star_at[k] + 0.5 * (t[k] + t[k + 1]) * dw);
        }
        Ok(Table {
            t,
            w,
            slope,
            phi_at,
            phi_star_at,
            samples: samples.to_vec(),
        })
    }

    fn segment(knots: &[f64], x: f64) -> usize {
        // last knot index with knots[k] <= x, capped to the last segment
        let k = knots.partition_point(|&v| v <= x);
        k.saturating_sub(1).min(knots.len() - 2)
    }

    fn omega(&self, t: f64) -> f64 {
        let k = Self::segment(&self.t, t);
        self.w[k] + self.slope[k] * (t - self.t[k])
    }

    fn omega_inv(&self, s: f64) -> f64 {
        let k = Self::segment(&self.w, s);
        self.t[k] + (s - self.w[k]) / self.slope[k]
    }

    fn phi(&self, t: f64) -> f64 {
        let k = Self::segment(&self.t, t);
        let d = t - self.t[k];
        self.phi_at[k] + self.w[k] * d + 0.5 * self.slope[k] * d * d
    }

    fn phi_star(&self, s: f64) -> f64 {
        let k = Self::segment(&self.w, s);
        let d = s - self.w[k];
        self.phi_star_at[k] + self.t[k] * d + 0.5 * d * d / self.slope[k]
    }
}

/// A validated modulus of continuity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulusSpec", into = "ModulusSpec")]
pub struct Modulus {
    kind: Kind,
}

impl TryFrom<ModulusSpec> for Modulus {
    type Error = Error;

    fn try_from(spec: ModulusSpec) -> Result<Self> {
        match spec {
            ModulusSpec::Holder { alpha } => Modulus::holder(alpha),
            ModulusSpec::Linear { slope } => Modulus::linear(slope),
            ModulusSpec::Tabulated { samples } => Modulus::tabulated(&samples),
        }
    }
}

impl From<Modulus> for ModulusSpec {
    fn from(m: Modulus) -> Self {
        match m.kind {
            Kind::Holder { alpha } => ModulusSpec::Holder { alpha },
            Kind::Linear { slope } => ModulusSpec::Linear { slope },
            Kind::Tabulated(table) => ModulusSpec::Tabulated {
                samples: table.samples,
            },
        }
    }
}

impl Modulus {
    /// `ω(t) = t^α`, `α ∈ (0, 1]`.
    pub fn holder(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidModulus(format!(
                "Hölder exponent must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Modulus {
            kind: Kind::Holder { alpha },
        })
    }

    /// `ω(t) = a·t`, `a > 0`.
    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::InvalidModulus(format!(
                "linear slope must be positive and finite, got {slope}"
            )));
        }
        Ok(Modulus {
            kind: Kind::Linear { slope },
        })
    }

    /// Piecewise-linear modulus through `(0, 0)` and `samples`. The samples
    /// must already be strictly increasing and concave.
    pub fn tabulated(samples: &[[f64; 2]]) -> Result<Self> {
        Ok(Modulus {
            kind: Kind::Tabulated(Table::new(samples)?),
        })
    }

    pub fn spec(&self) -> ModulusSpec {
        self.clone().into()
    }

    /// Hölder exponent, when the modulus is of Hölder kind.
    pub fn holder_exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::Holder { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, Kind::Linear { .. })
            || matches!(self.kind, Kind::Holder { alpha } if alpha == 1.0)
    }

    /// Slope `a` for moduli of the form `ω(t) = a·t`.
    pub fn linear_slope(&self) -> Option<f64> {
        match self.kind {
            Kind::Linear { slope } => Some(slope),
            Kind::Holder { alpha: 1.0 } => Some(1.0),
            _ => None,
        }
    }

    /// Comparison tolerance appropriate to the kind.
    pub fn default_tol(&self) -> f64 {
        match self.kind {
            Kind::Tabulated(_) => 1e-6,
            _ => 1e-8,
        }
    }

    pub fn omega(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.kind {
            Kind::Holder { alpha } => t.powf(*alpha),
            Kind::Linear { slope } => slope * t,
            Kind::Tabulated(table) => table.omega(t),
        }
    }

    pub fn omega_inv(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match &self.kind {
            Kind::Holder { alpha } => s.powf(1.0 / alpha),
            Kind::Linear { slope } => s / slope,
            Kind::Tabulated(table) => table.omega_inv(s),
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.kind {
            Kind::Holder { alpha } => t.powf(1.0 + alpha) / (1.0 + alpha),
            Kind::Linear { slope } => 0.5 * slope * t * t,
            Kind::Tabulated(table) => table.phi(t),
        }
    }

    pub fn phi_star(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        match &self.kind {
            Kind::Holder { alpha } => {
                let q = 1.0 + 1.0 / alpha;
                s.powf(q) / q
            }
            Kind::Linear { slope } => 0.5 * s * s / slope,
            Kind::Tabulated(table) => table.phi_star(s),
        }
    }
}

impl Profile for Modulus {
    fn omega(&self, t: f64) -> f64 {
        Modulus::omega(self, t)
    }

    fn phi(&self, t: f64) -> f64 {
        Modulus::phi(self, t)
    }
}

fn check_arg(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("{name} must be finite, got {x}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!(
            "{name} must be nonnegative, got {x}"
        )));
    }
    Ok(())
}

/// `φ(t) = ∫₀ᵗ ω`.
pub fn phi(m: &Modulus, t: f64) -> Result<f64> {
    check_arg("t", t)?;
    Ok(m.phi(t))
}

/// `φ*(s) = ∫₀ˢ ω⁻¹`.
pub fn phi_star(m: &Modulus, s: f64) -> Result<f64> {
    check_arg("s", s)?;
    Ok(m.phi_star(s))
}

/// Numeric Fenchel conjugate `sup_{t ∈ [0, t_max]} { st − f(t) }` of a convex
/// `f` on the half line (even extension assumed).
///
/// `f` is sampled at `samples + 1` equispaced points; the best sample is then
/// refined by golden-section search on its two neighbouring cells. Fails with
/// [`Error::RangeExceeded`] when the best sample is `t_max` itself.
pub fn fenchel_conjugate_numeric<F>(f: F, t_max: f64, samples: usize, s: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_arg("s", s)?;
    if !(t_max > 0.0 && t_max.is_finite()) || samples < 2 {
        return Err(Error::Domain(
            "need t_max > 0 and at least two samples".into(),
        ));
    }
    let h = t_max / samples as f64;
    let objective = |t: f64| s * t - f(t);
    let (mut best_k, mut best) = (0usize, objective(0.0));
    for k in 1..=samples {
        let v = objective(k as f64 * h);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    if best_k == samples {
        return Err(Error::RangeExceeded { t_max });
    }
    let lo = best_k.saturating_sub(1) as f64 * h;
    let hi = (best_k + 1) as f64 * h;
    let (_, refined) = golden_section_max(objective, lo, hi, 1e-14 * t_max.max(1.0), 200);
    Ok(best.max(refined))
}

/// Sampled check of the elementary relations between `ω`, `φ`, `ω⁻¹`, `φ*`:
///
/// * `(t/2) ω(t) ≤ φ(t) ≤ t ω(t/2)`,
/// * `t ω⁻¹(t/2) ≤ φ*(t) ≤ (t/2) ω⁻¹(t)`,
/// * `φ(t) + φ*(ω(t)) = t ω(t)`,
/// * `ω(ct) ≤ c ω(t)` for `c ∈ {1, 2, 5}`.
///
/// Slacks are divided by `max(1, |largest term|)` so that the tolerance is
/// relative for large arguments.
pub fn check_modulus_identities(m: &Modulus, t_samples: &[f64]) -> Result<CheckReport> {
    let tol = m.default_tol();
    let mut report = CheckReport::new(Condition::ModulusIdentities, 0.0, tol);
    let mut worst_by_check = [f64::INFINITY; 6];
    for &t in t_samples {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!(
                "sample t must be finite positive, got {t}"
            )));
        }
        let w = m.omega(t);
        let p = m.phi(t);
        let ps = m.phi_star(t);
        let rel = |lhs: f64, rhs: f64| (rhs - lhs) / lhs.abs().max(rhs.abs()).max(1.0);
        let mut slacks = [
            rel(0.5 * t * w, p),
            rel(p, t * m.omega(0.5 * t)),
            rel(t * m.omega_inv(0.5 * t), ps),
            rel(ps, 0.5 * t * m.omega_inv(t)),
            0.0,
            f64::INFINITY,
        ];
        let fy = p + m.phi_star(w);
        slacks[4] = -(fy - t * w).abs() / (t * w).abs().max(1.0);
        for c in [1.0, 2.0, 5.0] {
            slacks[5] = slacks[5].min(rel(m.omega(c * t), c * w));
        }
        for (i, s) in slacks.iter().enumerate() {
            worst_by_check[i] = worst_by_check[i].min(*s);
            report.observe(*s, || vec![vec![t]]);
        }
    }
    let names = [
        "lower_phi_bound",
        "upper_phi_bound",
        "lower_phi_star_bound",
        "upper_phi_star_bound",
        "fenchel_young_equality",
        "subadditivity",
    ];
    for (name, w) in names.iter().zip(worst_by_check) {
        report.detail(name, if w.is_finite() { w } else { 0.0 });
    }
    Ok(report.finish())
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn any_modulus() -> impl Strategy<Value = Modulus> {
        prop_oneof![
            (0.05f64..=1.0).prop_map(|a| Modulus::holder(a).unwrap()),
            (0.1f64..10.0).prop_map(|a| Modulus::linear(a).unwrap()),
            prop::collection::vec((0.01f64..2.0, 0.1f64..1.0), 1..6).prop_map(|steps| {
                // concave by construction: decreasing slopes
                let mut slopes: Vec<f64> = steps.iter().map(|s| s.1).collect();
                slopes.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let (mut t, mut w) = (0.0, 0.0);
                let samples: Vec<[f64; 2]> = steps
                    .iter()
                    .zip(slopes)
                    .map(|(st, sl)| {
                        t += st.0;
                        w += sl * st.0;
                        [t, w]
                    })
                    .collect();
                Modulus::tabulated(&samples).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn fenchel_young(m in any_modulus(), t in 0.0f64..20.0, s in 0.0f64..20.0) {
            let gap = m.phi(t) + m.phi_star(s) - s * t;
            prop_assert!(gap >= -1e-9 * (1.0 + s * t));
            let eq = m.phi(t) + m.phi_star(m.omega(t)) - t * m.omega(t);
            prop_assert!(eq.abs() <= 1e-9 * (1.0 + t * m.omega(t)));
        }

        #[test]
        fn inverse_round_trip(m in any_modulus(), s in 0.0f64..10.0) {
            prop_assert!((m.omega(m.omega_inv(s)) - s).abs() <= 1e-9 * (1.0 + s));
        }

        #[test]
        fn concave_and_convex(m in any_modulus(), a in 0.0f64..10.0, b in 0.0f64..10.0, l in 0.0f64..=1.0) {
            let mid = l * a + (1.0 - l) * b;
            prop_assert!(m.omega(mid) >= l * m.omega(a) + (1.0 - l) * m.omega(b) - 1e-9);
            prop_assert!(m.phi(mid) <= l * m.phi(a) + (1.0 - l) * m.phi(b) + 1e-9);
        }

        #[test]
        fn conjugate_scaling(m in any_modulus(), a in 0.2f64..5.0, s in 0.0f64..3.0) {
            // (a φ)*(s) = a φ*(s / a)
            let t_max = 4.0 * m.omega_inv(s / a).max(1.0);
            let numeric = fenchel_conjugate_numeric(|t| a * m.phi(t), t_max, 4000, s).unwrap();
            let closed = a * m.phi_star(s / a);
            prop_assert!((numeric - closed).abs() <= 1e-6 * (1.0 + closed));
        }
    }
}
