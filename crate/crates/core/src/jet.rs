//! 1-jets on finite sets and the criteria for their `C^{1,ω}` extension.
//!
//! For a pair `(y, z)` of points of `E` write
//! `N_{yz}(x) = f(y) − f(z) + ⟨G(y), x − y⟩ − ⟨G(z), x − z⟩`.
//! The pair criteria compare `|N_{yz}|` with `φ(|x − y|) + φ(|x − z|)`.
//! `N_{yz}` depends on `x` only through `⟨G(y) − G(z), x⟩`, so projecting
//! `x` orthogonally onto the plane through `y` spanned by `z − y` and
//! `G(y) − G(z)` keeps the numerator and shrinks both distances. The inner
//! searches therefore run in at most two variables for every dimension.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::optimize::{golden_section_min, nelder_mead_min};
use crate::report::{CheckReport, Condition};
use crate::vecops::{dist, dot, norm, sub};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

/// Tolerance of checks evaluated in closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Tolerance of checks that involve an inner search.
pub const SEARCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JetData {
    dim: usize,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    gradients: Vec<Vec<f64>>,
}

/// A 1-jet `(f, G)` on a finite set `E ⊂ ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JetData")]
pub struct Jet {
    dim: usize,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    gradients: Vec<Vec<f64>>,
}

impl TryFrom<JetData> for Jet {
    type Error = Error;

    fn try_from(d: JetData) -> Result<Self> {
        Jet::new(d.dim, d.points, d.values, d.gradients)
    }
}

impl Jet {
    pub fn new(
        dim: usize,
        points: Vec<Vec<f64>>,
        values: Vec<f64>,
        gradients: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidJet(msg));
        if dim == 0 || dim > MAX_DIM {
            return bad(format!("dimension must be in 1..={MAX_DIM}, got {dim}"));
        }
        if points.is_empty() {
            return bad("jet needs at least one point".into());
        }
        if values.len() != points.len() || gradients.len() != points.len() {
            return bad(format!(
                "points, values and gradients differ in length ({}, {}, {})",
                points.len(),
                values.len(),
                gradients.len()
            ));
        }
        for (i, (p, g)) in points.iter().zip(&gradients).enumerate() {
            if p.len() != dim || g.len() != dim {
                return bad(format!("entry {i} does not have dimension {dim}"));
            }
            if !p.iter().chain(g).all(|v| v.is_finite()) || !values[i].is_finite() {
                return bad(format!("entry {i} is not finite"));
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                if dist(&points[i], &points[j]) <= 1e-12 {
                    return bad(format!("points {j} and {i} coincide"));
                }
            }
        }
        Ok(Jet {
            dim,
            points,
            values,
            gradients,
        })
    }

    /// Jet of the affine function `x ↦ c + ⟨v, x⟩` on `points`.
    pub fn affine(points: Vec<Vec<f64>>, v: &[f64], c: f64) -> Result<Self> {
        let dim = v.len();
        let values = points.iter().map(|p| c + dot(v, p)).collect();
        let gradients = vec![v.to_vec(); points.len()];
        Jet::new(dim, points, values, gradients)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidJet(e.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gradients(&self) -> &[Vec<f64>] {
        &self.gradients
    }

    /// The jet `(s f, s G)`.
    pub fn scaled(&self, s: f64) -> Jet {
        Jet {
            dim: self.dim,
            points: self.points.clone(),
            values: self.values.iter().map(|v| s * v).collect(),
            gradients: self
                .gradients
                .iter()
                .map(|g| g.iter().map(|c| s * c).collect())
                .collect(),
        }
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..i {
                d = d.max(dist(&self.points[i], &self.points[j]));
            }
        }
        d
    }

    /// Per-axis `[min, max]` of the points.
    pub fn bounding_box(&self) -> Vec<[f64; 2]> {
        (0..self.dim)
            .map(|k| {
                let it = self.points.iter().map(|p| p[k]);
                [
                    it.clone().fold(f64::INFINITY, f64::min),
                    it.fold(f64::NEG_INFINITY, f64::max),
                ]
            })
            .collect()
    }

    /// `‖f‖∞` on `E`.
    pub fn sup_f(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `‖G‖∞` on `E` (Euclidean length).
    pub fn sup_g(&self) -> f64 {
        self.gradients.iter().fold(0.0, |a, g| a.max(norm(g)))
    }

    /// Lipschitz constant of `f` on `E`.
    pub fn lip_f(&self) -> f64 {
        let mut l: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..i {
                let d = dist(&self.points[i], &self.points[j]);
                l = l.max((self.values[i] - self.values[j]).abs() / d);
            }
        }
        l
    }

    fn pair(&self, i: usize, j: usize) -> Pair {
        Pair::new(
            &self.points[i],
            &self.points[j],
            self.values[i],
            self.values[j],
            &self.gradients[i],
            &self.gradients[j],
        )
    }

    fn unordered_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect()
    }

    /// `n0 = f(y) − f(z) + ½⟨G(y) + G(z), z − y⟩` and `|G(y) − G(z)|`.
    fn pair_terms(&self, i: usize, j: usize) -> (f64, f64, f64) {
        let (y, z) = (&self.points[i], &self.points[j]);
        let (gy, gz) = (&self.gradients[i], &self.gradients[j]);
        let zy = sub(z, y);
        let gsum: Vec<f64> = gy.iter().zip(gz).map(|(a, b)| a + b).collect();
        let n0 = self.values[i] - self.values[j] + 0.5 * dot(&gsum, &zy);
        (n0, norm(&zy), dist(gy, gz))
    }
}

/// Controls for the planar inner searches of [`check_mg`] and [`compute_a`].
///
/// Each pair `(y, z)` at distance `d` is searched on a square of half-width
/// `max(4d, r)` centred at the midpoint, where `r` is a radius past which the
/// objective cannot improve, estimated from the data. If the best point lies
/// on the boundary the square is doubled up to `max_doublings` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    /// Fixed half-width overriding the adaptive choice.
    pub half_width: Option<f64>,
    /// Grid nodes per side for one-variable searches.
    pub grid_1d: usize,
    /// Grid nodes per side for two-variable searches.
    pub grid_2d: usize,
    /// Nelder–Mead iterations after the grid pass.
    pub refine_iters: usize,
    pub max_doublings: usize,
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox {
            half_width: None,
            grid_1d: 401,
            grid_2d: 101,
            refine_iters: 200,
            max_doublings: 6,
        }
    }
}

impl SearchBox {
    /// A cheaper protocol for large batches.
    pub fn coarse() -> Self {
        SearchBox {
            grid_1d: 201,
            grid_2d: 41,
            refine_iters: 120,
            ..SearchBox::default()
        }
    }
}

/// One pair in planar coordinates: `x = c + u e1 + v e2` with `c` the
/// midpoint, `e1 = (z − y)/d` and `G(y) − G(z) = a e1 + b e2`, `b ≥ 0`.
struct Pair {
    n0: f64,
    a: f64,
    b: f64,
    d: f64,
    dg: f64,
    c: Vec<f64>,
    e1: Vec<f64>,
    e2: Vec<f64>,
}

impl Pair {
    fn new(y: &[f64], z: &[f64], fy: f64, fz: f64, gy: &[f64], gz: &[f64]) -> Self {
        let zy = sub(z, y);
        let d = norm(&zy);
        let e1: Vec<f64> = zy.iter().map(|v| v / d).collect();
        let c: Vec<f64> = y.iter().zip(z).map(|(p, q)| 0.5 * (p + q)).collect();
        let dgv = sub(gy, gz);
        let dg = norm(&dgv);
        let gsum: Vec<f64> = gy.iter().zip(gz).map(|(p, q)| p + q).collect();
        let n0 = fy - fz + 0.5 * dot(&gsum, &zy);
        let a = dot(&dgv, &e1);
        let perp: Vec<f64> = dgv.iter().zip(&e1).map(|(g, e)| g - a * e).collect();
        let b = norm(&perp);
        let (b, e2) = if b > 1e-12 * dg.max(1e-300) && b > 0.0 {
            (b, perp.iter().map(|v| v / b).collect())
        } else {
            (0.0, vec![0.0; y.len()])
        };
        Pair {
            n0,
            a,
            b,
            d,
            dg,
            c,
            e1,
            e2,
        }
    }

    fn planar(&self) -> bool {
        self.b > 0.0
    }

    #[inline]
    fn numerator(&self, u: f64, v: f64) -> f64 {
        self.n0 + self.a * u + self.b * v
    }

    #[inline]
    fn radii(&self, u: f64, v: f64) -> (f64, f64) {
        let h = 0.5 * self.d;
        ((u + h).hypot(v), (u - h).hypot(v))
    }

    fn ambient(&self, u: f64, v: f64) -> Vec<f64> {
        self.c
            .iter()
            .zip(self.e1.iter().zip(&self.e2))
            .map(|(c, (e1, e2))| c + u * e1 + v * e2)
            .collect()
    }
}

struct Found {
    u: f64,
    v: f64,
    value: f64,
    at_boundary: bool,
}

/// Minimize `obj(u, v)` for one pair. Candidate points `y`, `z` and the
/// midpoint are always evaluated.
fn minimize_pair<F>(pair: &Pair, obj: F, half_width: f64, search: &SearchBox) -> Found
where
    F: Fn(f64, f64) -> f64,
{
    let mut b = search.half_width.unwrap_or(half_width);
    let h = 0.5 * pair.d;
    let mut best = Found {
        u: 0.0,
        v: 0.0,
        value: obj(0.0, 0.0),
        at_boundary: false,
    };
    for u in [-h, h] {
        let value = obj(u, 0.0);
        if value < best.value {
            best = Found {
                u,
                v: 0.0,
                value,
                at_boundary: false,
            };
        }
    }
    let doublings = if search.half_width.is_some() {
        0
    } else {
        search.max_doublings
    };
    for round in 0..=doublings {
        let found = if pair.planar() {
            search_2d(&obj, b, search)
        } else {
            search_1d(&obj, b, search)
        };
        if found.value < best.value {
            best = Found {
                at_boundary: found.at_boundary,
                ..found
            };
        }
        if !found.at_boundary || found.value > best.value {
            best.at_boundary = false;
            break;
        }
        if round < doublings {
            b *= 2.0;
        }
    }
    best
}

fn search_1d<F: Fn(f64, f64) -> f64>(obj: &F, b: f64, search: &SearchBox) -> Found {
    let n = search.grid_1d.max(3);
    let step = 2.0 * b / (n - 1) as f64;
    let (mut k_best, mut v_best) = (0, f64::INFINITY);
    for k in 0..n {
        let v = obj(-b + k as f64 * step, 0.0);
        if v < v_best {
            v_best = v;
            k_best = k;
        }
    }
    let lo = -b + k_best.saturating_sub(1) as f64 * step;
    let hi = -b + (k_best + 1).min(n - 1) as f64 * step;
    let (u, value) = golden_section_min(|u| obj(u, 0.0), lo, hi, 1e-13 * b, 100);
    let (u, value) = if value < v_best {
        (u, value)
    } else {
        (-b + k_best as f64 * step, v_best)
    };
    Found {
        u,
        v: 0.0,
        value,
        at_boundary: u.abs() >= b - 1.5 * step,
    }
}

fn search_2d<F: Fn(f64, f64) -> f64>(obj: &F, b: f64, search: &SearchBox) -> Found {
    let n = search.grid_2d.max(3);
    let step = 2.0 * b / (n - 1) as f64;
    let (mut best_uv, mut v_best) = ((0.0, 0.0), f64::INFINITY);
    for i in 0..n {
        let u = -b + i as f64 * step;
        for j in 0..n {
            let v = -b + j as f64 * step;
            let val = obj(u, v);
            if val < v_best {
                v_best = val;
                best_uv = (u, v);
            }
        }
    }
    let scale = v_best.abs().max(1e-300);
    let (x, value) = nelder_mead_min(
        |p| obj(p[0], p[1]),
        &[best_uv.0, best_uv.1],
        0.5 * step,
        search.refine_iters,
        1e-15 * scale,
    );
    let (u, v, value) = if value < v_best {
        (x[0], x[1], value)
    } else {
        (best_uv.0, best_uv.1, v_best)
    };
    Found {
        u,
        v,
        value,
        at_boundary: u.abs().max(v.abs()) >= b - 1.5 * step,
    }
}

/// Radius beyond which `|N| − K(φ(r₁) + φ(r₂))` only decreases: `N` grows at
/// rate `|ΔG|` and the penalty at rate `2Kω(r − d/2)`.
fn escape_radius(m: &Modulus, pair: &Pair, k: f64) -> f64 {
    let base = 4.0 * pair.d;
    if pair.dg == 0.0 || k <= 0.0 {
        return base;
    }
    base.max(2.0 * m.omega_inv(pair.dg / k) + pair.d)
}

/// `(W^{1,ω})` with constant `M`: for every ordered pair,
/// `f(y) + ½⟨G(y) + G(z), z − y⟩ + Mφ(|y − z|) − 2Mφ*(|G(y) − G(z)|/(2M)) − f(z) ≥ 0`.
pub fn check_w(jet: &Jet, m: &Modulus, big_m: f64) -> Result<CheckReport> {
    positive_constant(big_m)?;
    let tol = CLOSED_FORM_TOL.max(m.default_tol() * 0.1);
    let mut report = CheckReport::new(Condition::W, big_m, tol);
    closed_form_pairs(jet, &mut report, |d, dg| {
        big_m * m.phi(d) - 2.0 * big_m * m.phi_star(dg / (2.0 * big_m))
    });
    Ok(report.finish())
}

/// Wells' condition for `ω(t) = t`: for every ordered pair,
/// `f(y) + ½⟨G(y) + G(z), z − y⟩ + (M/4)|y − z|² − |G(y) − G(z)|²/(4M) − f(z) ≥ 0`.
pub fn check_wells_w11(jet: &Jet, big_m: f64) -> Result<CheckReport> {
    positive_constant(big_m)?;
    let mut report = CheckReport::new(Condition::W11, big_m, CLOSED_FORM_TOL);
    closed_form_pairs(jet, &mut report, |d, dg| {
        0.25 * big_m * d * d - 0.25 * dg * dg / big_m
    });
    Ok(report.finish())
}

fn closed_form_pairs(jet: &Jet, report: &mut CheckReport, penalty: impl Fn(f64, f64) -> f64) {
    if jet.len() == 1 {
        report.observe(0.0, || vec![jet.points[0].clone(); 2]);
    }
    for i in 0..jet.len() {
        for j in i + 1..jet.len() {
            let (n0, d, dg) = jet.pair_terms(i, j);
            let p = penalty(d, dg);
            // ordered (y, z) = (i, j) gives n0 + p, the reverse −n0 + p
            let (slack, y, z) = if n0 >= 0.0 {
                (p - n0, j, i)
            } else {
                (p + n0, i, j)
            };
            report.observe(slack, || vec![jet.points[y].clone(), jet.points[z].clone()]);
        }
    }
}

fn positive_constant(big_m: f64) -> Result<()> {
    if big_m > 0.0 && big_m.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "constant M must be positive and finite, got {big_m}"
        )))
    }
}

struct PairMin {
    slack: f64,
    witness: Vec<Vec<f64>>,
    boundary: bool,
}

/// Minimum over `x` of `V = ±N + M(φ(|x − y|) + φ(|x − z|))` for both
/// orientations of the pair `(i, j)`.
fn mg_pair(jet: &Jet, m: &Modulus, big_m: f64, i: usize, j: usize, search: &SearchBox) -> PairMin {
    let pair = jet.pair(i, j);
    let radius = escape_radius(m, &pair, big_m);
    let mut out = PairMin {
        slack: f64::INFINITY,
        witness: Vec::new(),
        boundary: false,
    };
    for sign in [1.0, -1.0] {
        let obj = |u: f64, v: f64| {
            let (r1, r2) = pair.radii(u, v);
            sign * pair.numerator(u, v) + big_m * (m.phi(r1) + m.phi(r2))
        };
        let found = minimize_pair(&pair, obj, radius, search);
        if found.value < out.slack {
            let (y, z) = if sign > 0.0 { (i, j) } else { (j, i) };
            out.slack = found.value;
            out.boundary = found.at_boundary;
            out.witness = vec![
                pair.ambient(found.u, found.v),
                jet.points[y].clone(),
                jet.points[z].clone(),
            ];
        }
    }
    out
}

/// `(mg^{1,ω})` with constant `M`: for every ordered pair the minimum over
/// `x` of `f(y) − f(z) + ⟨G(y), x − y⟩ − ⟨G(z), x − z⟩ + Mφ(|x − y|) + Mφ(|x − z|)`
/// is nonnegative. The minimum is searched on the plane described in the
/// module docs.
pub fn check_mg(jet: &Jet, m: &Modulus, big_m: f64, search: &SearchBox) -> Result<CheckReport> {
    positive_constant(big_m)?;
    let mut report = CheckReport::new(Condition::Mg, big_m, SEARCH_TOL);
    if jet.len() == 1 {
        report.observe(0.0, || vec![jet.points[0].clone(); 3]);
    }
    let results: Vec<PairMin> = jet
        .unordered_pairs()
        .into_par_iter()
        .map(|(i, j)| mg_pair(jet, m, big_m, i, j, search))
        .collect();
    for r in results {
        if r.boundary {
            report.warn("search box too small: minimizer on the boundary");
        }
        report.observe(r.slack, || r.witness.clone());
    }
    Ok(report.finish())
}

/// Whether `(mg^{1,ω})` holds with constant `M`; stops at the first failing
/// pair. Cheap candidates are tried before the full search.
pub fn mg_passes(jet: &Jet, m: &Modulus, big_m: f64, search: &SearchBox) -> bool {
    let pairs = jet.unordered_pairs();
    let quick_fail = pairs.iter().any(|&(i, j)| {
        let pair = jet.pair(i, j);
        let h = 0.5 * pair.d;
        [(-h, 0.0), (0.0, 0.0), (h, 0.0)].iter().any(|&(u, v)| {
            let (r1, r2) = pair.radii(u, v);
            big_m * (m.phi(r1) + m.phi(r2)) - pair.numerator(u, v).abs() < -SEARCH_TOL
        })
    });
    if quick_fail {
        return false;
    }
    pairs
        .into_par_iter()
        .all(|(i, j)| mg_pair(jet, m, big_m, i, j, search).slack >= -SEARCH_TOL)
}

struct PairSup {
    ratio: f64,
    witness: Vec<Vec<f64>>,
    boundary: bool,
}

fn ratio_pair(jet: &Jet, m: &Modulus, i: usize, j: usize, search: &SearchBox) -> PairSup {
    let pair = jet.pair(i, j);
    let ratio = |u: f64, v: f64| {
        let (r1, r2) = pair.radii(u, v);
        pair.numerator(u, v).abs() / (m.phi(r1) + m.phi(r2))
    };
    // a lower bound on the pair's ratio fixes the radius past which the
    // ratio stays below it
    let h = 0.5 * pair.d;
    let mut lower = ratio(-h, 0.0).max(ratio(h, 0.0)).max(ratio(0.0, 0.0));
    if pair.dg > 0.0 {
        lower = lower.max(pair.dg / (3.0 * m.omega(pair.d)));
    }
    let radius = if lower > 0.0 {
        escape_radius(m, &pair, lower)
    } else {
        4.0 * pair.d
    };
    let found = minimize_pair(&pair, |u, v| -ratio(u, v), radius, search);
    PairSup {
        ratio: -found.value,
        witness: vec![
            pair.ambient(found.u, found.v),
            jet.points[i].clone(),
            jet.points[j].clone(),
        ],
        boundary: found.at_boundary,
    }
}

/// The functional
/// `A(f, G) = sup |f(y) + ⟨G(y), x − y⟩ − f(z) − ⟨G(z), x − z⟩| / (φ(|x − y|) + φ(|x − z|))`
/// over pairs `y ≠ z` of `E` and all `x`. Reported as the report's
/// `constant`; the witness is `(x, y, z)`.
pub fn compute_a(jet: &Jet, m: &Modulus, search: &SearchBox) -> Result<CheckReport> {
    let mut report = CheckReport::new(Condition::AValue, 0.0, SEARCH_TOL);
    let results: Vec<PairSup> = jet
        .unordered_pairs()
        .into_par_iter()
        .map(|(i, j)| ratio_pair(jet, m, i, j, search))
        .collect();
    let mut best: Option<PairSup> = None;
    for r in results {
        if r.boundary {
            report.warn("search box too small: maximizer on the boundary");
        }
        if best.as_ref().is_none_or(|b| r.ratio > b.ratio) {
            best = Some(r);
        }
    }
    if let Some(b) = best {
        report.constant = b.ratio;
        report.witness = b.witness;
    }
    report.worst_slack = 0.0;
    Ok(report.finish())
}

/// `M_ω(G) = max |G(y) − G(z)| / ω(|y − z|)` over pairs of distinct points.
pub fn m_omega_g(jet: &Jet, m: &Modulus) -> Result<CheckReport> {
    let mut report = CheckReport::new(Condition::MOmegaG, 0.0, CLOSED_FORM_TOL);
    for i in 0..jet.len() {
        for j in i + 1..jet.len() {
            let (_, d, dg) = jet.pair_terms(i, j);
            let r = dg / m.omega(d);
            if r > report.constant || report.witness.is_empty() {
                report.constant = r;
                report.witness = vec![jet.points[i].clone(), jet.points[j].clone()];
            }
        }
    }
    report.worst_slack = 0.0;
    Ok(report.finish())
}

/// Lower end of the bisection bracket for the smallest constants.
pub const BISECTION_LO: f64 = 1e-8;
/// Upper end of the bisection bracket.
pub const BISECTION_HI: f64 = 1e8;

/// Smallest `M ∈ [1e-8, 1e8]` with `passes(M)`, assuming monotonicity in
/// `M`: 30 halvings of the bracket in log scale. Returns `Some(0.0)` if the
/// lower end passes and `None` if the upper end fails.
pub fn smallest_constant(mut passes: impl FnMut(f64) -> Result<bool>) -> Result<Option<f64>> {
    if passes(BISECTION_LO)? {
        return Ok(Some(0.0));
    }
    if !passes(BISECTION_HI)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (BISECTION_LO.ln(), BISECTION_HI.ln());
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if passes(mid.exp())? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi.exp()))
}

/// Smallest constant for `(W^{1,ω})`.
pub fn threshold_w(jet: &Jet, m: &Modulus) -> Result<Option<f64>> {
    smallest_constant(|mm| Ok(check_w(jet, m, mm)?.passed))
}

/// Smallest constant for `(mg^{1,ω})`.
pub fn threshold_mg(jet: &Jet, m: &Modulus, search: &SearchBox) -> Result<Option<f64>> {
    smallest_constant(|mm| Ok(mg_passes(jet, m, mm, search)))
}

/// Smallest constant for Wells' condition.
pub fn threshold_w11(jet: &Jet) -> Result<Option<f64>> {
    smallest_constant(|mm| Ok(check_wells_w11(jet, mm)?.passed))
}

/// Cross-checks between the two conditions and `M_ω(G)`.
///
/// With `M_W`, `M_mg` the smallest constants found by bisection:
///
/// * `(mg)` holds with `4 M_W`, i.e. `M_mg ≤ 4 M_W`;
/// * `(W)` holds with `M_mg` (Euclidean norm), i.e. `M_W ≤ M_mg`;
/// * `|G(y) − G(z)| ≤ M_mg·min{(8/√15) ω(d), (4/√3) ω(d/2), 3 ω(d)}` for
///   every pair, and for `ω(t) = t^α` also
///   `M_ω(G) ≤ (2^{1−α}/√(1+α))(1+1/α)^{α/2} M_mg`;
/// * `M_ω(G) ≤ 4 M_W`.
///
/// Slacks are relative, `(bound − value)/max(bound, value)`, and the report
/// passes when every slack is at least `−1e-3`.
pub fn check_equivalences(jet: &Jet, m: &Modulus, search: &SearchBox) -> Result<CheckReport> {
    let mut report = CheckReport::new(Condition::Equivalences, 0.0, 1e-3);
    let no_constant = || Error::NotExtendable("no finite constant in [1e-8, 1e8]".into());
    let m_w = threshold_w(jet, m)?.ok_or_else(no_constant)?;
    let m_mg = threshold_mg(jet, m, search)?.ok_or_else(no_constant)?;
    let mog = m_omega_g(jet, m)?;
    report.constant = m_mg;
    report.detail("M_W", m_w);
    report.detail("M_mg", m_mg);
    report.detail("M_omega_G", mog.constant);

    let rel = |bound: f64, value: f64| {
        let scale = bound.abs().max(value.abs());
        if scale == 0.0 {
            0.0
        } else {
            (bound - value) / scale
        }
    };
    let s1 = rel(4.0 * m_w, m_mg);
    let s2 = rel(m_mg, m_w);
    let s4 = rel(4.0 * m_w, mog.constant);
    let c8 = 8.0 / 15f64.sqrt();
    let c4 = 4.0 / 3f64.sqrt();
    let mut s3 = f64::INFINITY;
    let mut s3_witness = Vec::new();
    for i in 0..jet.len() {
        for j in i + 1..jet.len() {
            let (_, d, dg) = jet.pair_terms(i, j);
            let bound = m_mg
                * (c8 * m.omega(d))
                    .min(c4 * m.omega(0.5 * d))
                    .min(3.0 * m.omega(d));
            let s = rel(bound, dg);
            if s < s3 {
                s3 = s;
                s3_witness = vec![jet.points[i].clone(), jet.points[j].clone()];
            }
        }
    }
    if let Some(alpha) = m.holder_exponent() {
        let factor = holder_gradient_factor(alpha);
        let s = rel(factor * m_mg, mog.constant);
        if s < s3 {
            s3 = s;
            s3_witness = mog.witness.clone();
        }
    }
    let s3 = if s3.is_finite() { s3 } else { 0.0 };
    report.detail("mg_from_W", s1);
    report.detail("W_from_mg", s2);
    report.detail("gradient_from_mg", s3);
    report.detail("gradient_from_W", s4);
    report.observe(s1, || mog.witness.clone());
    report.observe(s2, || mog.witness.clone());
    report.observe(s3, || s3_witness.clone());
    report.observe(s4, || mog.witness.clone());
    Ok(report.finish())
}

/// `(2^{1−α}/√(1+α))(1+1/α)^{α/2}`, the Hölder sharpening of the gradient
/// bound; equals 1 at `α = 1`.
pub fn holder_gradient_factor(alpha: f64) -> f64 {
    2f64.powf(1.0 - alpha) / (1.0 + alpha).sqrt() * (1.0 + 1.0 / alpha).powf(0.5 * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn holder_half_jet(points: &[f64]) -> Jet {
        let pts = points.iter().map(|&x| vec![x]).collect();
        let vals = points
            .iter()
            .map(|&x| 2.0 / 3.0 * x.abs().powf(1.5))
            .collect();
        let grads = points
            .iter()
            .map(|&x| vec![x.signum() * x.abs().sqrt()])
            .collect();
        Jet::new(1, pts, vals, grads).unwrap()
    }

    fn jet1(points: &[f64], values: &[f64], grads: &[f64]) -> Jet {
        Jet::new(
            1,
            points.iter().map(|&x| vec![x]).collect(),
            values.to_vec(),
            grads.iter().map(|&g| vec![g]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_malformed_jets() {
        assert!(Jet::new(1, vec![], vec![], vec![]).is_err());
        assert!(Jet::new(5, vec![vec![0.0; 5]], vec![0.0], vec![vec![0.0; 5]]).is_err());
        assert!(Jet::new(1, vec![vec![0.0]], vec![0.0, 1.0], vec![vec![0.0]]).is_err());
        assert!(Jet::new(2, vec![vec![0.0]], vec![0.0], vec![vec![0.0, 0.0]]).is_err());
        assert!(jet_err(&[0.0, 1e-13]));
        assert!(Jet::new(1, vec![vec![f64::NAN]], vec![0.0], vec![vec![0.0]]).is_err());
        assert!(
            Jet::from_json(r#"{"dim":1,"points":[[0]],"values":[1],"gradients":[[0]]}"#).is_ok()
        );
        assert!(
            Jet::from_json(r#"{"dim":2,"points":[[0]],"values":[1],"gradients":[[0]]}"#).is_err()
        );
    }

    fn jet_err(xs: &[f64]) -> bool {
        Jet::new(
            1,
            xs.iter().map(|&x| vec![x]).collect(),
            vec![0.0; xs.len()],
            vec![vec![0.0]; xs.len()],
        )
        .is_err()
    }

    #[test]
    fn single_point_passes_everything() {
        let m = Modulus::holder(0.5).unwrap();
        let jet = jet1(&[0.3], &[2.0], &[-1.0]);
        let w = check_w(&jet, &m, 1.0).unwrap();
        assert!(w.passed);
        assert_eq!(w.worst_slack, 0.0);
        assert!(
            check_mg(&jet, &m, 1.0, &SearchBox::default())
                .unwrap()
                .passed
        );
        assert!(check_wells_w11(&jet, 1.0).unwrap().passed);
        assert_eq!(
            compute_a(&jet, &m, &SearchBox::default()).unwrap().constant,
            0.0
        );
    }

    #[test]
    fn affine_jets() {
        let m = Modulus::holder(0.5).unwrap();
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.5, 2.0]];
        let jet = Jet::affine(pts, &[0.7, -1.2], 0.4).unwrap();
        // slack of the pair equals Mφ(|y − z|)
        let w = check_w(&jet, &m, 2.0).unwrap();
        assert!(w.passed);
        let min_pair = 2.0 * m.phi(dist(&[0.0, 0.0], &[1.0, 0.5]));
        let slacks: Vec<f64> = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * m.phi(dist(&jet.points[i], &jet.points[j])))
            .collect();
        assert!(slacks.iter().any(|s| (s - min_pair).abs() < 1e-15));
        assert!(
            check_mg(&jet, &m, 1.0, &SearchBox::default())
                .unwrap()
                .passed
        );
        assert!(compute_a(&jet, &m, &SearchBox::default()).unwrap().constant < 1e-12);
        let eq = check_equivalences(&jet, &m, &SearchBox::coarse()).unwrap();
        assert!(eq.passed);
        assert_eq!(eq.detail_value("M_W"), Some(0.0));
        assert_eq!(eq.detail_value("M_mg"), Some(0.0));
    }

    #[test]
    fn w_example_holder_half() {
        let m = Modulus::holder(0.5).unwrap();
        let jet = holder_half_jet(&[-1.0, 1.0]);
        // by hand: n0 = 0 + ½(−1 + 1)·2 = 0, |ΔG| = 2, φ(2) = 2^{3/2}/1.5,
        // φ*(s) = s³/3
        let mm = 1.5;
        let expected = mm * 2f64.powf(1.5) / 1.5 - 2.0 * mm * (2.0 / (2.0 * mm)).powi(3) / 3.0;
        let r = check_w(&jet, &m, mm).unwrap();
        assert!(r.passed);
        assert!((r.worst_slack - expected).abs() < 1e-12);
    }

    #[test]
    fn wells_examples() {
        let r = check_wells_w11(&jet1(&[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]), 1.0).unwrap();
        assert!(r.passed);
        assert!((r.worst_slack - 0.25).abs() < 1e-15);
        let r = check_wells_w11(&jet1(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 0.0]), 1.0).unwrap();
        assert!(!r.passed);
        assert!((r.worst_slack + 0.75).abs() < 1e-15);
        assert_eq!(r.witness, vec![vec![0.0], vec![1.0]]);
        let lin = Modulus::linear(1.0).unwrap();
        assert!(
            !check_mg(
                &jet1(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 0.0]),
                &lin,
                1.0,
                &SearchBox::default()
            )
            .unwrap()
            .passed
        );
    }

    /// Dense sweep over `x ∈ [−B, B]` for a two-point 1-D jet.
    fn brute_force_ratio(jet: &Jet, m: &Modulus, b: f64, n: usize) -> f64 {
        let (y, z) = (jet.points[0][0], jet.points[1][0]);
        let (fy, fz) = (jet.values[0], jet.values[1]);
        let (gy, gz) = (jet.gradients[0][0], jet.gradients[1][0]);
        (0..=n)
            .map(|k| {
                let x = -b + 2.0 * b * k as f64 / n as f64;
                let num = fy + gy * (x - y) - fz - gz * (x - z);
                num.abs() / (m.phi((x - y).abs()) + m.phi((x - z).abs()))
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_point_a_matches_sweep() {
        let m = Modulus::holder(0.5).unwrap();
        for (p, v, g) in [
            ([-0.3, 0.8], [0.2, -0.4], [1.0, -0.5]),
            ([0.0, 1.0], [0.0, 1.0], [0.0, 0.0]),
            ([-1.0, 1.0], [0.0, 0.0], [-2.0, 2.0]),
        ] {
            let jet = jet1(&p, &v, &g);
            let a = compute_a(&jet, &m, &SearchBox::default()).unwrap().constant;
            let oracle = brute_force_ratio(&jet, &m, 40.0, 1_000_000);
            assert!(
                (a - oracle).abs() < 1e-4 * oracle.max(1.0),
                "{a} vs {oracle}"
            );
        }
    }

    #[test]
    fn m_omega_g_examples() {
        let m = Modulus::linear(1.0).unwrap();
        let jet = Jet::new(
            2,
            vec![vec![0.0, 0.0], vec![4.0, 0.0]],
            vec![0.0, 0.0],
            vec![vec![0.0, 0.0], vec![0.0, 3.0]],
        )
        .unwrap();
        assert_eq!(m_omega_g(&jet, &m).unwrap().constant, 0.75);
        let flat = jet1(&[0.0, 1.0, 2.0], &[0.0, 1.0, 5.0], &[1.0, 1.0, 1.0]);
        assert_eq!(m_omega_g(&flat, &m).unwrap().constant, 0.0);
    }

    #[test]
    fn m_omega_g_holder_half_sample() {
        let m = Modulus::holder(0.5).unwrap();
        let xs: Vec<f64> = (0..=40).map(|k| -1.0 + k as f64 * 0.05).collect();
        let jet = holder_half_jet(&xs);
        let r = m_omega_g(&jet, &m).unwrap();
        assert!((r.constant - 2f64.sqrt()).abs() < 1e-6, "{}", r.constant);
    }

    #[test]
    fn mg_threshold_is_a() {
        let m = Modulus::holder(0.5).unwrap();
        let jet = jet1(&[-0.3, 0.8, 1.5], &[0.2, -0.4, 0.1], &[1.0, -0.5, 0.7]);
        let search = SearchBox::default();
        let a = compute_a(&jet, &m, &search).unwrap().constant;
        let t = threshold_mg(&jet, &m, &search).unwrap().unwrap();
        assert!((t - a).abs() <= 1e-5 * a, "{t} vs {a}");
    }

    #[test]
    fn planar_a_matches_ambient_sweep() {
        // 2-D jet: the planar search must reach the best value of a dense
        // ambient grid search
        let m = Modulus::holder(0.5).unwrap();
        let jet = Jet::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.3]],
            vec![0.1, -0.2],
            vec![vec![0.5, -0.4], vec![-0.3, 0.6]],
        )
        .unwrap();
        let a = compute_a(&jet, &m, &SearchBox::default()).unwrap().constant;
        let mut best: f64 = 0.0;
        let n = 1200;
        for i in 0..=n {
            for j in 0..=n {
                let x = [
                    -3.0 + 6.0 * i as f64 / n as f64,
                    -3.0 + 6.0 * j as f64 / n as f64,
                ];
                let num = jet.values[0] + dot(&jet.gradients[0], &sub(&x, &jet.points[0]))
                    - jet.values[1]
                    - dot(&jet.gradients[1], &sub(&x, &jet.points[1]));
                let den = m.phi(dist(&x, &jet.points[0])) + m.phi(dist(&x, &jet.points[1]));
                best = best.max(num.abs() / den);
            }
        }
        assert!(a >= best - 1e-9, "{a} < {best}");
        assert!(a <= best * (1.0 + 1e-3), "{a} ≫ {best}");
    }
}
