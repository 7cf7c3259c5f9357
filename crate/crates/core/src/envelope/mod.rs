//! Construction of the extension `F` of a jet.
//!
//! With `M ≥ A(f, G)` the lower and upper envelopes
//!
//! * `m(x) = max_z f(z) + ⟨G(z), x − z⟩ − Mφ(|x − z|)`,
//! * `g(x) = min_y f(y) + ⟨G(y), x − y⟩ + Mφ(|x − y|)`
//!
//! satisfy `m ≤ g`, and the largest strongly `Cφ`-paraconvex function below
//! `g` is a `C^{1,ω}` extension of the jet. On a grid that function is
//! replaced by the largest minorant satisfying the paraconvexity inequality
//! along a finite set of lattice directions.

mod family;
mod legendre;
mod lp;
mod quadratic;
mod sweep;

pub use family::{family_f_lower_bound, FamilyBudget};
pub use legendre::{discrete_biconjugate, lower_hull_values, separable_max_plus};
pub use lp::{lp_smoothness_constant, midpoint_ratio};
pub use quadratic::QuadraticEnvelope;
pub use sweep::{paraconvex_envelope_grid, EnvelopeOptions, EnvelopeOutcome};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DirectionSet, GridFunction, GridSpec, NormMode};
use crate::jet::{compute_a, Jet, SearchBox};
use crate::modulus::{Modulus, Profile};
use crate::report::NamedValue;
use crate::vecops::{dist_p, dot};

/// `A(f, G)` above this value is treated as infinite.
pub const NOT_EXTENDABLE_ABOVE: f64 = 1e8;

/// Which construction [`extend`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `C = 2M`.
    General,
    /// `ω(t) = t^α`, `C = 2^{1−α} M`.
    Holder,
    /// `ω(t) = t`, convex envelope of `g + (M/2)|x|²`.
    #[serde(rename = "c11", alias = "c11-biconjugate")]
    C11,
    /// Values capped at `±2(‖f‖∞ + ‖G‖∞)`.
    Bounded,
    /// Profile linearized beyond `t = 1` and a Lipschitz cap.
    Lipschitz,
    /// Distances in the `ℓ_p` norm.
    Lp,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Variant::General),
            "holder" => Ok(Variant::Holder),
            "c11" | "c11-biconjugate" => Ok(Variant::C11),
            "bounded" => Ok(Variant::Bounded),
            "lipschitz" => Ok(Variant::Lipschitz),
            "lp" => Ok(Variant::Lp),
            other => Err(Error::Domain(format!("unknown variant {other:?}"))),
        }
    }
}

/// `φ` below `t = 1` and its tangent line beyond, with `ω̃ = ω(min(t, 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedProfile {
    modulus: Modulus,
    phi1: f64,
    omega1: f64,
}

impl TruncatedProfile {
    pub fn new(modulus: &Modulus) -> Self {
        TruncatedProfile {
            modulus: modulus.clone(),
            phi1: modulus.phi(1.0),
            omega1: modulus.omega(1.0),
        }
    }
}

impl Profile for TruncatedProfile {
    fn omega(&self, t: f64) -> f64 {
        if t <= 1.0 {
            self.modulus.omega(t)
        } else {
            self.omega1
        }
    }

    fn phi(&self, t: f64) -> f64 {
        if t <= 1.0 {
            self.modulus.phi(t)
        } else {
            self.phi1 + self.omega1 * (t - 1.0)
        }
    }
}

/// The profile an extension was built with.
#[derive(Debug, Clone, PartialEq)]
pub enum BuildProfile {
    Plain(Modulus),
    Truncated(TruncatedProfile),
}

impl Profile for BuildProfile {
    fn omega(&self, t: f64) -> f64 {
        match self {
            BuildProfile::Plain(m) => m.omega(t),
            BuildProfile::Truncated(p) => p.omega(t),
        }
    }

    fn phi(&self, t: f64) -> f64 {
        match self {
            BuildProfile::Plain(m) => m.phi(t),
            BuildProfile::Truncated(p) => p.phi(t),
        }
    }
}

fn cone_max<P: Profile>(jet: &Jet, prof: &P, big_m: f64, x: &[f64], norm: NormMode) -> f64 {
    let p = norm.exponent();
    let mut best = f64::NEG_INFINITY;
    for i in 0..jet.len() {
        let z = &jet.points()[i];
        let d: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
        let v = jet.values()[i] + dot(&jet.gradients()[i], &d) - big_m * prof.phi(dist_p(x, z, p));
        best = best.max(v);
    }
    best
}

fn cone_min<P: Profile>(jet: &Jet, prof: &P, big_m: f64, x: &[f64], norm: NormMode) -> f64 {
    let p = norm.exponent();
    let mut best = f64::INFINITY;
    for i in 0..jet.len() {
        let y = &jet.points()[i];
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let v = jet.values()[i] + dot(&jet.gradients()[i], &d) + big_m * prof.phi(dist_p(x, y, p));
        best = best.min(v);
    }
    best
}

/// `m(x) = max_z f(z) + ⟨G(z), x − z⟩ − Mφ(|x − z|)`.
pub fn eval_m(jet: &Jet, m: &Modulus, big_m: f64, x: &[f64]) -> f64 {
    cone_max(jet, m, big_m, x, NormMode::Euclidean)
}

/// `g(x) = min_y f(y) + ⟨G(y), x − y⟩ + Mφ(|x − y|)`.
pub fn eval_g(jet: &Jet, m: &Modulus, big_m: f64, x: &[f64]) -> f64 {
    cone_min(jet, m, big_m, x, NormMode::Euclidean)
}

/// Settings for [`extend`] beyond the jet, modulus and variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendConfig {
    pub grid: GridSpec,
    /// Constant to use instead of the computed `A(f, G)`; must not be below it.
    pub big_m: Option<f64>,
    pub search: SearchBox,
    /// Defaults to the axes and face diagonals.
    pub stencil: Option<DirectionSet>,
    /// Exponent of the `ℓ_p` variant.
    pub p: Option<f64>,
    /// Fixed bound `A` of the bounded variant: `M = 3(‖f‖∞ + ‖G‖∞)/φ(1) + A`.
    pub a_bound: Option<f64>,
    /// Samples for the `ℓ_p` smoothness constant.
    pub lp_samples: usize,
    pub seed: u64,
    /// Extra nodes computed beyond each face of the box and then dropped;
    /// defaults to a quarter of the resolution.
    pub pad: Option<usize>,
}

impl ExtendConfig {
    pub fn new(grid: GridSpec) -> Self {
        ExtendConfig {
            grid,
            big_m: None,
            search: SearchBox::default(),
            stencil: None,
            p: None,
            a_bound: None,
            lp_samples: 20_000,
            seed: 0,
            pad: None,
        }
    }

    /// Padding per axis.
    pub fn padding(&self) -> Vec<usize> {
        default_padding(&self.grid, self.pad)
    }
}

fn default_padding(spec: &GridSpec, pad: Option<usize>) -> Vec<usize> {
    spec.shape
        .iter()
        .map(|&s| pad.unwrap_or((s - 1) / 4))
        .collect()
}

fn crop(values: &[f64], keep: &[usize]) -> Vec<f64> {
    keep.iter().map(|&i| values[i]).collect()
}

/// Default box and resolution for a jet: its bounding box widened by its
/// diameter on every side, with 257, 129 or 33 nodes per axis in dimension
/// 1, 2 or higher.
pub fn default_grid(jet: &Jet) -> Result<GridSpec> {
    let diam = jet.diameter();
    let pad = if diam > 0.0 { diam } else { 1.0 };
    let bb = jet.bounding_box();
    let res = match jet.dim() {
        1 => 257,
        2 => 129,
        _ => 33,
    };
    GridSpec::new(
        bb.iter().map(|b| b[0] - pad).collect(),
        bb.iter().map(|b| b[1] + pad).collect(),
        vec![res; jet.dim()],
    )
}

/// An extension on a grid together with everything needed to audit it.
#[derive(Debug, Clone)]
pub struct ExtensionResult {
    pub extension: GridFunction,
    /// Finite-difference gradient per node.
    pub gradient: Vec<Vec<f64>>,
    /// `m` (after caps) on the grid.
    pub lower: GridFunction,
    /// `g` (after caps) on the grid.
    pub upper: GridFunction,
    pub m_used: f64,
    pub c_used: f64,
    /// `A(f, G)` as computed for the jet.
    pub a_jet: f64,
    pub variant: Variant,
    pub iterations: usize,
    pub residual: f64,
    pub modulus: Modulus,
    pub profile: BuildProfile,
    /// Flat indices of the nodes the points of `E` snapped to.
    pub e_nodes: Vec<usize>,
    pub stencil: DirectionSet,
    /// Sweep stopping threshold.
    pub eps: f64,
    pub details: Vec<NamedValue>,
    pub warnings: Vec<String>,
    /// Grid the envelope was computed on before cropping to the box.
    pub computed_on: GridSpec,
    /// Whether the values are the envelope itself evaluated at the nodes
    /// rather than a grid envelope.
    pub pointwise: bool,
}

/// JSON sidecar of an [`ExtensionResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub variant: Variant,
    #[serde(rename = "M_used")]
    pub m_used: f64,
    #[serde(rename = "C_used")]
    pub c_used: f64,
    #[serde(rename = "A_jet")]
    pub a_jet: f64,
    pub iterations: usize,
    pub residual: f64,
    pub nodes: usize,
    pub details: Vec<NamedValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sampled: Vec<NamedValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ExtensionResult {
    pub fn detail(&self, name: &str) -> Option<f64> {
        self.details
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.value)
    }

    pub fn norm(&self) -> NormMode {
        self.extension.norm
    }

    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            variant: self.variant,
            m_used: self.m_used,
            c_used: self.c_used,
            a_jet: self.a_jet,
            iterations: self.iterations,
            residual: self.residual,
            nodes: self.extension.values.len(),
            details: self.details.clone(),
            sampled: Vec::new(),
            warnings: self.warnings.clone(),
        }
    }
}

fn named(name: &str, value: f64) -> NamedValue {
    NamedValue {
        name: name.into(),
        value,
    }
}

/// `A(f, G)` of the jet, failing when it is effectively infinite.
fn jet_constant(
    jet: &Jet,
    m: &Modulus,
    search: &SearchBox,
    warnings: &mut Vec<String>,
) -> Result<f64> {
    let report = compute_a(jet, m, search)?;
    warnings.extend(report.warnings.iter().cloned());
    let a = report.constant;
    if !a.is_finite() || a > NOT_EXTENDABLE_ABOVE {
        return Err(Error::NotExtendable(format!(
            "A(f, G) = {a:e} exceeds {NOT_EXTENDABLE_ABOVE:e}"
        )));
    }
    Ok(a)
}

/// `M` from the caller or from `A`, never below `A`.
fn choose_m(a: f64, requested: Option<f64>) -> Result<f64> {
    match requested {
        Some(mm) if !(mm.is_finite() && mm >= 0.0) => Err(Error::Domain(format!(
            "M must be finite and nonnegative, got {mm}"
        ))),
        Some(mm) if mm < a * (1.0 - 1e-6) => {
            Err(Error::Domain(format!("M = {mm} is below A(f, G) = {a}")))
        }
        Some(mm) => Ok(mm.max(a)),
        None => Ok(a * (1.0 + 1e-9)),
    }
}

struct Plan<P: Profile> {
    profile: P,
    norm: NormMode,
    big_m: f64,
    c: f64,
    cap: Option<f64>,
    /// Value bounds `(lo, hi)` applied to `m` and `g`.
    clip: Option<(f64, f64)>,
}

/// Snap every point of `E`; returns flat indices and whether each point
/// sits exactly on its node.
fn snap_points(jet: &Jet, spec: &GridSpec) -> Result<Vec<(usize, bool)>> {
    jet.points()
        .iter()
        .map(|p| {
            let idx = spec.snap(p)?;
            Ok((spec.flat_index(&idx), spec.on_node(p, &idx)))
        })
        .collect()
}

/// `(m, g)` on the grid, clipped, with exact values pinned at on-node
/// points of `E`.
fn envelopes<P: Profile>(
    jet: &Jet,
    spec: &GridSpec,
    plan: &Plan<P>,
    snapped: &[(usize, bool)],
) -> (Vec<f64>, Vec<f64>) {
    let (mut lo, mut hi): (Vec<f64>, Vec<f64>) = (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let x = spec.coord_flat(i);
            let mut a = cone_max(jet, &plan.profile, plan.big_m, &x, plan.norm);
            let mut b = cone_min(jet, &plan.profile, plan.big_m, &x, plan.norm);
            if let Some((l, h)) = plan.clip {
                a = a.max(l);
                b = b.min(h);
            }
            (a, b)
        })
        .unzip();
    for (k, &(node, exact)) in snapped.iter().enumerate() {
        if exact {
            lo[node] = jet.values()[k];
            hi[node] = jet.values()[k];
        }
    }
    (lo, hi)
}

fn run_plan<P: Profile + Clone>(
    jet: &Jet,
    spec: &GridSpec,
    plan: &Plan<P>,
    stencil: Option<&DirectionSet>,
    pad: &[usize],
) -> Result<Built> {
    let e_nodes: Vec<usize> = snap_points(jet, spec)?.iter().map(|s| s.0).collect();
    let wide = spec.padded(pad)?;
    let keep = spec.indices_in_padded(pad);
    let snapped = snap_points(jet, &wide)?;
    let (lo, hi) = envelopes(jet, &wide, plan, &snapped);
    let mut warnings = Vec::new();
    let gap = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = hi.iter().chain(&lo).fold(1.0f64, |a, v| a.max(v.abs()));
    if gap > 1e-9 * scale {
        warnings.push(format!(
            "lower envelope exceeds upper by {gap:e}; floor lowered"
        ));
    }
    let floor: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a.min(*b)).collect();
    let upper = GridFunction::new(wide.clone(), hi, plan.norm)?;
    let floor = GridFunction::new(wide.clone(), floor, plan.norm)?;
    let range = (upper.max() - floor.min()).max(0.0);
    let eps = if range > 0.0 { 1e-9 * range } else { 1e-15 };
    let mut opts = EnvelopeOptions::new(spec.dim(), eps);
    if let Some(s) = stencil {
        opts.stencil = s.clone();
    }
    opts.lipschitz_cap = plan.cap;
    let outcome = paraconvex_envelope_grid(&upper, &floor, plan.c, &plan.profile, &opts)?;
    Built::cropped(
        outcome,
        &lo,
        &upper.values,
        spec,
        wide,
        &keep,
        plan.norm,
        e_nodes,
        warnings,
        opts.stencil,
        eps,
    )
}

struct Built {
    outcome: EnvelopeOutcome,
    gradient: Vec<Vec<f64>>,
    lower: GridFunction,
    upper: GridFunction,
    e_nodes: Vec<usize>,
    warnings: Vec<String>,
    stencil: DirectionSet,
    eps: f64,
    computed_on: GridSpec,
}

impl Built {
    /// Restrict a result computed on `wide` to `spec`.
    #[allow(clippy::too_many_arguments)]
    fn cropped(
        outcome: EnvelopeOutcome,
        lower: &[f64],
        upper: &[f64],
        spec: &GridSpec,
        wide: GridSpec,
        keep: &[usize],
        norm: NormMode,
        e_nodes: Vec<usize>,
        warnings: Vec<String>,
        stencil: DirectionSet,
        eps: f64,
    ) -> Result<Built> {
        let full = outcome.result.gradient();
        let gradient = keep.iter().map(|&i| full[i].clone()).collect();
        let values = crop(&outcome.result.values, keep);
        Ok(Built {
            outcome: EnvelopeOutcome {
                result: GridFunction::new(spec.clone(), values, norm)?,
                ..outcome
            },
            gradient,
            lower: GridFunction::new(spec.clone(), crop(lower, keep), norm)?,
            upper: GridFunction::new(spec.clone(), crop(upper, keep), norm)?,
            e_nodes,
            warnings,
            stencil,
            eps,
            computed_on: wide,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    built: Built,
    m: &Modulus,
    profile: BuildProfile,
    variant: Variant,
    m_used: f64,
    c_used: f64,
    a_jet: f64,
    details: Vec<NamedValue>,
    extra_warnings: Vec<String>,
) -> ExtensionResult {
    let Built {
        outcome,
        gradient,
        lower,
        upper,
        e_nodes,
        mut warnings,
        stencil,
        eps,
        computed_on,
    } = built;
    warnings.extend(extra_warnings);
    warnings.dedup();
    ExtensionResult {
        extension: outcome.result,
        gradient,
        lower,
        upper,
        m_used,
        c_used,
        a_jet,
        variant,
        iterations: outcome.sweeps,
        residual: outcome.residual,
        modulus: m.clone(),
        profile,
        e_nodes,
        stencil,
        eps,
        details,
        warnings,
        computed_on,
        pointwise: false,
    }
}

/// Build the extension of `jet` on `cfg.grid` with the chosen variant.
///
/// `M` is `A(f, G)` (or the caller's value, which must not be smaller) and
/// the paraconvexity constant is `2M` (general), `2^{1−α}M` (Hölder),
/// `M` (C^{1,1}), `2M` with the bounded choice of `M` (bounded),
/// `(32/√15 + 4) M̃` with the linearized profile (Lipschitz) or `C* M` in
/// the `ℓ_p` norm. The C^{1,1} variant and the Hölder variant with `α = 1`
/// evaluate the convex envelope exactly; the others compute the grid
/// envelope on the box padded by [`ExtendConfig::pad`] nodes per side.
pub fn extend(
    jet: &Jet,
    m: &Modulus,
    variant: Variant,
    cfg: &ExtendConfig,
) -> Result<ExtensionResult> {
    if cfg.grid.dim() != jet.dim() {
        return Err(Error::InvalidGrid(format!(
            "grid dimension {} differs from jet dimension {}",
            cfg.grid.dim(),
            jet.dim()
        )));
    }
    match variant {
        Variant::General | Variant::Holder => {
            let c_factor = if variant == Variant::Holder {
                let alpha = m.holder_exponent().ok_or_else(|| {
                    Error::Domain("the holder variant needs a Hölder modulus".into())
                })?;
                2f64.powf(1.0 - alpha)
            } else {
                2.0
            };
            let mut warnings = Vec::new();
            let a = jet_constant(jet, m, &cfg.search, &mut warnings)?;
            let big_m = choose_m(a, cfg.big_m)?;
            if variant == Variant::Holder && m.linear_slope() == Some(1.0) {
                // α = 1: the envelope is conv(g + (M/2)|x|²) − (M/2)|x|²
                let mut r = extend_c11_with(jet, big_m, &cfg.grid, cfg.stencil.as_ref(), a)?;
                r.variant = Variant::Holder;
                r.modulus = m.clone();
                r.profile = BuildProfile::Plain(m.clone());
                r.warnings.extend(warnings);
                return Ok(r);
            }
            let plan = Plan {
                profile: m.clone(),
                norm: NormMode::Euclidean,
                big_m,
                c: c_factor * big_m,
                cap: None,
                clip: None,
            };
            let built = run_plan(jet, &cfg.grid, &plan, cfg.stencil.as_ref(), &cfg.padding())?;
            Ok(finish(
                built,
                m,
                BuildProfile::Plain(m.clone()),
                variant,
                big_m,
                plan.c,
                a,
                vec![named("C_factor", c_factor)],
                warnings,
            ))
        }
        Variant::C11 => {
            let slope = m
                .linear_slope()
                .ok_or_else(|| Error::Domain("the c11 variant needs a linear modulus".into()))?;
            // ω(t) = a t is ω(t) = t with M scaled by a
            let unit = Modulus::linear(1.0)?;
            let mut warnings = Vec::new();
            let a = jet_constant(jet, &unit, &cfg.search, &mut warnings)?;
            let big_m = choose_m(a, cfg.big_m.map(|mm| mm * slope))?;
            let mut r = extend_c11_with(jet, big_m, &cfg.grid, cfg.stencil.as_ref(), a)?;
            r.m_used = big_m / slope;
            r.a_jet = a / slope;
            r.modulus = m.clone();
            r.profile = BuildProfile::Plain(m.clone());
            r.c_used = big_m / slope;
            r.warnings.extend(warnings);
            Ok(r)
        }
        Variant::Bounded => bounded_extend_with(jet, m, cfg, cfg.a_bound),
        Variant::Lipschitz => lipschitz_extend(jet, m, cfg),
        Variant::Lp => lp_extend(jet, m, cfg),
    }
}

/// `F = conv(g + (M/2)|x|²) − (M/2)|x|²` for `ω(t) = t`.
///
/// The convex envelope is evaluated exactly at every node (see
/// [`QuadraticEnvelope`]), so the result has no grid or stencil error.
pub fn extend_c11_biconjugate(
    jet: &Jet,
    big_m: Option<f64>,
    grid: &GridSpec,
) -> Result<ExtensionResult> {
    let unit = Modulus::linear(1.0)?;
    let mut warnings = Vec::new();
    let a = jet_constant(jet, &unit, &SearchBox::default(), &mut warnings)?;
    let big_m = choose_m(a, big_m)?;
    let mut r = extend_c11_with(jet, big_m, grid, None, a)?;
    r.warnings.extend(warnings);
    Ok(r)
}

fn extend_c11_with(
    jet: &Jet,
    big_m: f64,
    spec: &GridSpec,
    stencil: Option<&DirectionSet>,
    a: f64,
) -> Result<ExtensionResult> {
    if spec.dim() != jet.dim() {
        return Err(Error::InvalidGrid("grid and jet dimensions differ".into()));
    }
    let unit = Modulus::linear(1.0)?;
    let plan = Plan {
        profile: unit.clone(),
        norm: NormMode::Euclidean,
        big_m,
        c: big_m,
        cap: None,
        clip: None,
    };
    let e_nodes: Vec<usize> = snap_points(jet, spec)?.iter().map(|s| s.0).collect();
    // one extra layer so that every node gets a central difference
    let pad = vec![1; spec.dim()];
    let wide = spec.padded(&pad)?;
    let keep = spec.indices_in_padded(&pad);
    let snapped = snap_points(jet, &wide)?;
    let (lo, hi) = envelopes(jet, &wide, &plan, &snapped);
    let exact = QuadraticEnvelope::new(jet, big_m);
    let raw: Vec<f64> = (0..wide.len())
        .into_par_iter()
        .map(|i| exact.value(&wide.coord_flat(i)))
        .collect();
    let mut warnings = Vec::new();
    let below = lo
        .iter()
        .zip(&raw)
        .map(|(l, v)| l - v)
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = hi.iter().chain(&lo).fold(1.0f64, |s, v| s.max(v.abs()));
    if below > 1e-9 * scale {
        warnings.push(format!(
            "envelope falls below the lower bound by {below:e}; M may be below A(f, G)"
        ));
    }
    let values: Vec<f64> = raw
        .iter()
        .zip(&lo)
        .zip(&hi)
        .map(|((v, l), h)| v.max(l.min(*h)).min(*h))
        .collect();
    let upper = GridFunction::new(wide.clone(), hi, NormMode::Euclidean)?;
    let range = (upper.max() - values.iter().copied().fold(f64::INFINITY, f64::min)).max(0.0);
    let eps = if range > 0.0 { 1e-9 * range } else { 1e-15 };
    let outcome = EnvelopeOutcome {
        result: GridFunction::new(wide.clone(), values, NormMode::Euclidean)?,
        sweeps: 0,
        residual: 0.0,
    };
    let stencil = stencil
        .cloned()
        .unwrap_or_else(|| DirectionSet::axes_and_face_diagonals(spec.dim()));
    let built = Built::cropped(
        outcome,
        &lo,
        &upper.values,
        spec,
        wide,
        &keep,
        NormMode::Euclidean,
        e_nodes,
        warnings,
        stencil,
        eps,
    )?;
    let mut r = finish(
        built,
        &unit,
        BuildProfile::Plain(unit.clone()),
        Variant::C11,
        big_m,
        big_m,
        a,
        vec![named("C_factor", 1.0)],
        Vec::new(),
    );
    r.pointwise = true;
    Ok(r)
}

/// Extension with values capped at `±2(‖f‖∞ + ‖G‖∞)` and
/// `M = max(3(‖f‖∞ + ‖G‖∞)/φ(1), A(f, G))`.
pub fn bounded_extend(jet: &Jet, m: &Modulus, grid: &GridSpec) -> Result<ExtensionResult> {
    bounded_extend_with(jet, m, &ExtendConfig::new(grid.clone()), None)
}

/// Bounded extension; with `a_bound = Some(A)` the constant is the fixed
/// `M = 3(‖f‖∞ + ‖G‖∞)/φ(1) + A`, which depends continuously on the jet.
pub fn bounded_extend_with(
    jet: &Jet,
    m: &Modulus,
    cfg: &ExtendConfig,
    a_bound: Option<f64>,
) -> Result<ExtensionResult> {
    let mut warnings = Vec::new();
    let a = jet_constant(jet, m, &cfg.search, &mut warnings)?;
    let rho0 = jet.sup_f() + jet.sup_g();
    let base = 3.0 * rho0 / m.phi(1.0);
    let big_m = match a_bound {
        Some(bound) => {
            if bound < a * (1.0 - 1e-6) {
                return Err(Error::Domain(format!(
                    "A(f, G) = {a} exceeds the operator bound {bound}"
                )));
            }
            base + bound
        }
        None => base.max(choose_m(a, cfg.big_m)?),
    };
    let cap = 2.0 * rho0;
    let plan = Plan {
        profile: m.clone(),
        norm: NormMode::Euclidean,
        big_m,
        c: 2.0 * big_m,
        cap: None,
        clip: Some((-cap, cap)),
    };
    let built = run_plan(jet, &cfg.grid, &plan, cfg.stencil.as_ref(), &cfg.padding())?;
    let details = vec![
        named("C_factor", 2.0),
        named("rho", rho0 + a),
        named("value_cap", cap),
        named("phi_1", m.phi(1.0)),
    ];
    Ok(finish(
        built,
        m,
        BuildProfile::Plain(m.clone()),
        Variant::Bounded,
        big_m,
        plan.c,
        a,
        details,
        warnings,
    ))
}

/// Gradient constant of `±φ(|·|)` for the linearized profile is `2A + 4`
/// with `A = 2·(8/√15)`.
pub fn lipschitz_profile_constant() -> f64 {
    2.0 * (2.0 * 8.0 / 15f64.sqrt()) + 4.0
}

/// Lipschitz extension: `φ̃` equal to `φ` on `[0, 1]` and affine beyond,
/// `M̃ = max(A(f, G), 2(lip f + ‖G‖∞)/φ(1))`, constant `(2A + 4) M̃` and
/// the cap `L = ‖G‖∞ + ω(1) M̃` on the slopes of `F`.
pub fn lipschitz_extend(jet: &Jet, m: &Modulus, cfg: &ExtendConfig) -> Result<ExtensionResult> {
    let mut warnings = Vec::new();
    let a = jet_constant(jet, m, &cfg.search, &mut warnings)?;
    let big_m = choose_m(a, cfg.big_m)?;
    let lip = jet.lip_f();
    let sup_g = jet.sup_g();
    let m_tilde = big_m.max(2.0 * (lip + sup_g) / m.phi(1.0));
    let cap = sup_g + m.omega(1.0) * m_tilde;
    let profile = TruncatedProfile::new(m);
    let plan = Plan {
        profile: profile.clone(),
        norm: NormMode::Euclidean,
        big_m: m_tilde,
        c: lipschitz_profile_constant() * m_tilde,
        cap: Some(cap),
        clip: None,
    };
    let built = run_plan(jet, &cfg.grid, &plan, cfg.stencil.as_ref(), &cfg.padding())?;
    let details = vec![
        named("C_factor", lipschitz_profile_constant()),
        named("M_tilde", m_tilde),
        named("lipschitz_cap", cap),
        named("lip_f", lip),
    ];
    Ok(finish(
        built,
        m,
        BuildProfile::Truncated(profile),
        Variant::Lipschitz,
        m_tilde,
        plan.c,
        a,
        details,
        warnings,
    ))
}

/// `sup |N_{yz}(x)|/(φ(‖x − y‖_p) + φ(‖x − z‖_p))` with `x` over the grid
/// nodes and the points of `E`.
pub fn lp_constant_on_grid(jet: &Jet, m: &Modulus, p: f64, spec: &GridSpec) -> f64 {
    let nodes: Vec<Vec<f64>> = (0..spec.len()).map(|i| spec.coord_flat(i)).collect();
    let mut pairs = Vec::new();
    for i in 0..jet.len() {
        for j in i + 1..jet.len() {
            pairs.push((i, j));
        }
    }
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let (y, z) = (&jet.points()[i], &jet.points()[j]);
            let (gy, gz) = (&jet.gradients()[i], &jet.gradients()[j]);
            let ratio = |x: &[f64]| {
                let dy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                let dz: Vec<f64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
                let num = jet.values()[i] + dot(gy, &dy) - jet.values()[j] - dot(gz, &dz);
                let den = m.phi(dist_p(x, y, p)) + m.phi(dist_p(x, z, p));
                num.abs() / den
            };
            nodes
                .iter()
                .map(|x| ratio(x))
                .chain([ratio(y), ratio(z)])
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Whether `t^α/ω(t)` is nondecreasing, as the `ℓ_p` construction needs.
fn lp_compatible(m: &Modulus, alpha: f64) -> bool {
    let mut prev = 0.0;
    for k in -60..=60 {
        let t = 10f64.powf(k as f64 / 10.0);
        let r = t.powf(alpha) / m.omega(t);
        if r < prev * (1.0 - 1e-9) {
            return false;
        }
        prev = r;
    }
    true
}

/// Extension in the `ℓ_p` norm, `p ∈ (1, 2]`: distances are `‖·‖_p`, `M`
/// is the grid estimate of the `ℓ_p` analogue of `A(f, G)` and the
/// constant is `C* M` with `C* = 1 + 3^{1+α}/(1+α)·C_p`, `α = p − 1` and
/// `C_p` the sampled smoothness constant of the norm.
pub fn lp_extend(jet: &Jet, m: &Modulus, cfg: &ExtendConfig) -> Result<ExtensionResult> {
    let p = cfg
        .p
        .ok_or_else(|| Error::Domain("the lp variant needs p".into()))?;
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Domain(format!("p must lie in (1, 2], got {p}")));
    }
    let alpha = p - 1.0;
    if !lp_compatible(m, alpha) {
        return Err(Error::Domain(format!(
            "t^{alpha}/ω(t) must be nondecreasing for the ℓ_{p} construction"
        )));
    }
    let a = lp_constant_on_grid(jet, m, p, &cfg.grid.padded(&cfg.padding())?);
    if !a.is_finite() || a > NOT_EXTENDABLE_ABOVE {
        return Err(Error::NotExtendable(format!(
            "ℓ_p constant {a:e} is too large"
        )));
    }
    let big_m = choose_m(a, cfg.big_m)?;
    let c_p = lp_smoothness_constant(p, jet.dim(), cfg.lp_samples, cfg.seed)?;
    let c_star = 1.0 + 3f64.powf(1.0 + alpha) / (1.0 + alpha) * c_p;
    let plan = Plan {
        profile: m.clone(),
        norm: NormMode::Lp { p },
        big_m,
        c: c_star * big_m,
        cap: None,
        clip: None,
    };
    let built = run_plan(jet, &cfg.grid, &plan, cfg.stencil.as_ref(), &cfg.padding())?;
    let details = vec![
        named("C_factor", c_star),
        named("p", p),
        named("C_p", c_p),
        named("C_star", c_star),
    ];
    Ok(finish(
        built,
        m,
        BuildProfile::Plain(m.clone()),
        Variant::Lp,
        big_m,
        plan.c,
        a,
        details,
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn eval_examples() {
        let lin = Modulus::linear(1.0).unwrap();
        let jet = Jet::new(2, vec![vec![0.0, 0.0]], vec![1.0], vec![vec![0.5, -1.0]]).unwrap();
        let x = [2.0, 0.0];
        assert_eq!(eval_m(&jet, &lin, 1.0, &x), 1.0 + 1.0 - 2.0);
        assert_eq!(eval_g(&jet, &lin, 1.0, &x), 1.0 + 1.0 + 2.0);
        let m = Modulus::holder(0.5).unwrap();
        let two = jet1(&[-1.0, 1.0], &[0.5, 0.2], &[0.1, -0.3]);
        assert_eq!(eval_m(&two, &m, 3.0, &[-1.0]), 0.5);
        assert_eq!(eval_g(&two, &m, 3.0, &[1.0]), 0.2);
        // hand evaluation at x = 0
        let lhs = (0.5 + 0.1 - 3.0 * m.phi(1.0)).max(0.2 + 0.3 - 3.0 * m.phi(1.0));
        assert_eq!(eval_m(&two, &m, 3.0, &[0.0]), lhs);
    }

    #[test]
    fn affine_jet_extends_to_itself() {
        let m = Modulus::holder(0.5).unwrap();
        let jet = Jet::affine(vec![vec![-0.5, 0.0], vec![0.5, 0.25]], &[0.3, -0.7], 1.0).unwrap();
        let grid = GridSpec::cube(2, -1.0, 1.0, 17).unwrap();
        let r = extend(&jet, &m, Variant::General, &ExtendConfig::new(grid.clone())).unwrap();
        assert_eq!(r.m_used, 0.0);
        for i in 0..grid.len() {
            let x = grid.coord_flat(i);
            assert!((r.extension.values[i] - (1.0 + 0.3 * x[0] - 0.7 * x[1])).abs() < 1e-12);
        }
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn zero_jet_bounded() {
        let m = Modulus::holder(0.5).unwrap();
        let jet = jet1(&[-0.5, 0.5], &[0.0, 0.0], &[0.0, 0.0]);
        let grid = GridSpec::cube(1, -2.0, 2.0, 33).unwrap();
        let r = bounded_extend(&jet, &m, &grid).unwrap();
        assert!(r.extension.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn off_grid_point_is_an_error() {
        let m = Modulus::holder(0.5).unwrap();
        let jet = jet1(&[0.0, 3.0], &[0.0, 0.0], &[0.0, 0.0]);
        let grid = GridSpec::cube(1, -1.0, 1.0, 33).unwrap();
        let r = extend(&jet, &m, Variant::General, &ExtendConfig::new(grid));
        assert!(matches!(r, Err(Error::PointOffGrid { .. })));
    }

    #[test]
    fn jump_is_not_extendable() {
        let m = Modulus::holder(0.5).unwrap();
        let jet = jet1(&[0.0, 1e-10], &[0.0, 1.0], &[0.0, 0.0]);
        let grid = GridSpec::cube(1, -1.0, 1.0, 33).unwrap();
        let r = lipschitz_extend(&jet, &m, &ExtendConfig::new(grid));
        assert!(matches!(r, Err(Error::NotExtendable(_))));
    }

    #[test]
    fn interpolates_on_nodes() {
        let m = Modulus::holder(0.5).unwrap();
        let jet = jet1(&[-1.0, 1.0], &[2.0 / 3.0, 2.0 / 3.0], &[-1.0, 1.0]);
        let grid = GridSpec::cube(1, -4.0, 4.0, 257).unwrap();
        let r = extend(&jet, &m, Variant::Holder, &ExtendConfig::new(grid.clone())).unwrap();
        let h = grid.h();
        for (k, &node) in r.e_nodes.iter().enumerate() {
            assert_eq!(r.extension.values[node], jet.values()[k]);
            let err = (r.gradient[node][0] - jet.gradients()[k][0]).abs();
            assert!(err <= 10.0 * r.m_used * m.omega(h), "{err}");
        }
        for i in 0..grid.len() {
            assert!(r.lower.values[i] <= r.extension.values[i] + 1e-9);
            assert!(r.extension.values[i] <= r.upper.values[i] + 1e-9);
        }
    }

    #[test]
    fn c11_valley_matches_hull() {
        // f = 1, G = ∓1 at ∓1, M = 1
        let jet = jet1(&[-1.0, 1.0], &[1.0, 1.0], &[-1.0, 1.0]);
        let grid = GridSpec::cube(1, -3.0, 3.0, 10_001).unwrap();
        let r = extend_c11_biconjugate(&jet, Some(1.0), &grid).unwrap();
        let lin = Modulus::linear(1.0).unwrap();
        let xs: Vec<f64> = (0..grid.len()).map(|i| grid.coord_flat(i)[0]).collect();
        // brute-force hull at 0: min over chords through 0
        let lifted: Vec<f64> = xs
            .iter()
            .map(|&x| eval_g(&jet, &lin, 1.0, &[x]) + 0.5 * x * x)
            .collect();
        let mid = xs.len() / 2;
        let mut best = lifted[mid];
        for i in (0..mid).step_by(7) {
            for j in (mid + 1..xs.len()).step_by(7) {
                let t = (0.0 - xs[i]) / (xs[j] - xs[i]);
                best = best.min(lifted[i] + t * (lifted[j] - lifted[i]));
            }
        }
        let v = r.extension.values[mid];
        assert!((v - best).abs() < 1e-3, "{v} vs {best}");
    }
}
