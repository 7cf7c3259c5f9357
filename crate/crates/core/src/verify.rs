//! Sampled certification of a built extension.
//!
//! Every check has the form `value_observed ≤ bound_claimed`, accepted with
//! the multiplicative slack `1 + grid_tol` and the absolute slack
//! [`ABS_TOL`], except for the checks marked exact, which get only the
//! absolute slack. Samples are drawn from grid nodes with one generator per
//! sample index, so reports do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::{
    extend, family_f_lower_bound, paraconvex_envelope_grid, BuildProfile, EnvelopeOptions,
    ExtendConfig, ExtensionResult, FamilyBudget, Variant,
};
use crate::error::Result;
use crate::grid::{DirectionSet, GridFunction, GridSpec, NormMode};
use crate::jet::{compute_a, holder_gradient_factor, m_omega_g, Jet, SearchBox};
use crate::modulus::{Modulus, Profile};
use crate::optimize::golden_section_max;
use crate::report::NamedValue;
use crate::vecops::dot;

pub const ABS_TOL: f64 = 1e-9;

/// Multiple of `ω(h)·M` allowed between `∇F` and `G` at the nodes of `E`.
pub const GRADIENT_GRID_CONSTANT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCheck {
    pub name: String,
    pub bound_claimed: f64,
    pub value_observed: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<VerificationCheck>,
    pub grid_tol: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<NamedValue>,
}

impl VerificationReport {
    pub fn new(grid_tol: f64, seed: u64) -> Self {
        VerificationReport {
            checks: Vec::new(),
            grid_tol,
            seed,
            details: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&VerificationCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&VerificationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn detail(&self, name: &str) -> Option<f64> {
        self.details
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.value)
    }

    /// `observed ≤ bound·(1 + grid_tol) + ABS_TOL`.
    pub fn upper(&mut self, name: &str, bound: f64, observed: f64, witness: Vec<Vec<f64>>) {
        let passed = observed <= bound * (1.0 + self.grid_tol) + ABS_TOL;
        self.push(name, bound, observed, passed, witness);
    }

    /// `observed ≤ bound + ABS_TOL`.
    pub fn exact(&mut self, name: &str, bound: f64, observed: f64, witness: Vec<Vec<f64>>) {
        let passed = observed <= bound + ABS_TOL;
        self.push(name, bound, observed, passed, witness);
    }

    /// `observed < bound`.
    pub fn strict(&mut self, name: &str, bound: f64, observed: f64) {
        let passed = observed < bound;
        self.push(name, bound, observed, passed, Vec::new());
    }

    fn push(
        &mut self,
        name: &str,
        bound: f64,
        observed: f64,
        passed: bool,
        witness: Vec<Vec<f64>>,
    ) {
        self.checks.push(VerificationCheck {
            name: name.into(),
            bound_claimed: bound,
            value_observed: observed,
            passed: passed && !observed.is_nan(),
            witness,
        });
    }

    pub fn note(&mut self, name: &str, value: f64) {
        self.details.push(NamedValue {
            name: name.into(),
            value,
        });
    }

    /// Append the checks of `other` with `prefix` on their names.
    pub fn absorb(&mut self, prefix: &str, other: VerificationReport) {
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
        for mut d in other.details {
            d.name = format!("{prefix}{}", d.name);
            self.details.push(d);
        }
    }
}

/// `10 ω(h)/ω(diam)` for the grid.
pub fn grid_tol<P: Profile>(m: &P, spec: &GridSpec) -> f64 {
    GRADIENT_GRID_CONSTANT * m.omega(spec.h()) / m.omega(spec.diameter())
}

/// `(2^{2−2α}/√(1+α))(1 + 1/α)^{α/2}`, the upper bracket of the trace
/// seminorm for `ω(t) = t^α`.
pub fn holder_trace_factor(alpha: f64) -> f64 {
    2f64.powf(2.0 - 2.0 * alpha) / (1.0 + alpha).sqrt() * (1.0 + 1.0 / alpha).powf(alpha / 2.0)
}

/// `8/√15`.
pub fn factor_8_sqrt15() -> f64 {
    8.0 / 15f64.sqrt()
}

/// `4/√3`.
pub fn factor_4_sqrt3() -> f64 {
    4.0 / 3f64.sqrt()
}

/// `16/√15`.
pub fn factor_16_sqrt15() -> f64 {
    16.0 / 15f64.sqrt()
}

fn rng_for(seed: u64, tag: u64, index: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream((tag << 40) | index as u64);
    r
}

/// Largest value of `f` over `n` samples, with its witness. NaN counts as
/// `+∞`; ties go to the smaller index.
fn sample_max<W: Send>(
    n: usize,
    seed: u64,
    tag: u64,
    f: impl Fn(&mut ChaCha8Rng) -> Option<(f64, W)> + Sync,
) -> Option<(f64, W)> {
    (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = rng_for(seed, tag, i);
            f(&mut rng).map(|(v, w)| (if v.is_nan() { f64::INFINITY } else { v }, i, w))
        })
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .map(|(v, _, w)| (v, w))
}

/// Greedy moves of single nodes by up to two grid steps along an axis,
/// while `eval` increases.
fn refine(
    spec: &GridSpec,
    mut nodes: Vec<usize>,
    eval: impl Fn(&[usize]) -> f64,
) -> (f64, Vec<usize>) {
    let strides = spec.strides();
    let mut best = eval(&nodes);
    for _ in 0..20 {
        let mut improved = false;
        for slot in 0..nodes.len() {
            for k in 0..spec.dim() {
                for step in [-2i64, -1, 1, 2] {
                    let idx = spec.multi_index(nodes[slot]);
                    let to = idx[k] as i64 + step;
                    if to < 0 || to >= spec.shape[k] as i64 {
                        continue;
                    }
                    let mut cand = nodes.clone();
                    cand[slot] = (nodes[slot] as i64 + step * strides[k] as i64) as usize;
                    let v = eval(&cand);
                    if v > best {
                        best = v;
                        nodes = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    (best, nodes)
}

struct View<'a> {
    spec: &'a GridSpec,
    f: &'a [f64],
    grad: &'a [Vec<f64>],
    norm: NormMode,
    coords: Vec<Vec<f64>>,
}

impl<'a> View<'a> {
    fn new(ext: &'a ExtensionResult) -> Self {
        let spec = &ext.extension.spec;
        View {
            spec,
            f: &ext.extension.values,
            grad: &ext.gradient,
            norm: ext.norm(),
            coords: (0..spec.len()).map(|i| spec.coord_flat(i)).collect(),
        }
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        let d: Vec<f64> = self.coords[a]
            .iter()
            .zip(&self.coords[b])
            .map(|(x, y)| x - y)
            .collect();
        self.norm.norm(&d)
    }

    fn grad_gap(&self, a: usize, b: usize) -> f64 {
        let d: Vec<f64> = self.grad[a]
            .iter()
            .zip(&self.grad[b])
            .map(|(x, y)| x - y)
            .collect();
        self.norm.dual_norm(&d)
    }

    fn witness(&self, nodes: &[usize]) -> Vec<Vec<f64>> {
        nodes.iter().map(|&i| self.coords[i].clone()).collect()
    }

    /// `|F(y) + ⟨∇F(y), x − y⟩ − F(z) − ⟨∇F(z), x − z⟩|/(φ(|x − y|) + φ(|x − z|))`.
    fn a_ratio<P: Profile>(&self, prof: &P, t: &[usize]) -> f64 {
        let (x, y, z) = (t[0], t[1], t[2]);
        if y == z {
            return 0.0;
        }
        let xy: Vec<f64> = self.coords[x]
            .iter()
            .zip(&self.coords[y])
            .map(|(a, b)| a - b)
            .collect();
        let xz: Vec<f64> = self.coords[x]
            .iter()
            .zip(&self.coords[z])
            .map(|(a, b)| a - b)
            .collect();
        let num = self.f[y] + dot(&self.grad[y], &xy) - self.f[z] - dot(&self.grad[z], &xz);
        let den = prof.phi(self.norm.norm(&xy)) + prof.phi(self.norm.norm(&xz));
        num.abs() / den
    }

    fn omega_ratio<P: Profile>(&self, prof: &P, p: &[usize]) -> f64 {
        if p[0] == p[1] {
            return 0.0;
        }
        self.grad_gap(p[0], p[1]) / prof.omega(self.dist(p[0], p[1]))
    }
}

/// Sampled `A(F, ∇F)` over node triples, with one refinement pass.
fn sampled_a<P: Profile>(v: &View, prof: &P, samples: usize, seed: u64) -> (f64, Vec<usize>) {
    let len = v.spec.len();
    let best = sample_max(samples, seed, 1, |rng| {
        let t = [
            rng.gen_range(0..len),
            rng.gen_range(0..len),
            rng.gen_range(0..len),
        ];
        Some((v.a_ratio(prof, &t), t.to_vec()))
    });
    match best {
        Some((_, nodes)) => refine(v.spec, nodes, |t| v.a_ratio(prof, t)),
        None => (0.0, Vec::new()),
    }
}

/// Sampled `M_ω(∇F)` over node pairs plus all pairs of `extra` nodes.
fn sampled_m_omega<P: Profile>(
    v: &View,
    prof: &P,
    extra: &[usize],
    samples: usize,
    seed: u64,
) -> (f64, Vec<usize>) {
    let len = v.spec.len();
    let mut best = sample_max(samples, seed, 2, |rng| {
        let p = [rng.gen_range(0..len), rng.gen_range(0..len)];
        Some((v.omega_ratio(prof, &p), p.to_vec()))
    })
    .unwrap_or((0.0, vec![0, 0]));
    let mut distinct = extra.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for (i, &a) in distinct.iter().enumerate().take(400) {
        for &b in distinct.iter().skip(i + 1).take(400) {
            let r = v.omega_ratio(prof, &[a, b]);
            if r > best.0 {
                best = (r, vec![a, b]);
            }
        }
    }
    refine(v.spec, best.1, |p| v.omega_ratio(prof, p))
}

/// Largest effective constant of `±F` over stencil triples
/// `(x + s d, x, x − t d)`: `sign·(F(x) − λF(x + sd) − (1 − λ)F(x − td))`
/// divided by `λ(1 − λ)φ((s + t)δ)`, `λ = t/(s + t)`.
fn sampled_paraconvexity<P: Profile>(
    v: &View,
    prof: &P,
    stencil: &DirectionSet,
    sign: f64,
    samples: usize,
    seed: u64,
    tag: u64,
) -> (f64, Vec<usize>) {
    let spec = v.spec;
    let len = spec.len();
    let strides = spec.strides();
    let spacing = spec.spacing();
    let res = sample_max(samples, seed, tag, |rng| {
        for _ in 0..64 {
            let d = &stencil.dirs[rng.gen_range(0..stencil.dirs.len())];
            let x = rng.gen_range(0..len);
            let idx = spec.multi_index(x);
            let reach = |sgn: i64| {
                (0..spec.dim())
                    .filter(|&k| d[k] != 0)
                    .map(|k| {
                        let room = if d[k] * sgn > 0 {
                            spec.shape[k] as i64 - 1 - idx[k] as i64
                        } else {
                            idx[k] as i64
                        };
                        room / d[k].abs()
                    })
                    .min()
                    .unwrap_or(0)
            };
            let (smax, tmax) = (reach(1), reach(-1));
            if smax < 1 || tmax < 1 {
                continue;
            }
            let s = rng.gen_range(1..=smax);
            let t = rng.gen_range(1..=tmax);
            let off: i64 = (0..spec.dim()).map(|k| d[k] * strides[k] as i64).sum();
            let a = (x as i64 + s * off) as usize;
            let b = (x as i64 - t * off) as usize;
            let lam = t as f64 / (s + t) as f64;
            let delta = DirectionSet::step_length(d, &spacing, v.norm);
            let bump = lam * (1.0 - lam) * prof.phi((s + t) as f64 * delta);
            let gap = sign * (v.f[x] - lam * v.f[a] - (1.0 - lam) * v.f[b]);
            return Some((gap / bump, vec![a, x, b]));
        }
        None
    });
    res.unwrap_or((0.0, Vec::new()))
}

/// Largest `|F(x) − F(y)|/|x − y|` over node pairs; half the pairs are
/// within three nodes of each other.
fn sampled_lip(v: &View, samples: usize, seed: u64) -> (f64, Vec<usize>) {
    let spec = v.spec;
    let len = spec.len();
    let strides = spec.strides();
    let ratio = |a: usize, b: usize| {
        if a == b {
            0.0
        } else {
            (v.f[a] - v.f[b]).abs() / v.dist(a, b)
        }
    };
    let res = sample_max(samples, seed, 5, |rng| {
        let a = rng.gen_range(0..len);
        let b = if rng.gen_bool(0.5) {
            rng.gen_range(0..len)
        } else {
            let idx = spec.multi_index(a);
            let mut flat = 0;
            for k in 0..spec.dim() {
                let lo = idx[k].saturating_sub(3);
                let hi = (idx[k] + 3).min(spec.shape[k] - 1);
                flat += rng.gen_range(lo..=hi) * strides[k];
            }
            flat
        };
        Some((ratio(a, b), vec![a, b]))
    });
    res.unwrap_or((0.0, Vec::new()))
}

fn build_profile_of(ext: &ExtensionResult) -> &BuildProfile {
    &ext.profile
}

/// Run every sampled check on `ext`.
///
/// Checks: sandwich `m ≤ F ≤ g`, interpolation and gradients on `E`,
/// discrete paraconvexity of `F` and `−F` with `C_used`, sampled
/// `A(F, ∇F) ≤ C_used`, the gradient-modulus bound of the variant, the
/// trace bracket `A(f, G) ≤ M_ω(∇F)`, the fixed point of the envelope,
/// members of the knot family staying below `F`, and the bounded or
/// Lipschitz estimates where they apply.
pub fn verify_extension(
    jet: &Jet,
    m: &Modulus,
    ext: &ExtensionResult,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let spec = &ext.extension.spec;
    let mut rep = VerificationReport::new(grid_tol(m, spec), seed);
    let v = View::new(ext);
    let prof = build_profile_of(ext);
    let big_m = ext.m_used;
    let c = ext.c_used;

    // sandwich
    let mut worst = (f64::NEG_INFINITY, 0);
    for i in 0..spec.len() {
        let gap = (ext.lower.values[i] - v.f[i]).max(v.f[i] - ext.upper.values[i]);
        if gap > worst.0 {
            worst = (gap, i);
        }
    }
    rep.exact("sandwich", 0.0, worst.0, v.witness(&[worst.1]));

    // values and gradients on E
    let h = spec.h();
    let mut val = (0.0f64, Vec::new());
    // (error, allowed, witness) at the worst node
    let mut grad = (0.0f64, 0.0f64, Vec::new());
    for (k, &node) in ext.e_nodes.iter().enumerate() {
        let y = &jet.points()[k];
        let x = &v.coords[node];
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let off = v.norm.norm(&d);
        let tangent = jet.values()[k] + dot(&jet.gradients()[k], &d);
        // F lies between the two cones at y
        let excess = (v.f[node] - tangent).abs() - big_m * prof.phi(off);
        if excess > val.0 || val.1.is_empty() {
            val = (excess.max(val.0), vec![y.clone(), x.clone()]);
        }
        let gd: Vec<f64> = v.grad[node]
            .iter()
            .zip(&jet.gradients()[k])
            .map(|(a, b)| a - b)
            .collect();
        let err = v.norm.dual_norm(&gd);
        let allowed = GRADIENT_GRID_CONSTANT * big_m * prof.omega(h.max(off));
        if grad.2.is_empty() || err - allowed > grad.0 - grad.1 {
            grad = (err, allowed, vec![y.clone(), x.clone()]);
        }
    }
    if !ext.e_nodes.is_empty() {
        rep.exact("interpolation", 0.0, val.0.max(0.0), val.1);
        rep.exact("gradient_on_E", grad.1, grad.0, grad.2);
    }

    // ±F paraconvexity
    let (plus, wp) = sampled_paraconvexity(&v, prof, &ext.stencil, 1.0, samples, seed, 3);
    rep.upper("paraconvexity_F", c, plus, v.witness(&wp));
    let (minus, wm) = sampled_paraconvexity(&v, prof, &ext.stencil, -1.0, samples, seed, 4);
    rep.upper("paraconvexity_minus_F", c, minus, v.witness(&wm));

    // A(F, ∇F) ≤ C_used
    let (a_f, wa) = sampled_a(&v, prof, samples, seed);
    rep.upper("A(F,gradF)", c, a_f, v.witness(&wa));
    rep.note("A_jet", ext.a_jet);
    rep.note("A_F_sampled", a_f);

    // gradient modulus
    let (m_prof, wmp) = sampled_m_omega(&v, prof, &ext.e_nodes, samples, seed);
    let grad_bound = match (ext.variant, m.holder_exponent()) {
        (Variant::Holder, Some(alpha)) => Some(holder_trace_factor(alpha) * big_m),
        (Variant::C11, _) => Some(big_m),
        (Variant::Lp, _) => Some(3.0 * c),
        _ => Some(factor_8_sqrt15() * c),
    };
    if let Some(b) = grad_bound {
        rep.upper("M_omega(gradF)", b, m_prof, v.witness(&wmp));
    }
    rep.note("M_omega_gradF_sampled", m_prof);

    // trace bracket with the original modulus
    let (m_orig, wmo) = if matches!(prof, BuildProfile::Plain(_)) {
        (m_prof, wmp.clone())
    } else {
        sampled_m_omega(&v, m, &ext.e_nodes, samples, seed)
    };
    rep.upper("trace_lower_bracket", m_orig, ext.a_jet, v.witness(&wmo));

    // fixed point
    let floor: Vec<f64> = ext
        .lower
        .values
        .iter()
        .zip(&ext.upper.values)
        .map(|(a, b)| a.min(*b))
        .collect();
    let floor = GridFunction::new(spec.clone(), floor, v.norm)?;
    let mut opts = EnvelopeOptions::new(spec.dim(), ext.eps);
    opts.stencil = ext.stencil.clone();
    opts.lipschitz_cap = ext.detail("lipschitz_cap");
    let again = paraconvex_envelope_grid(&ext.extension, &floor, c, prof, &opts)?;
    let (mut moved, mut at) = (0.0f64, 0);
    for i in 0..spec.len() {
        let d = v.f[i] - again.result.values[i];
        if d > moved {
            moved = d;
            at = i;
        }
    }
    rep.upper("envelope_fixed_point", ext.eps, moved, v.witness(&[at]));

    // knot family below F
    let family_ok = matches!(
        ext.variant,
        Variant::General | Variant::Holder | Variant::C11
    ) && spec.dim() <= 2
        && v.norm == NormMode::Euclidean;
    if family_ok {
        let budget = FamilyBudget {
            knots: 3,
            iters: 150,
            constraint: ext.computed_on.clone(),
        };
        let picks: Vec<usize> = (0..4)
            .map(|i| rng_for(seed, 6, i).gen_range(0..spec.len()))
            .collect();
        let mut worst = (f64::NEG_INFINITY, 0);
        for &node in &picks {
            let lb = family_f_lower_bound(jet, m, big_m, &v.coords[node], &budget)?;
            if lb - v.f[node] > worst.0 {
                worst = (lb - v.f[node], node);
            }
        }
        // members are only held below g on the constraint nodes
        let slack = if ext.pointwise {
            big_m * prof.phi(spec.h() * (spec.dim() as f64).sqrt())
        } else {
            0.0
        };
        rep.exact(
            "family_below_F",
            ext.eps + slack,
            worst.0,
            v.witness(&[worst.1]),
        );
    }

    match ext.variant {
        Variant::Bounded => {
            let cap = ext.detail("value_cap").unwrap_or(f64::INFINITY);
            let sup_f = ext.extension.sup_norm();
            rep.exact("bounded_sup_F", cap, sup_f, Vec::new());
            let (g_sup, at) = v
                .grad
                .iter()
                .enumerate()
                .map(|(i, g)| (v.norm.dual_norm(g), i))
                .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a });
            rep.upper(
                "bounded_sup_gradF",
                2.0 * sup_f + 2.0 * big_m * m.phi(1.0),
                g_sup,
                v.witness(&[at]),
            );
            rep.note("rho", ext.detail("rho").unwrap_or(f64::NAN));
        }
        Variant::Lipschitz => {
            let cap = ext.detail("lipschitz_cap").unwrap_or(f64::INFINITY);
            let (lip, wl) = sampled_lip(&v, samples, seed);
            rep.upper("lipschitz_F", cap, lip, v.witness(&wl));
        }
        _ => {}
    }
    Ok(rep)
}

/// Gradient continuity of a function whose `±F` are `C_used φ`-paraconvex:
/// `|∇F(x) − ∇F(y)| ≤ C_used · min{(8/√15) ω(r), (4/√3) ω(r/2)}` (also
/// `C_used (2^{1−α}/√(1+α))(1+1/α)^{α/2} r^α` for `ω = t^α`), and
/// `≤ 3 C_used ω(‖x − y‖_p)` in the `ℓ_p` norm.
pub fn verify_prop26(
    ext: &ExtensionResult,
    m: &Modulus,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let spec = &ext.extension.spec;
    let mut rep = VerificationReport::new(grid_tol(m, spec), seed);
    let v = View::new(ext);
    let prof = &ext.profile;
    let holder = match prof {
        BuildProfile::Plain(mm) => mm.holder_exponent(),
        BuildProfile::Truncated(_) => None,
    };
    let lp = matches!(v.norm, NormMode::Lp { .. });
    let shape = |r: f64| {
        if lp {
            return 3.0 * prof.omega(r);
        }
        let mut b = (factor_8_sqrt15() * prof.omega(r)).min(factor_4_sqrt3() * prof.omega(r / 2.0));
        if let Some(alpha) = holder {
            b = b.min(holder_gradient_factor(alpha) * r.powf(alpha));
        }
        b
    };
    let ratio = |p: &[usize]| {
        if p[0] == p[1] {
            0.0
        } else {
            v.grad_gap(p[0], p[1]) / shape(v.dist(p[0], p[1]))
        }
    };
    let len = spec.len();
    let best = sample_max(samples, seed, 7, |rng| {
        let p = [rng.gen_range(0..len), rng.gen_range(0..len)];
        Some((ratio(&p), p.to_vec()))
    });
    let (obs, w) = match best {
        Some((_, nodes)) => refine(spec, nodes, ratio),
        None => (0.0, Vec::new()),
    };
    rep.upper("gradient_continuity", ext.c_used, obs, v.witness(&w));
    Ok(rep)
}

/// `(t^{3/2} + 3t^{1/2} + 2)/(2(t + 1)^{3/2})`.
pub fn golden_reduction(t: f64) -> f64 {
    (t.powf(1.5) + 3.0 * t.sqrt() + 2.0) / (2.0 * (t + 1.0).powf(1.5))
}

/// Dense sweep of [`golden_reduction`] over `t ∈ (0, 100]` refined by
/// golden section: `(t*, max)`.
pub fn golden_reduction_sup() -> (f64, f64) {
    let n = 200_000;
    let (mut bt, mut bv) = (0usize, f64::NEG_INFINITY);
    let ts: Vec<f64> = (0..=n)
        .map(|i| 10f64.powf(-8.0 + 10.0 * i as f64 / n as f64))
        .collect();
    for (i, &t) in ts.iter().enumerate() {
        let v = golden_reduction(t);
        if v > bv {
            bv = v;
            bt = i;
        }
    }
    let lo = ts[bt.saturating_sub(1)];
    let hi = ts[(bt + 1).min(n)];
    let (t, v) = golden_section_max(golden_reduction, lo, hi, 1e-14, 200);
    if v > bv {
        (t, v)
    } else {
        (ts[bt], bv)
    }
}

/// The function `f(x) = (2/3)|x|^{3/2}` on 401 equispaced points of
/// `[−1, 1]` with `G = f′` and `ω(t) = t^{1/2}`.
pub fn golden_jet() -> Jet {
    let pts: Vec<Vec<f64>> = (0..401).map(|i| vec![-1.0 + i as f64 / 200.0]).collect();
    let f = pts
        .iter()
        .map(|p| 2.0 / 3.0 * p[0].abs().powf(1.5))
        .collect();
    let g = pts
        .iter()
        .map(|p| vec![p[0].signum() * p[0].abs().sqrt()])
        .collect();
    Jet::new(1, pts, f, g).expect("valid jet")
}

/// Lower end of the accepted range for `A(f, G)` in the golden example.
pub const GOLDEN_A_LOWER: f64 = 1.30;
/// Upper estimate of `A(f, G)` for the golden example.
pub const GOLDEN_A_UPPER: f64 = 1.3066;
pub const GOLDEN_TOL: f64 = 1e-3;

/// The worked example: `M_ω(G) = √2`, `A(f, G) ∈ [1.30, 1.3066]` (within
/// `1e-3`), `A(f, G) < M_ω(G)`, agreement with the one-variable reduction,
/// and a Hölder extension that passes [`verify_extension`].
pub fn golden_example_holder_half() -> Result<VerificationReport> {
    let jet = golden_jet();
    let m = Modulus::holder(0.5)?;
    let mog = m_omega_g(&jet, &m)?.constant;
    let a = compute_a(&jet, &m, &SearchBox::default())?.constant;
    let (t_star, sup) = golden_reduction_sup();
    let grid = GridSpec::cube(1, -3.0, 3.0, 1201)?;
    let mut rep = VerificationReport::new(grid_tol(&m, &grid), 0);
    rep.note("M_omega_G", mog);
    rep.note("A_f_G", a);
    rep.note("reduction_sup", sup);
    rep.note("reduction_argmax", t_star);
    let root2 = 2f64.sqrt();
    rep.exact(
        "|M_omega(G) - sqrt2|",
        GOLDEN_TOL,
        (mog - root2).abs(),
        Vec::new(),
    );
    rep.exact("A(f,G) lower limit", a, GOLDEN_A_LOWER, Vec::new());
    rep.exact("A(f,G)", GOLDEN_A_UPPER + GOLDEN_TOL, a, Vec::new());
    rep.strict("A(f,G) < M_omega(G)", mog, a);
    rep.exact(
        "|reduction_sup - A(f,G)|",
        GOLDEN_TOL,
        (sup - a).abs(),
        Vec::new(),
    );
    rep.exact("reduction_sup", GOLDEN_A_UPPER, sup, Vec::new());
    let mut cfg = ExtendConfig::new(grid);
    cfg.big_m = Some(a);
    let ext = extend(&jet, &m, Variant::Holder, &cfg)?;
    let inner = verify_extension(&jet, &m, &ext, 10_000, 0)?;
    rep.absorb("extension/", inner);
    Ok(rep)
}
