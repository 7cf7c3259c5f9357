//! Largest discrete `Cφ`-paraconvex minorant on a grid.
//!
//! Along a lattice line with step length `δ`, a node `x` must satisfy, for
//! all steps `s, t ≥ 1` that stay on the grid,
//!
//! `u(x) ≤ [t u(x + s d) + s u(x − t d)]/(s + t) + C st/(s + t)² φ((s + t) δ)`.
//!
//! The operator `T` replaces `u(x)` by the smallest right-hand side, keeps it
//! above the floor and, optionally, within a Lipschitz cap of its stencil
//! neighbours. Sweeps solve each line to its own fixed point, lines of one
//! direction after another, until a full sweep moves no node by more than
//! `eps`; a last parallel pass of `T` from the frozen iterate measures the
//! residual.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DirectionSet, GridFunction, GridSpec};
use crate::modulus::Profile;

/// Controls for [`paraconvex_envelope_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeOptions {
    pub stencil: DirectionSet,
    pub eps: f64,
    pub max_sweeps: usize,
    /// Enforce `|u(x) − u(x ± d)| ≤ L δ` along the stencil.
    pub lipschitz_cap: Option<f64>,
}

impl EnvelopeOptions {
    pub fn new(dim: usize, eps: f64) -> Self {
        EnvelopeOptions {
            stencil: DirectionSet::axes_and_face_diagonals(dim),
            eps,
            max_sweeps: 100_000,
            lipschitz_cap: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeOutcome {
    pub result: GridFunction,
    pub sweeps: usize,
    /// `max (u − T u)` over the nodes after the last sweep.
    pub residual: f64,
}

/// All maximal lines of a grid along one direction.
pub(crate) struct LineSet {
    pub lines: Vec<Vec<usize>>,
    /// `1/span` and `C φ(span δ)/span²` by span.
    recip: Vec<f64>,
    weight: Vec<f64>,
    cap_step: f64,
}

impl LineSet {
    pub(crate) fn new<P: Profile>(
        spec: &GridSpec,
        dir: &[i64],
        delta: f64,
        c: f64,
        profile: &P,
        cap: Option<f64>,
    ) -> Self {
        let lines = build_lines(spec, dir);
        let longest = lines.iter().map(Vec::len).max().unwrap_or(0);
        let mut recip = vec![0.0; longest + 1];
        let mut weight = vec![0.0; longest + 1];
        for span in 1..=longest {
            recip[span] = 1.0 / span as f64;
            weight[span] = c * profile.phi(span as f64 * delta) / (span * span) as f64;
        }
        LineSet {
            lines,
            recip,
            weight,
            cap_step: cap.map_or(f64::INFINITY, |l| l * delta),
        }
    }

    /// `min(u[k], min over i < k < j of the three-point bound, cap bounds)`.
    #[inline]
    #[allow(clippy::needless_range_loop)]
    fn bound_at(&self, vals: &[f64], k: usize) -> f64 {
        let len = vals.len();
        let mut best = vals[k];
        if k > 0 {
            best = best.min(vals[k - 1] + self.cap_step);
        }
        if k + 1 < len {
            best = best.min(vals[k + 1] + self.cap_step);
        }
        for i in 0..k {
            let ui = vals[i];
            let t = (k - i) as f64;
            for j in k + 1..len {
                let span = j - i;
                let s = (j - k) as f64;
                let v = ui + (vals[j] - ui) * t * self.recip[span] + s * t * self.weight[span];
                if v < best {
                    best = v;
                }
            }
        }
        best
    }

    /// Solve one line in place to its fixed point; returns the largest change.
    fn solve_line(&self, vals: &mut [f64], floor: &[f64], eps: f64) -> f64 {
        let len = vals.len();
        let mut total: f64 = 0.0;
        for pass in 0..10_000 {
            let mut change: f64 = 0.0;
            let order: Box<dyn Iterator<Item = usize>> = if pass % 2 == 0 {
                Box::new(0..len)
            } else {
                Box::new((0..len).rev())
            };
            for k in order {
                let new = self.bound_at(vals, k).max(floor[k]);
                if new < vals[k] {
                    change = change.max(vals[k] - new);
                    vals[k] = new;
                }
            }
            total = total.max(change);
            if change <= eps {
                break;
            }
        }
        total
    }
}

fn build_lines(spec: &GridSpec, dir: &[i64]) -> Vec<Vec<usize>> {
    let n = spec.dim();
    let shape: Vec<i64> = spec.shape.iter().map(|&s| s as i64).collect();
    let strides = spec.strides();
    let inside = |idx: &[i64]| idx.iter().zip(&shape).all(|(&i, &s)| i >= 0 && i < s);
    let mut lines = Vec::new();
    for flat in 0..spec.len() {
        let idx: Vec<i64> = spec
            .multi_index(flat)
            .into_iter()
            .map(|v| v as i64)
            .collect();
        let prev: Vec<i64> = idx.iter().zip(dir).map(|(i, d)| i - d).collect();
        if inside(&prev) {
            continue;
        }
        let mut line = Vec::new();
        let mut cur = idx;
        while inside(&cur) {
            line.push((0..n).map(|k| cur[k] as usize * strides[k]).sum());
            for k in 0..n {
                cur[k] += dir[k];
            }
        }
        if line.len() >= 3 {
            lines.push(line);
        }
    }
    lines
}

/// The largest function `u ≤ u0`, `u ≥ floor`, that satisfies the discrete
/// `Cφ`-paraconvexity inequality along every stencil line (and the optional
/// Lipschitz cap).
pub fn paraconvex_envelope_grid<P: Profile>(
    u0: &GridFunction,
    floor: &GridFunction,
    c: f64,
    profile: &P,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeOutcome> {
    if u0.spec != floor.spec {
        return Err(Error::InvalidGrid(
            "u0 and floor live on different grids".into(),
        ));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!(
            "paraconvexity constant must be finite and ≥ 0, got {c}"
        )));
    }
    let spec = &u0.spec;
    if opts.stencil.dirs.iter().any(|d| d.len() != spec.dim()) {
        return Err(Error::InvalidGrid(
            "stencil dimension differs from the grid".into(),
        ));
    }
    let scale = u0.sup_norm().max(floor.sup_norm()).max(1.0);
    if let Some(i) = (0..spec.len()).find(|&i| floor.values[i] > u0.values[i] + 1e-12 * scale) {
        return Err(Error::Numerical(format!(
            "floor exceeds the initial function at node {i}"
        )));
    }
    let spacing = spec.spacing();
    let sets: Vec<LineSet> = opts
        .stencil
        .dirs
        .iter()
        .map(|d| {
            let delta = DirectionSet::step_length(d, &spacing, u0.norm);
            LineSet::new(spec, d, delta, c, profile, opts.lipschitz_cap)
        })
        .collect();

    let floor_v = &floor.values;
    let mut u: Vec<f64> = u0
        .values
        .iter()
        .zip(floor_v)
        .map(|(a, b)| a.max(*b))
        .collect();
    // a line is re-solved only when one of its nodes moved after its last solve
    let mut epoch = 1usize;
    let mut touched = vec![epoch; u.len()];
    let mut solved_at: Vec<Vec<usize>> = sets.iter().map(|s| vec![0; s.lines.len()]).collect();
    let mut sweeps = 0;
    loop {
        if sweeps >= opts.max_sweeps {
            let residual = jacobi_residual(&u, floor_v, &sets);
            return Err(Error::NoConvergence { sweeps, residual });
        }
        sweeps += 1;
        let mut change: f64 = 0.0;
        for (set, stamps) in sets.iter().zip(solved_at.iter_mut()) {
            epoch += 1;
            // lines of one direction are disjoint
            let solved: Vec<Option<(Vec<f64>, f64)>> = set
                .lines
                .par_iter()
                .zip(stamps.par_iter())
                .map(|(line, &last)| {
                    if line.iter().all(|&i| touched[i] <= last) {
                        return None;
                    }
                    let mut vals: Vec<f64> = line.iter().map(|&i| u[i]).collect();
                    let fl: Vec<f64> = line.iter().map(|&i| floor_v[i]).collect();
                    let moved = set.solve_line(&mut vals, &fl, opts.eps);
                    Some((vals, moved))
                })
                .collect();
            for ((line, stamp), out) in set.lines.iter().zip(stamps.iter_mut()).zip(solved) {
                let Some((vals, moved)) = out else { continue };
                *stamp = epoch;
                change = change.max(moved);
                for (&i, v) in line.iter().zip(vals) {
                    if v != u[i] {
                        u[i] = v;
                        touched[i] = epoch;
                    }
                }
            }
        }
        if change <= opts.eps {
            break;
        }
    }
    let residual = jacobi_residual(&u, floor_v, &sets);
    Ok(EnvelopeOutcome {
        result: GridFunction {
            spec: spec.clone(),
            values: u,
            norm: u0.norm,
        },
        sweeps,
        residual,
    })
}

/// `max (u − max(floor, T u))` evaluated from the frozen iterate.
fn jacobi_residual(u: &[f64], floor: &[f64], sets: &[LineSet]) -> f64 {
    sets.iter()
        .map(|set| {
            set.lines
                .par_iter()
                .map(|line| {
                    let vals: Vec<f64> = line.iter().map(|&i| u[i]).collect();
                    (0..line.len())
                        .map(|k| vals[k] - set.bound_at(&vals, k).max(floor[line[k]]))
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
