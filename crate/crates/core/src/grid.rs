//! Regular box grids in up to four dimensions and scalar fields on them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::jet::MAX_DIM;
use crate::vecops::norm_p;

/// Norm used for distances on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormMode {
    Euclidean,
    Lp { p: f64 },
}

impl NormMode {
    pub fn exponent(&self) -> f64 {
        match self {
            NormMode::Euclidean => 2.0,
            NormMode::Lp { p } => *p,
        }
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        norm_p(v, self.exponent())
    }

    /// The dual norm, used for gradients.
    pub fn dual_norm(&self, v: &[f64]) -> f64 {
        let p = self.exponent();
        norm_p(v, p / (p - 1.0))
    }
}

/// Axis-aligned box with a uniform node count per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let n = lo.len();
        if n == 0 || n > MAX_DIM || hi.len() != n || shape.len() != n {
            return Err(Error::InvalidGrid(format!(
                "box and resolution must share a dimension in 1..={MAX_DIM}"
            )));
        }
        for k in 0..n {
            if !(lo[k].is_finite() && hi[k].is_finite() && lo[k] < hi[k]) {
                return Err(Error::InvalidGrid(format!("axis {k}: degenerate box")));
            }
            if shape[k] < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: need at least 3 nodes"
                )));
            }
        }
        Ok(GridSpec { lo, hi, shape })
    }

    /// The cube `[lo, hi]ⁿ` with `res` nodes per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, res: usize) -> Result<Self> {
        GridSpec::new(vec![lo; dim], vec![hi; dim], vec![res; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| (self.hi[k] - self.lo[k]) / (self.shape[k] - 1) as f64)
            .collect()
    }

    /// Largest spacing over the axes.
    pub fn h(&self) -> f64 {
        self.spacing().into_iter().fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|k| (self.hi[k] - self.lo[k]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.dim();
        let mut s = vec![1; n];
        for k in (0..n.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.shape[k + 1];
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn coord(&self, idx: &[usize]) -> Vec<f64> {
        let h = self.spacing();
        (0..self.dim())
            .map(|k| {
                if idx[k] + 1 == self.shape[k] {
                    self.hi[k]
                } else {
                    self.lo[k] + idx[k] as f64 * h[k]
                }
            })
            .collect()
    }

    pub fn coord_flat(&self, flat: usize) -> Vec<f64> {
        self.coord(&self.multi_index(flat))
    }

    /// Nearest node to `p`. Fails with [`Error::PointOffGrid`] when `p` is
    /// outside the box or farther than half a spacing from every node on
    /// some axis.
    pub fn snap(&self, p: &[f64]) -> Result<Vec<usize>> {
        let h = self.spacing();
        let mut idx = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let r = (p[k] - self.lo[k]) / h[k];
            let i = r.round();
            if !(i >= 0.0 && i <= (self.shape[k] - 1) as f64) || (r - i).abs() > 0.5 + 1e-9 {
                return Err(Error::PointOffGrid { point: p.to_vec() });
            }
            idx.push(i as usize);
        }
        Ok(idx)
    }

    /// The same lattice extended by `pad[k]` nodes on both sides of axis `k`.
    pub fn padded(&self, pad: &[usize]) -> Result<GridSpec> {
        let h = self.spacing();
        GridSpec::new(
            (0..self.dim())
                .map(|k| self.lo[k] - pad[k] as f64 * h[k])
                .collect(),
            (0..self.dim())
                .map(|k| self.hi[k] + pad[k] as f64 * h[k])
                .collect(),
            (0..self.dim())
                .map(|k| self.shape[k] + 2 * pad[k])
                .collect(),
        )
    }

    /// Flat index in `self.padded(pad)` of every node of `self`, in order.
    pub fn indices_in_padded(&self, pad: &[usize]) -> Vec<usize> {
        let wide: Vec<usize> = (0..self.dim())
            .map(|k| self.shape[k] + 2 * pad[k])
            .collect();
        (0..self.len())
            .map(|flat| {
                let idx = self.multi_index(flat);
                let mut out = 0;
                for k in 0..self.dim() {
                    out = out * wide[k] + idx[k] + pad[k];
                }
                out
            })
            .collect()
    }

    /// True when `p` coincides with its snapped node up to rounding.
    pub fn on_node(&self, p: &[f64], idx: &[usize]) -> bool {
        let h = self.spacing();
        let c = self.coord(idx);
        (0..self.dim()).all(|k| (p[k] - c[k]).abs() <= 1e-9 * h[k])
    }
}

/// Integer lattice directions, one per `±` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub dirs: Vec<Vec<i64>>,
}

impl DirectionSet {
    pub fn axes(dim: usize) -> Self {
        let dirs = (0..dim)
            .map(|k| (0..dim).map(|j| i64::from(j == k)).collect())
            .collect();
        DirectionSet { dirs }
    }

    /// Axes and the diagonals of every coordinate plane.
    pub fn axes_and_face_diagonals(dim: usize) -> Self {
        let mut set = Self::axes(dim);
        for a in 0..dim {
            for b in a + 1..dim {
                for sign in [1, -1] {
                    let mut d = vec![0; dim];
                    d[a] = 1;
                    d[b] = sign;
                    set.dirs.push(d);
                }
            }
        }
        set
    }

    /// Every primitive direction with entries in `{−k..k}`.
    pub fn lattice(dim: usize, k: i64) -> Self {
        let mut dirs = Vec::new();
        let side = (2 * k + 1) as usize;
        for flat in 0..side.pow(dim as u32) {
            let mut d = Vec::with_capacity(dim);
            let mut r = flat;
            for _ in 0..dim {
                d.push((r % side) as i64 - k);
                r /= side;
            }
            let first_nonzero = d.iter().find(|&&v| v != 0);
            if first_nonzero.is_none_or(|&v| v < 0) {
                continue;
            }
            let g = d.iter().fold(0, |a, &v| gcd(a, v.abs()));
            if g == 1 {
                dirs.push(d);
            }
        }
        DirectionSet { dirs }
    }

    /// Physical length of a direction step.
    pub fn step_length(d: &[i64], spacing: &[f64], norm: NormMode) -> f64 {
        let v: Vec<f64> = d.iter().zip(spacing).map(|(&a, h)| a as f64 * h).collect();
        norm.norm(&v)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A scalar field sampled on the nodes of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub spec: GridSpec,
    pub values: Vec<f64>,
    pub norm: NormMode,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>, norm: NormMode) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite value at node {i}")));
        }
        Ok(GridFunction { spec, values, norm })
    }

    /// Evaluate `f` at every node.
    pub fn from_fn(spec: GridSpec, norm: NormMode, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..spec.len()).map(|i| f(&spec.coord_flat(i))).collect();
        GridFunction { spec, values, norm }
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.spec.flat_index(idx)]
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Gradient at every node: second-order central differences inside,
    /// second-order one-sided differences on the faces of the box.
    pub fn gradient(&self) -> Vec<Vec<f64>> {
        let spec = &self.spec;
        let h = spec.spacing();
        let strides = spec.strides();
        let u = &self.values;
        (0..spec.len())
            .map(|flat| {
                let idx = spec.multi_index(flat);
                (0..spec.dim())
                    .map(|k| {
                        let s = strides[k];
                        let i = idx[k];
                        let last = spec.shape[k] - 1;
                        if i == 0 {
                            (-3.0 * u[flat] + 4.0 * u[flat + s] - u[flat + 2 * s]) / (2.0 * h[k])
                        } else if i == last {
                            (3.0 * u[flat] - 4.0 * u[flat - s] + u[flat - 2 * s]) / (2.0 * h[k])
                        } else {
                            (u[flat + s] - u[flat - s]) / (2.0 * h[k])
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Multilinear interpolation at an arbitrary point of the box.
    pub fn interpolate(&self, p: &[f64]) -> Result<f64> {
        let spec = &self.spec;
        let h = spec.spacing();
        let n = spec.dim();
        let mut base = Vec::with_capacity(n);
        let mut frac = Vec::with_capacity(n);
        for k in 0..n {
            let r = (p[k] - spec.lo[k]) / h[k];
            if !(r >= -1e-9 && r <= (spec.shape[k] - 1) as f64 + 1e-9) {
                return Err(Error::PointOffGrid { point: p.to_vec() });
            }
            let i = (r.floor().max(0.0) as usize).min(spec.shape[k] - 2);
            base.push(i);
            frac.push((r - i as f64).clamp(0.0, 1.0));
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = base.clone();
            for k in 0..n {
                if corner >> k & 1 == 1 {
                    idx[k] += 1;
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * self.at(&idx);
            }
        }
        Ok(acc)
    }

    /// CSV with one row per node: coordinates, value, gradient components.
    pub fn write_csv<W: Write>(&self, grad: &[Vec<f64>], mut out: W) -> std::io::Result<()> {
        let n = self.spec.dim();
        let mut header: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
        header.push("F".into());
        header.extend((0..n).map(|k| format!("dF{k}")));
        writeln!(out, "{}", header.join(","))?;
        for (flat, (&v, g)) in self.values.iter().zip(grad).enumerate() {
            let mut row: Vec<String> = self.spec.coord_flat(flat).into_iter().map(fmt17).collect();
            row.push(fmt17(v));
            row.extend(g.iter().map(|&x| fmt17(x)));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}
