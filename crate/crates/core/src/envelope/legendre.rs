//! Lower convex hulls and discrete Legendre transforms on grids.

use crate::grid::GridFunction;

/// Lower convex hull of the points `(xs[i], ys[i])` (`xs` increasing),
/// evaluated at every `xs[i]`.
pub fn lower_hull_values(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n <= 2 {
        return ys.to_vec();
    }
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b when it lies on or above the chord a–i
            let lhs = (ys[b] - ys[a]) * (xs[i] - xs[a]);
            let rhs = (ys[i] - ys[a]) * (xs[b] - xs[a]);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; n];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        out[a] = ys[a];
        for k in a + 1..b {
            let t = (xs[k] - xs[a]) / (xs[b] - xs[a]);
            out[k] = ys[a] + t * (ys[b] - ys[a]);
        }
    }
    out[n - 1] = ys[n - 1];
    out
}

/// `max_i (s·xs[i] + w[i])` for every slope `s`, by a pointer walk over the
/// upper hull of `(xs, w)`.
fn max_plus_affine(xs: &[f64], w: &[f64], slopes: &[f64]) -> Vec<f64> {
    // upper hull of (x, w) = negated lower hull of (x, −w)
    let n = xs.len();
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let lhs = (w[b] - w[a]) * (xs[i] - xs[a]);
            let rhs = (w[i] - w[a]) * (xs[b] - xs[a]);
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    // slopes ascending: the maximizer moves right along the hull
    let mut out = Vec::with_capacity(slopes.len());
    let mut k = 0;
    for &s in slopes {
        while k + 1 < hull.len()
            && s * xs[hull[k + 1]] + w[hull[k + 1]] >= s * xs[hull[k]] + w[hull[k]]
        {
            k += 1;
        }
        out.push(s * xs[hull[k]] + w[hull[k]]);
    }
    out
}

/// Separable transform `W(s) = max_x (⟨s, x⟩ + w(x))` over a tensor grid.
/// `axes[k]` are the source abscissae and `targets[k]` the (ascending)
/// target slopes along axis `k`; `w` is row-major over `axes`.
pub fn separable_max_plus(axes: &[Vec<f64>], w: &[f64], targets: &[Vec<f64>]) -> Vec<f64> {
    let n = axes.len();
    let mut shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut cur = w.to_vec();
    for k in 0..n {
        let inner: usize = shape[k + 1..].iter().product();
        let outer: usize = shape[..k].iter().product();
        let len = shape[k];
        let tl = targets[k].len();
        let mut next = vec![0.0; outer * tl * inner];
        let mut column = vec![0.0; len];
        for o in 0..outer {
            for i in 0..inner {
                for (j, c) in column.iter_mut().enumerate() {
                    *c = cur[(o * len + j) * inner + i];
                }
                let res = max_plus_affine(&axes[k], &column, &targets[k]);
                for (j, v) in res.into_iter().enumerate() {
                    next[(o * tl + j) * inner + i] = v;
                }
            }
        }
        cur = next;
        shape[k] = tl;
    }
    cur
}

/// Convex minorant of `v` obtained as the discrete biconjugate over a slope
/// grid that spans the finite-difference slopes of `v` along each axis with
/// `slope_factor` times as many slopes as nodes. Always a lower bound of the
/// convex envelope on the grid; the gap shrinks as the slope grid is refined.
pub fn discrete_biconjugate(v: &GridFunction, slope_factor: usize) -> Vec<f64> {
    let spec = &v.spec;
    let n = spec.dim();
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            (0..spec.shape[k])
                .map(|i| {
                    let mut idx = vec![0; n];
                    idx[k] = i;
                    spec.coord(&idx)[k]
                })
                .collect()
        })
        .collect();
    let h = spec.spacing();
    let strides = spec.strides();
    let mut slopes = Vec::with_capacity(n);
    for k in 0..n {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for flat in 0..spec.len() {
            if spec.multi_index(flat)[k] + 1 < spec.shape[k] {
                let d = (v.values[flat + strides[k]] - v.values[flat]) / h[k];
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        let count = (slope_factor * spec.shape[k]).max(2);
        slopes.push(
            (0..count)
                .map(|j| lo + (hi - lo) * j as f64 / (count - 1) as f64)
                .collect::<Vec<f64>>(),
        );
    }
    let neg: Vec<f64> = v.values.iter().map(|x| -x).collect();
    let conj = separable_max_plus(&axes, &neg, &slopes);
    let neg_conj: Vec<f64> = conj.iter().map(|x| -x).collect();
    let bi = separable_max_plus(&slopes, &neg_conj, &axes);
    // never above v itself
    bi.into_iter()
        .zip(&v.values)
        .map(|(b, x)| b.min(*x))
        .collect()
}
