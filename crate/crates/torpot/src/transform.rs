//! Legendre transforms on tensor grids.
//!
//! The conjugate of a function given on a tensor grid factors into
//! one-dimensional passes:
//!
//! ```text
//! G(s) = max_x <s, x> - F(x)
//!      = max_{x_n} ( s_n x_n + ... max_{x_1} ( s_1 x_1 - F(x) ) ... )
//! ```
//!
//! so each pass conjugates along one axis with all other coordinates held
//! fixed. The per-line kernel builds the lower convex hull of the samples
//! and walks it with a second pointer as the dual node increases, which
//! reproduces the brute-force maximum over the same node set at a cost
//! linear in nodes.
//!
//! Truncation is handled by a schedule of radii: the transform is taken
//! over nested windows [-R_k, R_k] (intersected with the function's own
//! box) that share one node lattice, so values at successive radii are
//! maxima over nested node sets and their difference isolates genuine
//! growth. Dual nodes whose last two values agree to `tol_saturation` are
//! marked finite; the rest are treated as outside the effective domain of
//! the conjugate.

use rayon::prelude::*;

use crate::convexfn::ConvexFunctionRep;
use crate::error::{Error, Result};
use crate::grid::{Axis, TensorGrid};

/// Dual-side inflation snapped so the uninflated box corners are grid
/// nodes: 5% padding per side needs cell counts divisible by 22.
pub const DUAL_INFLATE: f64 = 0.05;
/// Relative saturation tolerance deciding the finite mask.
pub const TOL_SATURATION: f64 = 1e-6;

/// How densely to sample the primal windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimalResolution {
    /// Cells across the largest window, per axis.
    Cells(usize),
    /// Fixed lattice spacing shared by all axes.
    Spacing(f64),
}

/// Transform parameters. `dual_box` pins the dual grid (typically to the
/// bounding box of a known moment polytope); otherwise the box is taken
/// from the range of difference quotients of the samples.
#[derive(Debug, Clone)]
pub struct TransformConfig {
    pub r_schedule: Vec<f64>,
    pub resolution: PrimalResolution,
    pub dual_cells: usize,
    pub dual_inflate: f64,
    pub dual_box: Option<Vec<(f64, f64)>>,
    pub tol_saturation: f64,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            r_schedule: vec![8.0, 16.0, 32.0],
            resolution: PrimalResolution::Cells(1024),
            dual_cells: 512,
            dual_inflate: DUAL_INFLATE,
            dual_box: None,
            tol_saturation: TOL_SATURATION,
        }
    }
}

/// A conjugate computed over a truncation schedule: one value array per
/// radius, all on the same dual grid, plus the finite mask decided by the
/// last two levels.
#[derive(Debug, Clone)]
pub struct DualFunction {
    pub grid: TensorGrid,
    /// Values per schedule entry, ascending radii; the last entry is the
    /// working conjugate.
    pub levels: Vec<Vec<f64>>,
    pub r_schedule: Vec<f64>,
    pub finite_mask: Vec<bool>,
    /// Node extents of the primal window actually used at each radius.
    pub windows: Vec<Vec<(f64, f64)>>,
}

impl DualFunction {
    pub fn values(&self) -> &[f64] {
        self.levels.last().expect("schedule is non-empty")
    }

    pub fn prev_values(&self) -> &[f64] {
        &self.levels[self.levels.len() - 2]
    }

    /// Working values with +inf substituted outside the finite mask, the
    /// form consumed by reverse transforms and grid files.
    pub fn masked_values(&self) -> Vec<f64> {
        self.values()
            .iter()
            .zip(&self.finite_mask)
            .map(|(&v, &m)| if m { v } else { f64::INFINITY })
            .collect()
    }

    pub fn finite_count(&self) -> usize {
        self.finite_mask.iter().filter(|&&m| m).count()
    }

    /// Largest masked value (the numeric sup of the conjugate).
    pub fn sup(&self) -> Option<f64> {
        self.values()
            .iter()
            .zip(&self.finite_mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

// === one-dimensional kernel =================================================

/// Conjugate of samples (xs, fs) evaluated at ascending dual nodes `ss`:
/// out[j] = max_i s_j * xs[i] - fs[i], skipping non-finite samples. The
/// lower hull keeps exactly the samples that can attain the maximum, and
/// the argmax index is monotone in s, so one left-to-right walk suffices.
pub(crate) fn conjugate_line(xs: &[f64], fs: &[f64], ss: &[f64], out: &mut [f64]) {
    debug_assert_eq!(xs.len(), fs.len());
    debug_assert_eq!(ss.len(), out.len());
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len().min(64));
    for i in 0..xs.len() {
        if !fs[i].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // pop b when slope(a,b) >= slope(b,i): b is not a strict
            // lower-hull vertex and an endpoint attains any tied maximum
            if (fs[b] - fs[a]) * (xs[i] - xs[b]) >= (fs[i] - fs[b]) * (xs[b] - xs[a]) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    if hull.is_empty() {
        out.fill(f64::NEG_INFINITY);
        return;
    }
    let mut ptr = 0usize;
    for (j, &s) in ss.iter().enumerate() {
        while ptr + 1 < hull.len() {
            let cur = s * xs[hull[ptr]] - fs[hull[ptr]];
            let nxt = s * xs[hull[ptr + 1]] - fs[hull[ptr + 1]];
            if nxt >= cur {
                ptr += 1;
            } else {
                break;
            }
        }
        out[j] = s * xs[hull[ptr]] - fs[hull[ptr]];
    }
}

// === separable passes =======================================================

/// One conjugation pass along `axis`. The value array has shape `shape`
/// (row-major); axes before `axis` already live on the dual side. When
/// `negate_input` is set the pass conjugates -values, which is how the
/// partial maxima chain together after the first pass.
fn transform_pass(
    shape: &[usize],
    values: &[f64],
    axis: usize,
    in_nodes: &[f64],
    out_nodes: &[f64],
    negate_input: bool,
) -> (Vec<usize>, Vec<f64>) {
    let n = shape.len();
    debug_assert_eq!(shape[axis], in_nodes.len());
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let lines = outer * inner;
    let m = in_nodes.len();
    let p = out_nodes.len();

    let line_outputs: Vec<Vec<f64>> = (0..lines)
        .into_par_iter()
        .map(|l| {
            let o = l / inner;
            let i = l % inner;
            let base = o * (m * inner) + i;
            let mut fs = Vec::with_capacity(m);
            for t in 0..m {
                let v = values[base + t * inner];
                fs.push(if negate_input { -v } else { v });
            }
            let mut out = vec![0.0f64; p];
            conjugate_line(in_nodes, &fs, out_nodes, &mut out);
            out
        })
        .collect();

    let mut out_shape = shape.to_vec();
    out_shape[axis] = p;
    let mut out_values = vec![0.0f64; outer * p * inner];
    for (l, line) in line_outputs.iter().enumerate() {
        let o = l / inner;
        let i = l % inner;
        let base = o * (p * inner) + i;
        for (t, &v) in line.iter().enumerate() {
            out_values[base + t * inner] = v;
        }
    }
    debug_assert_eq!(out_shape.len(), n);
    (out_shape, out_values)
}

/// Conjugate values sampled on per-axis node lists, evaluated on every
/// node of `out_grid`. Agrees with the brute-force maximum over the same
/// nodes up to rounding.
pub fn conjugate_over_nodes(
    axes: &[Vec<f64>],
    values: &[f64],
    out_grid: &TensorGrid,
) -> Vec<f64> {
    let n = axes.len();
    assert_eq!(out_grid.dim(), n, "dual grid dimension mismatch");
    let mut shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let expected: usize = shape.iter().product();
    assert_eq!(values.len(), expected, "value count does not match node shape");
    let mut vals = values.to_vec();
    for k in 0..n {
        let out_nodes = out_grid.axes()[k].nodes();
        let (s, v) = transform_pass(&shape, &vals, k, &axes[k], &out_nodes, k > 0);
        shape = s;
        vals = v;
    }
    vals
}

/// Conjugate of grid data onto another grid; thin wrapper over
/// `conjugate_over_nodes`.
pub fn grid_conjugate(in_grid: &TensorGrid, values: &[f64], out_grid: &TensorGrid) -> Vec<f64> {
    let axes: Vec<Vec<f64>> = in_grid.axes().iter().map(|a| a.nodes()).collect();
    conjugate_over_nodes(&axes, values, out_grid)
}

// === windowed transform =====================================================

struct Lattice {
    anchor: f64,
    step: f64,
    /// Inclusive index range of the largest window.
    full: (i64, i64),
}

impl Lattice {
    fn clip(&self, lo: f64, hi: f64) -> Option<(i64, i64)> {
        let eps = 1e-9;
        let i0 = ((lo - self.anchor) / self.step - eps).ceil() as i64;
        let i1 = ((hi - self.anchor) / self.step + eps).floor() as i64;
        let i0 = i0.max(self.full.0);
        let i1 = i1.min(self.full.1);
        if i1 > i0 {
            Some((i0, i1))
        } else {
            None
        }
    }

    fn nodes(&self, range: (i64, i64)) -> Vec<f64> {
        (range.0..=range.1).map(|i| self.anchor + i as f64 * self.step).collect()
    }
}

fn validate_config(cfg: &TransformConfig, dim: usize) -> Result<()> {
    if cfg.r_schedule.len() < 2 {
        return Err(Error::Input(
            "truncation schedule needs at least two radii to decide saturation".into(),
        ));
    }
    if cfg.r_schedule.windows(2).any(|w| w[0] >= w[1]) || cfg.r_schedule[0] <= 0.0 {
        return Err(Error::Input("truncation radii must be positive and increasing".into()));
    }
    match cfg.resolution {
        PrimalResolution::Cells(c) if c < 2 => {
            return Err(Error::Input("primal resolution needs at least 2 cells".into()))
        }
        PrimalResolution::Spacing(h) if !(h > 0.0 && h.is_finite()) => {
            return Err(Error::Input("primal spacing must be positive".into()))
        }
        _ => {}
    }
    if cfg.dual_cells < 2 {
        return Err(Error::Input("dual grid needs at least 2 cells".into()));
    }
    if let Some(b) = &cfg.dual_box {
        if b.len() != dim {
            return Err(Error::Dimension(format!(
                "dual box has {} axes, function has {dim}",
                b.len()
            )));
        }
        if b.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
            return Err(Error::Input("dual box bounds must be finite and ordered".into()));
        }
    }
    Ok(())
}

/// Round a cell count up so that 5%-per-side inflation puts the original
/// box corners exactly on nodes.
fn snap_dual_cells(cells: usize, inflate: f64) -> usize {
    if (inflate - DUAL_INFLATE).abs() < 1e-12 {
        cells.div_ceil(22) * 22
    } else {
        cells
    }
}

fn build_dual_grid(dual_box: &[(f64, f64)], cfg: &TransformConfig) -> Result<TensorGrid> {
    let cells = snap_dual_cells(cfg.dual_cells, cfg.dual_inflate);
    let mut axes = Vec::with_capacity(dual_box.len());
    for &(lo, hi) in dual_box {
        let (lo, hi) = if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let pad = cfg.dual_inflate * (hi - lo);
        axes.push(Axis::new(lo - pad, hi + pad, cells + 1)?);
    }
    TensorGrid::new(axes)
}

/// Range of difference quotients of the samples along each axis; the
/// fallback dual box when no polytope pins one.
fn slope_box(axes: &[Vec<f64>], values: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = axes.len();
    let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let inner: usize = shape[k + 1..].iter().product();
        let outer: usize = shape[..k].iter().product();
        let m = shape[k];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for o in 0..outer {
            for i in 0..inner {
                let base = o * (m * inner) + i;
                for t in 0..m - 1 {
                    let a = values[base + t * inner];
                    let b = values[base + (t + 1) * inner];
                    if a.is_finite() && b.is_finite() {
                        let q = (b - a) / (axes[k][t + 1] - axes[k][t]);
                        lo = lo.min(q);
                        hi = hi.max(q);
                    }
                }
            }
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Precondition(format!(
                "no finite sample pair along axis {k}; cannot bound the dual domain"
            )));
        }
        out.push((lo, hi));
    }
    Ok(out)
}

fn sample_closed(f: &ConvexFunctionRep, axes: &[Vec<f64>]) -> Vec<f64> {
    let n = axes.len();
    let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let total: usize = shape.iter().product();
    let mut values = vec![0.0f64; total];
    let chunk = 1 << 12;
    values
        .par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(c, slab)| {
            let mut idx = vec![0usize; n];
            let mut x = vec![0.0f64; n];
            for (t, slot) in slab.iter_mut().enumerate() {
                let mut flat = c * chunk + t;
                for k in (0..n).rev() {
                    idx[k] = flat % shape[k];
                    flat /= shape[k];
                }
                for k in 0..n {
                    x[k] = axes[k][idx[k]];
                }
                let v = f.eval(&x);
                // non-finite and NaN samples both mean "outside the
                // effective domain" and place no constraint on the sup
                *slot = if v.is_finite() { v } else { f64::INFINITY };
            }
        });
    values
}

/// Windowed Legendre transform of `f` over the truncation schedule in
/// `cfg`. All windows share one node lattice per axis, so each level's
/// values dominate the previous level's node-for-node and the saturation
/// test in the finite mask sees only real growth.
pub fn legendre_transform(f: &ConvexFunctionRep, cfg: &TransformConfig) -> Result<DualFunction> {
    let n = f.dim();
    validate_config(cfg, n)?;
    let r_last = *cfg.r_schedule.last().expect("non-empty schedule");

    // one lattice per axis, fixed by the largest window
    let mut lattices = Vec::with_capacity(n);
    if let Some((grid, _)) = f.grid_data() {
        for ax in grid.axes() {
            lattices.push(Lattice {
                anchor: ax.min,
                step: ax.step(),
                full: (0, ax.count as i64 - 1),
            });
        }
    } else {
        for k in 0..n {
            let (wlo, whi) = f.window()[k];
            let lo = wlo.max(-r_last);
            let hi = whi.min(r_last);
            if !(lo < hi) {
                return Err(Error::Precondition(format!(
                    "window on axis {k} does not meet the largest truncation box"
                )));
            }
            let step = match cfg.resolution {
                PrimalResolution::Spacing(h) => h,
                PrimalResolution::Cells(c) => (hi - lo) / c as f64,
            };
            let anchor = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo };
            let eps = 1e-9;
            let i0 = ((lo - anchor) / step - eps).ceil() as i64;
            let i1 = ((hi - anchor) / step + eps).floor() as i64;
            if i1 <= i0 {
                return Err(Error::Precondition(format!(
                    "axis {k}: spacing {step} leaves fewer than two nodes in the window"
                )));
            }
            lattices.push(Lattice { anchor, step, full: (i0, i1) });
        }
    }

    // per-level node index ranges, nested by construction
    let mut level_ranges = Vec::with_capacity(cfg.r_schedule.len());
    for &r in &cfg.r_schedule {
        let mut ranges = Vec::with_capacity(n);
        for (k, lat) in lattices.iter().enumerate() {
            let (wlo, whi) = f.window()[k];
            let range = lat.clip(wlo.max(-r), whi.min(r)).ok_or_else(|| {
                Error::Precondition(format!(
                    "axis {k}: truncation radius {r} leaves fewer than two nodes"
                ))
            })?;
            ranges.push(range);
        }
        level_ranges.push(ranges);
    }

    // samples for the largest window; smaller windows are sub-blocks
    let last_axes: Vec<Vec<f64>> = (0..n)
        .map(|k| lattices[k].nodes(level_ranges.last().unwrap()[k]))
        .collect();
    let last_values = match f.grid_data() {
        Some((grid, vals)) => {
            let ranges = &level_ranges[level_ranges.len() - 1];
            gather_block(grid, vals, ranges)
        }
        None => sample_closed(f, &last_axes),
    };
    if !last_values.iter().any(|v| v.is_finite()) {
        return Err(Error::Precondition(
            "no finite sample in the largest truncation window".into(),
        ));
    }

    let dual_box = match &cfg.dual_box {
        Some(b) => b.clone(),
        None => slope_box(&last_axes, &last_values)?,
    };
    let dual_grid = build_dual_grid(&dual_box, cfg)?;

    let mut levels = Vec::with_capacity(cfg.r_schedule.len());
    let mut windows = Vec::with_capacity(cfg.r_schedule.len());
    for (li, ranges) in level_ranges.iter().enumerate() {
        let axes: Vec<Vec<f64>> = (0..n).map(|k| lattices[k].nodes(ranges[k])).collect();
        let values = if li + 1 == level_ranges.len() {
            last_values.clone()
        } else {
            // sub-block of the cached top-level samples
            let offsets: Vec<usize> = (0..n)
                .map(|k| (ranges[k].0 - level_ranges.last().unwrap()[k].0) as usize)
                .collect();
            let sub_shape: Vec<usize> =
                ranges.iter().map(|&(a, b)| (b - a + 1) as usize).collect();
            let full_shape: Vec<usize> = last_axes.iter().map(|a| a.len()).collect();
            copy_block(&last_values, &full_shape, &offsets, &sub_shape)
        };
        windows.push(
            axes.iter()
                .map(|a| (*a.first().unwrap(), *a.last().unwrap()))
                .collect::<Vec<_>>(),
        );
        levels.push(conjugate_over_nodes(&axes, &values, &dual_grid));
    }

    let last = &levels[levels.len() - 1];
    let prev = &levels[levels.len() - 2];
    let finite_mask: Vec<bool> = last
        .iter()
        .zip(prev)
        .map(|(&g, &gp)| {
            g.is_finite() && gp.is_finite() && (g - gp).abs() <= cfg.tol_saturation * (1.0 + g.abs())
        })
        .collect();

    Ok(DualFunction {
        grid: dual_grid,
        levels,
        r_schedule: cfg.r_schedule.clone(),
        finite_mask,
        windows,
    })
}

/// Conjugate the masked dual values back onto a primal grid.
pub fn biconjugate(dual: &DualFunction, out_grid: &TensorGrid) -> Vec<f64> {
    grid_conjugate(&dual.grid, &dual.masked_values(), out_grid)
}

fn gather_block(grid: &TensorGrid, values: &[f64], ranges: &[(i64, i64)]) -> Vec<f64> {
    let n = grid.dim();
    let shape: Vec<usize> = ranges.iter().map(|&(a, b)| (b - a + 1) as usize).collect();
    let total: usize = shape.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    let mut gidx = vec![0usize; n];
    for _ in 0..total {
        for k in 0..n {
            gidx[k] = ranges[k].0 as usize + idx[k];
        }
        out.push(values[grid.flat(&gidx)]);
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

fn copy_block(
    values: &[f64],
    full_shape: &[usize],
    offsets: &[usize],
    sub_shape: &[usize],
) -> Vec<f64> {
    let n = full_shape.len();
    let total: usize = sub_shape.iter().product();
    let mut strides = vec![1usize; n];
    for k in (0..n - 1).rev() {
        strides[k] = strides[k + 1] * full_shape[k + 1];
    }
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let mut flat = 0usize;
        for k in 0..n {
            flat += (offsets[k] + idx[k]) * strides[k];
        }
        out.push(values[flat]);
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < sub_shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::brute_conjugate;
    use std::sync::Arc;

    fn closed1(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ConvexFunctionRep {
        ConvexFunctionRep::closed(
            1,
            vec![(f64::NEG_INFINITY, f64::INFINITY)],
            Arc::new(move |x: &[f64]| f(x[0])),
        )
    }

    #[test]
    fn line_kernel_matches_brute_force() {
        let xs: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|x| x * x + (x - 0.3).abs()).collect();
        let ss: Vec<f64> = (0..57).map(|j| -5.0 + 10.0 * j as f64 / 56.0).collect();
        let mut out = vec![0.0; ss.len()];
        conjugate_line(&xs, &fs, &ss, &mut out);
        for (j, &s) in ss.iter().enumerate() {
            let brute = xs
                .iter()
                .zip(&fs)
                .map(|(&x, &f)| s * x - f)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (out[j] - brute).abs() <= 1e-12 * (1.0 + brute.abs()),
                "s={s}: fast {} vs brute {brute}",
                out[j]
            );
        }
    }

    #[test]
    fn line_kernel_skips_infinite_samples() {
        let xs = vec![0.0, 1.0, 2.0, 3.0];
        let fs = vec![f64::INFINITY, 1.0, f64::INFINITY, 2.0];
        let ss = vec![-1.0, 0.0, 1.0];
        let mut out = vec![0.0; 3];
        conjugate_line(&xs, &fs, &ss, &mut out);
        assert_eq!(out, vec![-2.0, -1.0, 1.0]);
        // all-infinite input leaves an empty maximum
        let fs = vec![f64::INFINITY; 4];
        conjugate_line(&xs, &fs, &ss, &mut out);
        assert!(out.iter().all(|v| *v == f64::NEG_INFINITY));
    }

    #[test]
    fn separable_passes_match_brute_force_in_2d() {
        let axes: Vec<Vec<f64>> = vec![
            (0..13).map(|i| -1.5 + 0.25 * i as f64).collect(),
            (0..11).map(|i| -1.0 + 0.2 * i as f64).collect(),
        ];
        let mut values = Vec::new();
        for &x in &axes[0] {
            for &y in &axes[1] {
                values.push(0.7 * x * x + 0.4 * y * y + 0.2 * (x - y).abs());
            }
        }
        let dual = TensorGrid::new(vec![
            Axis::new(-3.0, 3.0, 17).unwrap(),
            Axis::new(-2.0, 2.0, 19).unwrap(),
        ])
        .unwrap();
        let fast = conjugate_over_nodes(&axes, &values, &dual);
        for flat in 0..dual.len() {
            let s = dual.point_flat(flat);
            let brute = brute_conjugate(&axes, &values, &s);
            assert!(
                (fast[flat] - brute).abs() <= 1e-12 * (1.0 + brute.abs()),
                "s={s:?}: fast {} vs brute {brute}",
                fast[flat]
            );
        }
    }

    #[test]
    fn quadratic_is_self_dual() {
        let f = closed1(|x| 0.5 * x * x);
        let cfg = TransformConfig {
            resolution: PrimalResolution::Cells(4096),
            dual_cells: 200,
            dual_box: Some(vec![(-4.0, 4.0)]),
            ..TransformConfig::default()
        };
        let dual = legendre_transform(&f, &cfg).unwrap();
        // lattice spacing h = 64/4096; sampling error of the sup is at most h^2/8
        let h: f64 = 64.0 / 4096.0;
        for flat in 0..dual.grid.len() {
            let s = dual.grid.point_flat(flat)[0];
            assert!(dual.finite_mask[flat], "quadratic conjugate is finite at s={s}");
            let err = (dual.values()[flat] - 0.5 * s * s).abs();
            assert!(err <= h * h / 8.0 + 1e-12, "s={s}: error {err}");
        }
    }

    #[test]
    fn exponential_conjugate_and_mask() {
        // conjugate of e^x is s ln s - s for s > 0, 0 at s = 0, +inf for s < 0
        let f = closed1(f64::exp);
        let cfg = TransformConfig {
            resolution: PrimalResolution::Cells(8192),
            dual_cells: 110,
            dual_box: Some(vec![(0.0, 4.0)]),
            ..TransformConfig::default()
        };
        let dual = legendre_transform(&f, &cfg).unwrap();
        for flat in 0..dual.grid.len() {
            let s = dual.grid.point_flat(flat)[0];
            if s < -1e-9 {
                assert!(!dual.finite_mask[flat], "conjugate must blow up at s={s}");
            } else if s > 1e-9 {
                assert!(dual.finite_mask[flat], "finite at s={s}");
                let exact = s * s.ln() - s;
                assert!(
                    (dual.values()[flat] - exact).abs() < 2e-4 * (1.0 + exact.abs()),
                    "s={s}: {} vs {exact}",
                    dual.values()[flat]
                );
            } else {
                // sup_x -e^x = 0 approached as x -> -inf; saturates along the schedule
                assert!(dual.finite_mask[flat], "finite at s=0");
                assert!(dual.values()[flat].abs() < 1e-6);
            }
        }
    }

    #[test]
    fn absolute_value_dualizes_to_interval_indicator() {
        let f = closed1(f64::abs);
        let cfg = TransformConfig {
            resolution: PrimalResolution::Cells(2048),
            dual_cells: 110,
            dual_box: Some(vec![(-1.0, 1.0)]),
            ..TransformConfig::default()
        };
        let dual = legendre_transform(&f, &cfg).unwrap();
        for flat in 0..dual.grid.len() {
            let s = dual.grid.point_flat(flat)[0];
            if s.abs() <= 1.0 + 1e-12 {
                assert!(dual.finite_mask[flat], "indicator is finite at s={s}");
                assert!(dual.values()[flat].abs() < 1e-12, "zero on the interval, s={s}");
            } else {
                assert!(!dual.finite_mask[flat], "infinite outside the interval, s={s}");
            }
        }
        // biconjugate returns |x| exactly at lattice points since the dual
        // grid carries nodes at both endpoints of the interval
        let back_grid =
            TensorGrid::new(vec![Axis::new(-5.0, 5.0, 21).unwrap()]).unwrap();
        let back = biconjugate(&dual, &back_grid);
        for flat in 0..back_grid.len() {
            let x = back_grid.point_flat(flat)[0];
            assert!(
                (back[flat] - x.abs()).abs() < 1e-12 * (1.0 + x.abs()),
                "x={x}: {}",
                back[flat]
            );
        }
    }

    #[test]
    fn dual_grid_snaps_corners_onto_nodes() {
        let f = closed1(f64::abs);
        let cfg = TransformConfig {
            dual_cells: 100, // snaps up to 110
            dual_box: Some(vec![(-1.0, 1.0)]),
            ..TransformConfig::default()
        };
        let dual = legendre_transform(&f, &cfg).unwrap();
        let ax = &dual.grid.axes()[0];
        assert_eq!(ax.count, 111);
        let nodes = ax.nodes();
        let near_minus = nodes.iter().fold(f64::INFINITY, |a, &s| a.min((s + 1.0).abs()));
        let near_plus = nodes.iter().fold(f64::INFINITY, |a, &s| a.min((s - 1.0).abs()));
        assert!(near_minus < 1e-12 && near_plus < 1e-12, "box corners are nodes");
    }

    #[test]
    fn levels_increase_monotonically() {
        let f = closed1(|x| (1.0 + x * x).sqrt());
        let dual = legendre_transform(&f, &TransformConfig::default()).unwrap();
        assert_eq!(dual.levels.len(), 3);
        for flat in 0..dual.grid.len() {
            assert!(
                dual.levels[0][flat] <= dual.levels[1][flat] + 1e-15
                    && dual.levels[1][flat] <= dual.levels[2][flat] + 1e-15,
                "maxima over nested windows cannot decrease"
            );
        }
        for w in dual.windows.windows(2) {
            assert!(w[0][0].0 >= w[1][0].0 && w[0][0].1 <= w[1][0].1, "windows nest");
        }
    }

    #[test]
    fn young_fenchel_inequality_holds_at_lattice_points() {
        // exact at primal lattice nodes: the maximum defining the dual
        // value includes every node, so F(x) + G(s) >= <x, s> with no
        // discretization slack there
        let f = closed1(|x| 0.5 * x * x + 0.3 * x.abs());
        let cfg = TransformConfig {
            dual_box: Some(vec![(-3.0, 3.0)]),
            ..TransformConfig::default()
        };
        let dual = legendre_transform(&f, &cfg).unwrap();
        let h = 64.0 / 1024.0;
        for flat in (0..dual.grid.len()).step_by(7) {
            if !dual.finite_mask[flat] {
                continue;
            }
            let s = dual.grid.point_flat(flat)[0];
            let g = dual.values()[flat];
            for k in [-32i64, -8, 0, 11, 30] {
                let x = k as f64 * h;
                let fx = 0.5 * x * x + 0.3 * x.abs();
                assert!(
                    fx + g >= s * x - 1e-12 * (1.0 + fx.abs() + g.abs()),
                    "Young's inequality fails at x={x}, s={s}"
                );
            }
        }
    }

    #[test]
    fn gridded_input_conjugates_without_resampling() {
        // F sampled on its own grid: transform must use the stored nodes
        let grid = TensorGrid::new(vec![Axis::new(-4.0, 4.0, 257).unwrap()]).unwrap();
        let vals: Vec<f64> = (0..grid.len())
            .map(|k| {
                let x = grid.point_flat(k)[0];
                x.abs().powf(1.5)
            })
            .collect();
        let f = ConvexFunctionRep::gridded(grid.clone(), vals.clone()).unwrap();
        let cfg = TransformConfig {
            r_schedule: vec![2.0, 3.0, 4.0],
            dual_cells: 64,
            dual_inflate: 0.0,
            dual_box: Some(vec![(-2.5, 2.5)]),
            ..TransformConfig::default()
        };
        let dual = legendre_transform(&f, &cfg).unwrap();
        let axes = vec![grid.axes()[0].nodes()];
        for flat in 0..dual.grid.len() {
            let s = dual.grid.point_flat(flat);
            let brute = brute_conjugate(&axes, &vals, &s);
            assert!(
                (dual.values()[flat] - brute).abs() <= 1e-12 * (1.0 + brute.abs()),
                "node values must be used verbatim"
            );
        }
    }

    #[test]
    fn conjugation_reverses_pointwise_order() {
        let f1 = closed1(|x| 0.5 * x * x);
        let f2 = closed1(|x| 0.5 * x * x + 0.4 + 0.1 * x.abs());
        let cfg = TransformConfig {
            dual_box: Some(vec![(-3.0, 3.0)]),
            ..TransformConfig::default()
        };
        let d1 = legendre_transform(&f1, &cfg).unwrap();
        let d2 = legendre_transform(&f2, &cfg).unwrap();
        for flat in 0..d1.grid.len() {
            assert!(
                d1.values()[flat] >= d2.values()[flat] - 1e-15,
                "larger functions have smaller conjugates"
            );
        }
    }

    #[test]
    fn half_space_window_is_respected() {
        // effective domain [0, inf): the window clips at 0 and the
        // conjugate picks up only nonnegative slopes
        let f = ConvexFunctionRep::closed(
            1,
            vec![(0.0, f64::INFINITY)],
            Arc::new(|x: &[f64]| x[0] * x[0]),
        );
        let cfg = TransformConfig {
            dual_box: Some(vec![(-1.0, 3.0)]),
            ..TransformConfig::default()
        };
        let dual = legendre_transform(&f, &cfg).unwrap();
        assert!(dual.windows.iter().all(|w| w[0].0 >= 0.0), "window starts at 0");
        for flat in 0..dual.grid.len() {
            let s = dual.grid.point_flat(flat)[0];
            if !dual.finite_mask[flat] {
                continue;
            }
            // conjugate of x^2 restricted to x >= 0: s^2/4 for s >= 0, 0 below
            let exact = if s > 0.0 { 0.25 * s * s } else { 0.0 };
            assert!(
                (dual.values()[flat] - exact).abs() < 1e-3,
                "s={s}: {} vs {exact}",
                dual.values()[flat]
            );
        }
    }

    #[test]
    fn schedule_validation_rejects_bad_input() {
        let f = closed1(|x| x * x);
        let mut cfg = TransformConfig::default();
        cfg.r_schedule = vec![8.0];
        assert!(legendre_transform(&f, &cfg).is_err(), "one radius cannot saturate");
        cfg.r_schedule = vec![8.0, 8.0];
        assert!(legendre_transform(&f, &cfg).is_err(), "radii must increase");
    }
}
