//! Uniform tensor-product grids and the plain-text grid file format.
//!
//! A grid is a product of uniform axes. Values attached to a grid are
//! stored row-major (last axis fastest), one `f64` per node. The text
//! format used for interchange is
//!
//! ```text
//! n=2
//! axis 0: -8,8,257
//! axis 1: -8,8,257
//! <value>
//! <value>
//! ...
//! ```
//!
//! with one value per line in row-major order. The literal `inf` encodes
//! +infinity and is only legal in dual-side files (where it marks nodes
//! outside the finiteness mask); primal files must be entirely finite.
//! NaN is never legal.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// One uniform axis with `count` nodes (so `count - 1` cells).
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::Input(format!(
                "axis bounds must be finite with min < max, got [{min}, {max}]"
            )));
        }
        if count < 2 {
            return Err(Error::Input(format!(
                "axis needs at least 2 nodes, got {count}"
            )));
        }
        Ok(Axis { min, max, count })
    }

    #[inline]
    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        self.min + k as f64 * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.node(k)).collect()
    }

    /// Index of the node nearest to `x`, clamped to the axis.
    pub fn nearest(&self, x: f64) -> usize {
        let t = (x - self.min) / self.step();
        let k = t.round();
        if k <= 0.0 {
            0
        } else if k >= (self.count - 1) as f64 {
            self.count - 1
        } else {
            k as usize
        }
    }
}

/// Product of uniform axes with row-major indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    axes: Vec<Axis>,
}

impl TensorGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Input("grid needs at least one axis".into()));
        }
        Ok(TensorGrid { axes })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    #[inline]
    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    #[inline]
    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major flat index of a multi-index.
    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim());
        let mut f = 0;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.axes[k].count);
            f = f * self.axes[k].count + i;
        }
        f
    }

    /// Multi-index of a row-major flat index.
    pub fn unflat(&self, mut f: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = f % self.axes[k].count;
            f /= self.axes[k].count;
        }
        idx
    }

    /// Coordinates of the node at a multi-index.
    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.node(i))
            .collect()
    }

    pub fn point_flat(&self, f: usize) -> Vec<f64> {
        self.point(&self.unflat(f))
    }

    /// Iterate all multi-indices in row-major order.
    pub fn iter_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(|f| self.unflat(f))
    }

    /// Stride (in flat indices) of one step along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.count).product()
    }

    /// Flat indices of the starts of all lines along `axis`: a line is the
    /// set of nodes obtained by varying only that coordinate.
    pub fn line_starts(&self, axis: usize) -> Vec<usize> {
        let mut starts = Vec::with_capacity(self.len() / self.axes[axis].count);
        let counts: Vec<usize> = self.axes.iter().map(|a| a.count).collect();
        let mut idx = vec![0usize; self.dim()];
        loop {
            starts.push(self.flat(&idx));
            // advance the multi-index, skipping the line axis
            let mut k = self.dim();
            loop {
                if k == 0 {
                    return starts;
                }
                k -= 1;
                if k == axis {
                    continue;
                }
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// Multilinear interpolation of row-major `values` at `x` (clamped to
    /// the grid box). Infinite values propagate: if any corner of the
    /// surrounding cell is non-finite the result is +infinity.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        debug_assert_eq!(x.len(), self.dim());
        let n = self.dim();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0f64; n];
        for k in 0..n {
            let a = &self.axes[k];
            let t = ((x[k] - a.min) / a.step()).clamp(0.0, (a.count - 1) as f64);
            let i = (t.floor() as usize).min(a.count - 2);
            base[k] = i;
            frac[k] = t - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut f = 0usize;
            for k in 0..n {
                let hi = (corner >> k) & 1 == 1;
                w *= if hi { frac[k] } else { 1.0 - frac[k] };
                f = f * self.axes[k].count + base[k] + hi as usize;
            }
            let v = values[f];
            if !v.is_finite() {
                if w > 0.0 {
                    return f64::INFINITY;
                }
                continue;
            }
            acc += w * v;
        }
        acc
    }
}

// === grid file I/O =========================================================

/// Serialize a grid plus row-major values in the text format. `allow_inf`
/// distinguishes dual-side files (mask holes written as `inf`) from primal
/// ones.
pub fn write_grid_text(grid: &TensorGrid, values: &[f64], allow_inf: bool) -> Result<String> {
    if values.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "{} values for a grid with {} nodes",
            values.len(),
            grid.len()
        )));
    }
    let mut out = String::with_capacity(values.len() * 20);
    let _ = writeln!(out, "n={}", grid.dim());
    for (k, a) in grid.axes().iter().enumerate() {
        let _ = writeln!(out, "axis {}: {},{},{}", k, a.min, a.max, a.count);
    }
    for &v in values {
        if v.is_nan() {
            return Err(Error::Input("NaN value cannot be serialized".into()));
        }
        if v.is_infinite() {
            if !allow_inf || v < 0.0 {
                return Err(Error::Input(
                    "infinite value only legal as +inf in dual files".into(),
                ));
            }
            out.push_str("inf\n");
        } else {
            // ryu-style shortest round-trip representation via Display
            let _ = writeln!(out, "{v}");
        }
    }
    Ok(out)
}

/// Parse the text format. Rejects `inf` unless `allow_inf`; rejects NaN,
/// malformed headers, and value counts that disagree with the header.
pub fn read_grid_text(text: &str, allow_inf: bool) -> Result<(TensorGrid, Vec<f64>)> {
    let mut lines = text.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Input("empty grid file".into()))?;
    let n: usize = first
        .trim()
        .strip_prefix("n=")
        .ok_or_else(|| Error::Input(format!("expected `n=<dim>` header, got `{first}`")))?
        .parse()
        .map_err(|_| Error::Input(format!("bad dimension in header `{first}`")))?;
    if n == 0 || n > 8 {
        return Err(Error::Input(format!("unsupported dimension {n}")));
    }
    let mut axes = Vec::with_capacity(n);
    for k in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Input(format!("missing axis {k} header")))?;
        let rest = line
            .trim()
            .strip_prefix(&format!("axis {k}:"))
            .ok_or_else(|| Error::Input(format!("expected `axis {k}: ...`, got `{line}`")))?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Input(format!(
                "axis header needs min,max,count, got `{line}`"
            )));
        }
        let min: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Input(format!("bad axis min `{}`", parts[0])))?;
        let max: f64 = parts[1]
            .parse()
            .map_err(|_| Error::Input(format!("bad axis max `{}`", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Error::Input(format!("bad axis count `{}`", parts[2])))?;
        axes.push(Axis::new(min, max, count)?);
    }
    let grid = TensorGrid::new(axes)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v = if t == "inf" {
            if !allow_inf {
                return Err(Error::Input(
                    "`inf` is only legal in dual-side grid files".into(),
                ));
            }
            f64::INFINITY
        } else {
            let v: f64 = t
                .parse()
                .map_err(|_| Error::Input(format!("bad value `{t}`")))?;
            if !v.is_finite() {
                return Err(Error::Input(format!("non-finite value `{t}`")));
            }
            v
        };
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(Error::Input(format!(
            "grid header promises {} values, file has {}",
            grid.len(),
            values.len()
        )));
    }
    Ok((grid, values))
}

pub fn read_grid_file(path: &Path, allow_inf: bool) -> Result<(TensorGrid, Vec<f64>)> {
    let mut text = String::new();
    BufReader::new(std::fs::File::open(path)?).read_to_string(&mut text)?;
    read_grid_text(&text, allow_inf)
}

pub fn write_grid_file(
    path: &Path,
    grid: &TensorGrid,
    values: &[f64],
    allow_inf: bool,
) -> Result<()> {
    let text = write_grid_text(grid, values, allow_inf)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Convenience used by tests that stream a file line by line.
pub fn read_grid_reader<R: BufRead>(mut r: R, allow_inf: bool) -> Result<(TensorGrid, Vec<f64>)> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    read_grid_text(&text, allow_inf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_nodes_and_steps() {
        let a = Axis::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(a.step(), 0.5);
        assert_eq!(a.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(a.nearest(0.26), 3);
        assert_eq!(a.nearest(-9.0), 0);
        assert_eq!(a.nearest(9.0), 4);
    }

    #[test]
    fn axis_rejects_degenerate_bounds() {
        assert!(Axis::new(1.0, 1.0, 4).is_err());
        assert!(Axis::new(0.0, 1.0, 1).is_err());
        assert!(Axis::new(f64::NAN, 1.0, 4).is_err());
    }

    #[test]
    fn flat_roundtrip_2d() {
        let g = TensorGrid::new(vec![
            Axis::new(0.0, 1.0, 3).unwrap(),
            Axis::new(0.0, 1.0, 4).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.len(), 12);
        for f in 0..g.len() {
            assert_eq!(g.flat(&g.unflat(f)), f);
        }
        assert_eq!(g.stride(0), 4);
        assert_eq!(g.stride(1), 1);
        assert_eq!(g.line_starts(1), vec![0, 4, 8]);
        assert_eq!(g.line_starts(0), vec![0, 1, 2, 3]);
    }

    #[test]
    fn interpolation_is_exact_on_affine_data() {
        let g = TensorGrid::new(vec![
            Axis::new(-1.0, 1.0, 9).unwrap(),
            Axis::new(0.0, 2.0, 7).unwrap(),
        ])
        .unwrap();
        let vals: Vec<f64> = (0..g.len())
            .map(|f| {
                let p = g.point_flat(f);
                3.0 * p[0] - 2.0 * p[1] + 0.25
            })
            .collect();
        let x = [0.3137, 1.7731];
        let got = g.interpolate(&vals, &x);
        let want = 3.0 * x[0] - 2.0 * x[1] + 0.25;
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn interpolation_propagates_infinities() {
        let g = TensorGrid::new(vec![Axis::new(0.0, 1.0, 3).unwrap()]).unwrap();
        let vals = vec![0.0, f64::INFINITY, 2.0];
        assert!(g.interpolate(&vals, &[0.25]).is_infinite());
        assert_eq!(g.interpolate(&vals, &[0.0]), 0.0);
    }

    #[test]
    fn grid_text_roundtrip() {
        let g = TensorGrid::new(vec![
            Axis::new(-0.05, 1.05, 12).unwrap(),
            Axis::new(0.0, 2.0, 3).unwrap(),
        ])
        .unwrap();
        let mut vals: Vec<f64> = (0..g.len()).map(|f| (f as f64) * 0.1 - 1.0).collect();
        vals[7] = f64::INFINITY;
        let text = write_grid_text(&g, &vals, true).unwrap();
        let (g2, v2) = read_grid_text(&text, true).unwrap();
        assert_eq!(g, g2);
        assert_eq!(vals, v2);
    }

    #[test]
    fn primal_files_reject_inf() {
        let g = TensorGrid::new(vec![Axis::new(0.0, 1.0, 2).unwrap()]).unwrap();
        let vals = vec![1.0, f64::INFINITY];
        assert!(write_grid_text(&g, &vals, false).is_err());
        let text = "n=1\naxis 0: 0,1,2\n1.0\ninf\n";
        assert!(read_grid_text(text, false).is_err());
        assert!(read_grid_text(text, true).is_ok());
    }

    #[test]
    fn value_count_mismatch_is_rejected() {
        let text = "n=1\naxis 0: 0,1,3\n1.0\n2.0\n";
        assert!(read_grid_text(text, false).is_err());
    }

    #[test]
    fn nan_is_always_rejected() {
        let text = "n=1\naxis 0: 0,1,2\n1.0\nNaN\n";
        assert!(read_grid_text(text, true).is_err());
    }
}
