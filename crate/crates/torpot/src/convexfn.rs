//! Representations of convex functions on R^n.
//!
//! Two storage forms share one interface: closed-form callables (used by
//! the bundled potential gallery) and tensor-grid samples (used for data
//! read from grid files and for transform outputs pulled back to the
//! primal side). Everything downstream — transforms, measures,
//! classification — consumes this type.
//!
//! Sampled data is never trusted to be convex: `check_convexity` runs
//! midpoint tests along every axis line and along sampled diagonal
//! directions, and reports the first violating triple.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::TensorGrid;

/// Midpoint-convexity slack for sampled data.
pub const TOL_CONVEX: f64 = 1e-9;

pub type ClosedFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type ClosedGrad = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Closed {
        f: ClosedFn,
        grad: Option<ClosedGrad>,
    },
    Gridded {
        grid: TensorGrid,
        values: Vec<f64>,
    },
}

/// A convex function together with the box on which it is intended to be
/// evaluated (transform truncation windows intersect this box).
#[derive(Clone)]
pub struct ConvexFunctionRep {
    dim: usize,
    window: Vec<(f64, f64)>,
    kind: Kind,
}

/// Subgradient information at a point. For n = 1 the one-sided slopes are
/// reported as well; at kinks they bracket the subdifferential interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient {
    pub vector: Vec<f64>,
    pub one_sided: Option<(f64, f64)>,
}

/// Sampled image of the subgradient map over a box.
#[derive(Debug, Clone)]
pub struct GradientRange {
    pub samples: Vec<Vec<f64>>,
    /// Componentwise bounding box of the samples.
    pub bbox: Vec<(f64, f64)>,
}

/// First failure of the midpoint convexity test on sampled data.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityViolation {
    /// Direction of the failing line (entries in {-1, 0, 1}).
    pub direction: Vec<i64>,
    /// Multi-index of the midpoint node.
    pub index: Vec<usize>,
    /// (previous, midpoint, next) sample values.
    pub triple: (f64, f64, f64),
    /// Convexity deficit `2 v_mid - v_prev - v_next` (positive = violation).
    pub gap: f64,
}

impl ConvexFunctionRep {
    pub fn closed(dim: usize, window: Vec<(f64, f64)>, f: ClosedFn) -> Self {
        assert_eq!(window.len(), dim);
        ConvexFunctionRep {
            dim,
            window,
            kind: Kind::Closed { f, grad: None },
        }
    }

    pub fn closed_with_grad(
        dim: usize,
        window: Vec<(f64, f64)>,
        f: ClosedFn,
        grad: ClosedGrad,
    ) -> Self {
        assert_eq!(window.len(), dim);
        ConvexFunctionRep {
            dim,
            window,
            kind: Kind::Closed { f, grad: Some(grad) },
        }
    }

    /// Wrap grid samples. Values must all be finite (primal-side data);
    /// convexity is checked here so a non-convex grid never reaches the
    /// transform kernels.
    pub fn gridded(grid: TensorGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "primal grid value at flat index {bad} is not finite"
            )));
        }
        if let Some(v) = convexity_violation(&grid, &values, TOL_CONVEX) {
            return Err(Error::NonConvex(format!(
                "midpoint test fails along {:?} at index {:?}: values {:?}, deficit {:.3e}",
                v.direction, v.index, v.triple, v.gap
            )));
        }
        let window = grid.axes().iter().map(|a| (a.min, a.max)).collect();
        Ok(ConvexFunctionRep {
            dim: grid.dim(),
            window,
            kind: Kind::Gridded { grid, values },
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn window(&self) -> &[(f64, f64)] {
        &self.window
    }

    pub fn is_gridded(&self) -> bool {
        matches!(self.kind, Kind::Gridded { .. })
    }

    pub fn grid_data(&self) -> Option<(&TensorGrid, &[f64])> {
        match &self.kind {
            Kind::Gridded { grid, values } => Some((grid, values)),
            _ => None,
        }
    }

    pub fn has_closed_grad(&self) -> bool {
        matches!(&self.kind, Kind::Closed { grad: Some(_), .. })
    }

    /// Evaluate. Gridded data interpolates multilinearly and clamps to its
    /// grid box.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Closed { f, .. } => f(x),
            Kind::Gridded { grid, values } => grid.interpolate(values, x),
        }
    }

    /// Subgradient at an interior point of the window. For closed forms
    /// with an attached gradient the exact gradient is used; otherwise
    /// symmetric differences with a relative step. Near-kink behavior in
    /// 1-D is surfaced through the one-sided slopes.
    pub fn subgradient(&self, x: &[f64]) -> Result<Subgradient> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, function dimension is {}",
                x.len(),
                self.dim
            )));
        }
        let h = self.fd_step(x);
        for (k, &xk) in x.iter().enumerate() {
            let (lo, hi) = self.window[k];
            if xk - h[k] < lo || xk + h[k] > hi {
                return Err(Error::Precondition(format!(
                    "point {x:?} is within one difference step of the window edge on axis {k}"
                )));
            }
        }
        if let Kind::Closed { grad: Some(g), .. } = &self.kind {
            let vector = g(x);
            let one_sided = (self.dim == 1).then(|| (vector[0], vector[0]));
            return Ok(Subgradient { vector, one_sided });
        }
        let mut vector = Vec::with_capacity(self.dim);
        let mut one_sided = None;
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for k in 0..self.dim {
            xp[k] = x[k] + h[k];
            xm[k] = x[k] - h[k];
            let fp = self.eval(&xp);
            let fm = self.eval(&xm);
            let f0 = self.eval(x);
            let right = (fp - f0) / h[k];
            let left = (f0 - fm) / h[k];
            vector.push(0.5 * (left + right));
            if self.dim == 1 {
                one_sided = Some((left, right));
            }
            xp[k] = x[k];
            xm[k] = x[k];
        }
        Ok(Subgradient { vector, one_sided })
    }

    /// Sample the subgradient map on a uniform lattice of the window
    /// intersected with [-r, r]^n, stepping one difference-step inside the
    /// edges so every sample is admissible.
    pub fn gradient_range(&self, r: f64, per_axis: usize) -> Result<GradientRange> {
        if per_axis < 2 {
            return Err(Error::Input("gradient_range needs at least 2 samples per axis".into()));
        }
        let mut axes = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let lo = self.window[k].0.max(-r);
            let hi = self.window[k].1.min(r);
            if !(lo < hi) {
                return Err(Error::Precondition(format!(
                    "window on axis {k} does not meet [-{r}, {r}]"
                )));
            }
            let step = match &self.kind {
                Kind::Closed { .. } => 1e-6 * (1.0 + lo.abs().max(hi.abs())),
                Kind::Gridded { grid, .. } => grid.axes()[k].step(),
            };
            let pad = (1.5 * step).max(1e-4 * (hi - lo)).min(0.5 * (hi - lo));
            axes.push((lo + pad, hi - pad));
        }
        let mut samples = Vec::new();
        let mut idx = vec![0usize; self.dim];
        let mut x = vec![0.0f64; self.dim];
        loop {
            for k in 0..self.dim {
                let (lo, hi) = axes[k];
                x[k] = lo + (hi - lo) * idx[k] as f64 / (per_axis - 1) as f64;
            }
            samples.push(self.subgradient(&x)?.vector);
            let mut k = self.dim;
            loop {
                if k == 0 {
                    let bbox = (0..self.dim)
                        .map(|t| {
                            let lo = samples.iter().map(|s| s[t]).fold(f64::INFINITY, f64::min);
                            let hi = samples
                                .iter()
                                .map(|s| s[t])
                                .fold(f64::NEG_INFINITY, f64::max);
                            (lo, hi)
                        })
                        .collect();
                    return Ok(GradientRange { samples, bbox });
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < per_axis {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn fd_step(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Closed { .. } => x.iter().map(|&xk| 1e-6 * (1.0 + xk.abs())).collect(),
            Kind::Gridded { grid, .. } => grid.axes().iter().map(|a| a.step()).collect(),
        }
    }
}

/// Midpoint convexity scan of grid samples: along every axis-parallel line
/// and along the sampled diagonal directions (all sign patterns in
/// {-1,0,1}^n with at least two nonzero entries, first nonzero positive).
/// Returns the first violation in a deterministic row-major order.
/// Non-finite (+inf) entries are legal in dual-side data: a finite pair
/// bracketing an infinite midpoint is a violation, anything else passes.
pub fn convexity_violation(
    grid: &TensorGrid,
    values: &[f64],
    tol: f64,
) -> Option<ConvexityViolation> {
    let n = grid.dim();
    let mut directions: Vec<Vec<i64>> = Vec::new();
    for k in 0..n {
        let mut d = vec![0i64; n];
        d[k] = 1;
        directions.push(d);
    }
    // diagonal sign patterns
    let mut stack = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for prefix in &stack {
            for sign in [-1i64, 0, 1] {
                let mut p: Vec<i64> = prefix.clone();
                p.push(sign);
                next.push(p);
            }
        }
        stack = next;
    }
    for d in stack {
        let nz = d.iter().filter(|&&s| s != 0).count();
        if nz >= 2 && *d.iter().find(|&&s| s != 0).unwrap() > 0 {
            directions.push(d);
        }
    }

    let counts: Vec<usize> = grid.axes().iter().map(|a| a.count).collect();
    for dir in &directions {
        for flat in 0..grid.len() {
            let idx = grid.unflat(flat);
            // need idx - dir and idx + dir in range
            let mut ok = true;
            let mut prev = Vec::with_capacity(n);
            let mut next = Vec::with_capacity(n);
            for k in 0..n {
                let i = idx[k] as i64;
                let (a, b) = (i - dir[k], i + dir[k]);
                if a < 0 || b < 0 || a >= counts[k] as i64 || b >= counts[k] as i64 {
                    ok = false;
                    break;
                }
                prev.push(a as usize);
                next.push(b as usize);
            }
            if !ok {
                continue;
            }
            let vm = values[flat];
            let vp = values[grid.flat(&prev)];
            let vn = values[grid.flat(&next)];
            if vm.is_infinite() {
                if vp.is_finite() && vn.is_finite() {
                    return Some(ConvexityViolation {
                        direction: dir.clone(),
                        index: idx,
                        triple: (vp, vm, vn),
                        gap: f64::INFINITY,
                    });
                }
                continue;
            }
            if vp.is_infinite() || vn.is_infinite() {
                continue;
            }
            let gap = 2.0 * vm - vp - vn;
            if gap > tol {
                return Some(ConvexityViolation {
                    direction: dir.clone(),
                    index: idx,
                    triple: (vp, vm, vn),
                    gap,
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    fn grid1(min: f64, max: f64, count: usize) -> TensorGrid {
        TensorGrid::new(vec![Axis::new(min, max, count).unwrap()]).unwrap()
    }

    fn sample1(grid: &TensorGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..grid.len()).map(|k| f(grid.point_flat(k)[0])).collect()
    }

    #[test]
    fn quartic_samples_pass_convexity() {
        let g = grid1(-2.0, 2.0, 201);
        let v = sample1(&g, |x| x.powi(4));
        assert!(convexity_violation(&g, &v, TOL_CONVEX).is_none());
        assert!(ConvexFunctionRep::gridded(g, v).is_ok());
    }

    #[test]
    fn sine_samples_fail_with_located_triple() {
        let g = grid1(0.0, 6.0, 61);
        let v = sample1(&g, f64::sin);
        let viol = convexity_violation(&g, &v, TOL_CONVEX).expect("sine is not convex");
        assert_eq!(viol.direction, vec![1]);
        assert!(viol.gap > 0.0);
        match ConvexFunctionRep::gridded(g, v) {
            Err(Error::NonConvex(_)) => {}
            other => panic!("expected a convexity error, got {:?}", other.err()),
        }
    }

    #[test]
    fn max_of_linear_passes_including_kink() {
        let g = grid1(-1.0, 1.0, 41);
        let v = sample1(&g, |x| x.abs());
        assert!(convexity_violation(&g, &v, TOL_CONVEX).is_none());
    }

    #[test]
    fn saddle_fails_on_diagonal_only() {
        // x*y is midpoint-affine along axes but concave along (1,-1).
        let g = TensorGrid::new(vec![
            Axis::new(-1.0, 1.0, 21).unwrap(),
            Axis::new(-1.0, 1.0, 21).unwrap(),
        ])
        .unwrap();
        let v: Vec<f64> = (0..g.len())
            .map(|f| {
                let p = g.point_flat(f);
                p[0] * p[1]
            })
            .collect();
        let viol = convexity_violation(&g, &v, TOL_CONVEX).expect("saddle is not convex");
        assert_eq!(viol.direction.len(), 2);
        assert!(viol.direction.iter().all(|&s| s != 0), "axis lines are fine for a saddle");
    }

    #[test]
    fn infinite_midpoint_between_finite_values_is_flagged() {
        let g = grid1(0.0, 1.0, 3);
        let v = vec![0.0, f64::INFINITY, 0.5];
        let viol = convexity_violation(&g, &v, TOL_CONVEX).unwrap();
        assert!(viol.gap.is_infinite());
        // an infinite tail is fine
        let v2 = vec![0.0, 0.5, f64::INFINITY];
        assert!(convexity_violation(&g, &v2, TOL_CONVEX).is_none());
    }

    #[test]
    fn subgradient_of_abs_brackets_the_kink() {
        let g = grid1(-1.0, 1.0, 201);
        let v = sample1(&g, |x| x.abs());
        let f = ConvexFunctionRep::gridded(g, v).unwrap();
        let sg = f.subgradient(&[0.0]).unwrap();
        let (l, r) = sg.one_sided.unwrap();
        assert!((l + 1.0).abs() < 1e-9, "left slope {l}");
        assert!((r - 1.0).abs() < 1e-9, "right slope {r}");
        assert!(sg.vector[0].abs() < 1e-9);
        // smooth point
        let sg = f.subgradient(&[0.5]).unwrap();
        assert!((sg.vector[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn subgradient_rejects_window_edge() {
        let f = ConvexFunctionRep::closed(1, vec![(-1.0, 1.0)], Arc::new(|x: &[f64]| x[0] * x[0]));
        assert!(f.subgradient(&[1.0]).is_err());
        assert!(f.subgradient(&[0.999]).is_ok());
    }

    #[test]
    fn closed_gradient_is_used_exactly() {
        let f = ConvexFunctionRep::closed_with_grad(
            2,
            vec![(-4.0, 4.0), (-4.0, 4.0)],
            Arc::new(|x: &[f64]| x[0] * x[0] + 0.5 * x[1] * x[1]),
            Arc::new(|x: &[f64]| vec![2.0 * x[0], x[1]]),
        );
        let sg = f.subgradient(&[0.7, -1.2]).unwrap();
        assert_eq!(sg.vector, vec![1.4, -1.2]);
    }

    #[test]
    fn gradient_range_of_quadratic_covers_slope_box() {
        let f = ConvexFunctionRep::closed(1, vec![(-2.0, 2.0)], Arc::new(|x: &[f64]| x[0] * x[0]));
        let gr = f.gradient_range(2.0, 9).unwrap();
        assert_eq!(gr.samples.len(), 9);
        assert!(gr.bbox[0].0 < -3.9 && gr.bbox[0].1 > 3.9, "bbox {:?}", gr.bbox);
    }
}
