//! Shared numerical utilities and slow reference implementations.
//!
//! The fast transform kernels are validated against `brute_conjugate`,
//! which maximizes over every grid node with no shortcuts. The adaptive
//! Simpson quadrature here backs the energy and moment integrals, and the
//! gradient-image routines provide measure values computed directly from
//! subdifferential geometry rather than through pushforward cells.

use crate::convexfn::ConvexFunctionRep;
use crate::error::{Error, Result};

// === brute-force conjugation ===============================================

/// max over all tensor-product nodes of <s, x> - f(x), skipping nodes whose
/// value is not finite. Returns -inf when every node is skipped.
pub fn brute_conjugate(axes: &[Vec<f64>], values: &[f64], s: &[f64]) -> f64 {
    let n = axes.len();
    debug_assert_eq!(s.len(), n);
    let total: usize = axes.iter().map(|a| a.len()).product();
    debug_assert_eq!(values.len(), total);
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; n];
    for &v in values.iter() {
        if v.is_finite() {
            let mut dot = 0.0;
            for k in 0..n {
                dot += s[k] * axes[k][idx[k]];
            }
            let cand = dot - v;
            if cand > best {
                best = cand;
            }
        }
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    best
}

// === adaptive quadrature ====================================================

/// Result of a 1-D adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureOutcome {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// False when the budget ran out or the integrand produced a
    /// non-finite value inside the interval.
    pub converged: bool,
}

const SIMPSON_MAX_EVALS: usize = 400_000;
const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`. Singular integrands are not special-cased: a non-finite sample
/// clears `converged`, and callers with endpoint singularities substitute
/// variables first.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> QuadratureOutcome {
    assert!(a.is_finite() && b.is_finite() && b > a, "bad interval [{a}, {b}]");
    assert!(tol > 0.0, "tolerance must be positive");
    let evals = std::cell::Cell::new(0usize);
    let sample = |x: f64, bad: &mut bool| -> f64 {
        evals.set(evals.get() + 1);
        let v = f(x);
        if !v.is_finite() {
            *bad = true;
        }
        v
    };
    let mut bad = false;
    let fa = sample(a, &mut bad);
    let m = 0.5 * (a + b);
    let fm = sample(m, &mut bad);
    let fb = sample(b, &mut bad);
    if bad {
        return QuadratureOutcome {
            value: f64::NAN,
            error_estimate: f64::INFINITY,
            evaluations: evals.get(),
            converged: false,
        };
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    // explicit stack: (a, m, b, fa, fm, fb, whole, tol, depth)
    struct Panel {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }
    let mut stack = vec![Panel { a, b, fa, fm, fb, whole, tol, depth: 0 }];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;

    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = sample(lm, &mut bad);
        let frm = sample(rm, &mut bad);
        if bad {
            return QuadratureOutcome {
                value: f64::NAN,
                error_estimate: f64::INFINITY,
                evaluations: evals.get(),
                converged: false,
            };
        }
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= 15.0 * p.tol
            || p.depth >= SIMPSON_MAX_DEPTH
            || evals.get() > SIMPSON_MAX_EVALS
        {
            if delta.abs() > 15.0 * p.tol {
                converged = false;
            }
            value += left + right + delta / 15.0;
            error += delta.abs() / 15.0;
        } else {
            let half_tol = 0.5 * p.tol;
            stack.push(Panel {
                a: p.a,
                b: m,
                fa: p.fa,
                fm: flm,
                fb: p.fm,
                whole: left,
                tol: half_tol,
                depth: p.depth + 1,
            });
            stack.push(Panel {
                a: m,
                b: p.b,
                fa: p.fm,
                fm: frm,
                fb: p.fb,
                whole: right,
                tol: half_tol,
                depth: p.depth + 1,
            });
        }
    }
    QuadratureOutcome { value, error_estimate: error, evaluations: evals.get(), converged }
}

// === finite differences =====================================================

/// Central-difference gradient with per-coordinate relative step.
pub fn central_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], scale: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for k in 0..x.len() {
        let h = scale * (1.0 + x[k].abs());
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        g.push((f(&xp) - f(&xm)) / (2.0 * h));
        xp[k] = x[k];
        xm[k] = x[k];
    }
    g
}

// === gradient-image measure references ======================================

/// Subdifferential mass of the closed 1-D box [a, b]: right slope at b
/// minus left slope at a, read from one-sided difference quotients. On
/// sampled data this is the exact mass of the interpolant, including any
/// node kinks sitting on the two endpoints.
pub fn gradient_mass_1d(f: &ConvexFunctionRep, a: f64, b: f64) -> Result<f64> {
    if f.dim() != 1 {
        return Err(Error::Dimension("gradient_mass_1d needs a 1-D function".into()));
    }
    if !(a < b) {
        return Err(Error::Input(format!("empty interval [{a}, {b}]")));
    }
    let right = f.subgradient(&[b])?.one_sided.expect("1-D sugradient has slopes").1;
    let left = f.subgradient(&[a])?.one_sided.expect("1-D subgradient has slopes").0;
    Ok((right - left).max(0.0))
}

/// Subdifferential mass of a 2-D box: area of the convex hull of gradient
/// samples taken on the box boundary. Sampling doubles until the hull area
/// moves by less than half a percent (or a cap is reached); the last area
/// is returned. Monotone from below for exact gradients, so refinement can
/// only help.
pub fn gradient_mass_2d(f: &ConvexFunctionRep, lo: &[f64], hi: &[f64]) -> Result<f64> {
    if f.dim() != 2 {
        return Err(Error::Dimension("gradient_mass_2d needs a 2-D function".into()));
    }
    if !(lo[0] < hi[0] && lo[1] < hi[1]) {
        return Err(Error::Input("empty box".into()));
    }
    let mut per_side = 4usize;
    let mut last = -1.0f64;
    loop {
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(4 * per_side);
        for i in 0..per_side {
            let t = i as f64 / per_side as f64;
            let x0 = lo[0] + t * (hi[0] - lo[0]);
            let x1 = lo[1] + t * (hi[1] - lo[1]);
            for p in [
                [x0, lo[1]],
                [hi[0], x1],
                [lo[0] + (hi[0] - lo[0]) * (1.0 - t), hi[1]],
                [lo[0], lo[1] + (hi[1] - lo[1]) * (1.0 - t)],
            ] {
                pts.push([p[0], p[1]]);
            }
        }
        let mut grads: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
        for p in &pts {
            let sg = f.subgradient(&[p[0], p[1]])?;
            grads.push([sg.vector[0], sg.vector[1]]);
        }
        let area = hull_area(&mut grads);
        if last >= 0.0 && (area - last).abs() <= 5e-3 * (1.0 + area) {
            return Ok(area);
        }
        if per_side >= 256 {
            return Ok(area);
        }
        last = area;
        per_side *= 2;
    }
}

/// Area of the convex hull of a planar point set (monotone chain + shoelace).
pub fn hull_area(pts: &mut [[f64; 2]]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite gradient samples"));
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for half in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if half == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2
                && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    let mut area2 = 0.0;
    for i in 0..hull.len() {
        let j = (i + 1) % hull.len();
        area2 += hull[i][0] * hull[j][1] - hull[j][0] * hull[i][1];
    }
    0.5 * area2.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, TensorGrid};
    use std::sync::Arc;

    #[test]
    fn brute_conjugate_matches_hand_computation() {
        // f(x) = x^2 on nodes {-1, 0, 1}; conjugate at s=1 is max(-2, 0, 0) = 0
        let axes = vec![vec![-1.0, 0.0, 1.0]];
        let vals = vec![1.0, 0.0, 1.0];
        assert_eq!(brute_conjugate(&axes, &vals, &[1.0]), 0.0);
        assert_eq!(brute_conjugate(&axes, &vals, &[3.0]), 2.0);
        // infinite entries drop out
        let vals = vec![f64::INFINITY, 0.0, 1.0];
        assert_eq!(brute_conjugate(&axes, &vals, &[-3.0]), 0.0);
    }

    #[test]
    fn brute_conjugate_two_dim() {
        let axes = vec![vec![0.0, 1.0], vec![0.0, 2.0]];
        // f = x1 + x2 sampled row-major: (0,0)=0 (0,2)=2 (1,0)=1 (1,2)=3
        let vals = vec![0.0, 2.0, 1.0, 3.0];
        // s = (2, 1): max of {0, 0, 1, 1} = 1 at (1,0) or (1,2)
        assert_eq!(brute_conjugate(&axes, &vals, &[2.0, 1.0]), 1.0);
    }

    #[test]
    fn simpson_integrates_polynomials_tightly() {
        let out = adaptive_simpson(&|x| x * x, 0.0, 1.0, 1e-12);
        assert!(out.converged);
        assert!((out.value - 1.0 / 3.0).abs() < 1e-11, "got {}", out.value);
        let out = adaptive_simpson(&f64::sin, 0.0, std::f64::consts::PI, 1e-10);
        assert!(out.converged);
        assert!((out.value - 2.0).abs() < 1e-9, "got {}", out.value);
    }

    #[test]
    fn simpson_flags_nonfinite_samples() {
        let out = adaptive_simpson(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-8);
        assert!(!out.converged, "1/sqrt(x) hits +inf at the left endpoint");
    }

    #[test]
    fn simpson_handles_log_singularity_after_substitution() {
        // int_0^1 ln(1/x) dx = 1 via x = t^2: int_0^1 2 t ln(1/t^2) dt
        let out = adaptive_simpson(&|t: f64| if t == 0.0 { 0.0 } else { -4.0 * t * t.ln() }, 0.0, 1.0, 1e-10);
        assert!(out.converged);
        assert!((out.value - 1.0).abs() < 1e-8, "got {}", out.value);
    }

    #[test]
    fn central_gradient_on_quadratic() {
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1];
        let g = central_gradient(&f, &[2.0, -1.0], 1e-6);
        assert!((g[0] - 4.0).abs() < 1e-7);
        assert!((g[1] - 3.0).abs() < 1e-7);
    }

    #[test]
    fn mass_of_quadratic_is_box_volume() {
        // f = x^2 / 2 has gradient x, so the cell maps to itself.
        let f = ConvexFunctionRep::closed_with_grad(
            1,
            vec![(-2.0, 2.0)],
            Arc::new(|x: &[f64]| 0.5 * x[0] * x[0]),
            Arc::new(|x: &[f64]| vec![x[0]]),
        );
        let m = gradient_mass_1d(&f, -0.5, 0.5).unwrap();
        assert!((m - 1.0).abs() < 1e-12, "got {m}");
    }

    #[test]
    fn sampled_mass_counts_boundary_kinks_of_the_interpolant() {
        // on sampled data the closed cell picks up the node kinks at its
        // two endpoints, each worth step/2 for a quadratic
        let g = TensorGrid::new(vec![Axis::new(-1.0, 1.0, 201).unwrap()]).unwrap();
        let step = g.axes()[0].step();
        let vals: Vec<f64> = (0..g.len())
            .map(|k| {
                let x = g.point_flat(k)[0];
                0.5 * x * x
            })
            .collect();
        let f = ConvexFunctionRep::gridded(g, vals).unwrap();
        let m = gradient_mass_1d(&f, -0.5, 0.5).unwrap();
        assert!((m - (1.0 + step)).abs() < 1e-9, "got {m}, step {step}");
    }

    #[test]
    fn kink_carries_point_mass() {
        let f = ConvexFunctionRep::closed(1, vec![(-2.0, 2.0)], Arc::new(|x: &[f64]| x[0].abs()));
        let m = gradient_mass_1d(&f, -0.25, 0.25).unwrap();
        assert!((m - 2.0).abs() < 1e-5, "subdifferential of |x| over 0 is [-1,1], got {m}");
    }

    #[test]
    fn planar_mass_of_isotropic_quadratic() {
        let f = ConvexFunctionRep::closed_with_grad(
            2,
            vec![(-2.0, 2.0), (-2.0, 2.0)],
            Arc::new(|x: &[f64]| 0.5 * (x[0] * x[0] + x[1] * x[1])),
            Arc::new(|x: &[f64]| vec![x[0], x[1]]),
        );
        let m = gradient_mass_2d(&f, &[0.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((m - 0.25).abs() < 1e-6, "got {m}");
    }

    #[test]
    fn hull_area_of_square_with_interior_noise() {
        let mut pts = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
            [0.25, 0.75],
        ];
        assert!((hull_area(&mut pts) - 1.0).abs() < 1e-12);
    }
}
