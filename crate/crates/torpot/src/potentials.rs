//! Bundled example potentials and their reference data.
//!
//! Every entry pairs a reference potential `F0` with a candidate `F_phi` on a
//! fixed moment polytope, in the chart where a torus-invariant potential is
//! the convex function
//!
//! ```text
//!     F(x) = potential on the logarithmic chart,    phi = F_phi - F0 .
//! ```
//!
//! Entries are named by a small grammar, `name?key=value&key=value`:
//!
//! ```text
//!     pn_fs?n=2         Fubini-Study reference on projective n-space
//!     f1?a=1&b=1        Hirzebruch surface reference, two positive weights
//!     ex310?eps=0.1&C=5 piecewise-linear candidate with a movable kink
//!     ex46?alpha=0.5    exponential ramp joined to a linear tail
//!     ex311iii          finite-energy candidate with divergent half moment
//!     phi1?n=2          the linear function x_1; gradient image is a point
//!     phi2?n=2          max_i x_i; gradient image is one closed face
//!     guillemin         canonical potential built from the polytope itself
//!     sqrt_cusp         dual equals -sqrt(s); fails every log-regularity test
//! ```
//!
//! Where a dual has a usable closed form it is exported next to the gallery
//! so tests can compare transform output against an independent evaluation.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use crate::convexfn::ConvexFunctionRep;
use crate::error::{Error, Result};
use crate::grid::{Axis, TensorGrid};
use crate::polytope::{self, DelzantPolytope};
use crate::transform::{
    grid_conjugate, legendre_transform, DualFunction, PrimalResolution, TransformConfig,
};

/// Relative tolerance for the primal/dual agreement check in [`ToricPotential::sup_phi`].
pub const TOL_SUP_CROSSCHECK: f64 = 0.05;

/// Fraction of dual nodes allowed to be finite for `F_phi` but infinite for
/// the reference before `sup_phi` refuses to answer.
pub const TOL_MASK_MISMATCH: f64 = 0.01;

/// `t log t` with the continuous extension `0 log 0 = 0`.
pub fn xlogx(t: f64) -> f64 {
    if t < 1e-300 {
        0.0
    } else {
        t * t.ln()
    }
}

// === potential bundle =======================================================

/// A reference/candidate pair on a moment polytope, with lazily computed
/// truncated transforms of both sides.
pub struct ToricPotential {
    label: String,
    polytope: DelzantPolytope,
    f0: ConvexFunctionRep,
    fphi: ConvexFunctionRep,
    cfg: TransformConfig,
    g0: OnceLock<DualFunction>,
    gphi: OnceLock<DualFunction>,
}

impl ToricPotential {
    /// Assemble a bundle from explicit parts. The dual box of `cfg` is pinned
    /// to the polytope's bounding box when not already set.
    pub fn custom(
        label: &str,
        polytope: DelzantPolytope,
        f0: ConvexFunctionRep,
        fphi: ConvexFunctionRep,
        mut cfg: TransformConfig,
    ) -> Result<Self> {
        if f0.dim() != polytope.dim() || fphi.dim() != polytope.dim() {
            return Err(Error::Dimension(format!(
                "potential dimensions {} / {} do not match polytope dimension {}",
                f0.dim(),
                fphi.dim(),
                polytope.dim()
            )));
        }
        if cfg.dual_box.is_none() {
            cfg.dual_box = Some(polytope.bounding_box());
        }
        Ok(ToricPotential {
            label: label.to_string(),
            polytope,
            f0,
            fphi,
            cfg,
            g0: OnceLock::new(),
            gphi: OnceLock::new(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn polytope(&self) -> &DelzantPolytope {
        &self.polytope
    }

    pub fn reference(&self) -> &ConvexFunctionRep {
        &self.f0
    }

    pub fn candidate(&self) -> &ConvexFunctionRep {
        &self.fphi
    }

    pub fn config(&self) -> &TransformConfig {
        &self.cfg
    }

    /// Replace the transform configuration, dropping any cached duals.
    pub fn with_config(self, mut cfg: TransformConfig) -> Self {
        if cfg.dual_box.is_none() {
            cfg.dual_box = Some(self.polytope.bounding_box());
        }
        ToricPotential {
            label: self.label,
            polytope: self.polytope,
            f0: self.f0,
            fphi: self.fphi,
            cfg,
            g0: OnceLock::new(),
            gphi: OnceLock::new(),
        }
    }

    /// Truncated transform of the reference potential.
    pub fn dual0(&self) -> Result<&DualFunction> {
        if self.g0.get().is_none() {
            let d = legendre_transform(&self.f0, &self.cfg)?;
            let _ = self.g0.set(d);
        }
        Ok(self.g0.get().expect("value was just stored"))
    }

    /// Truncated transform of the candidate potential.
    pub fn dual_phi(&self) -> Result<&DualFunction> {
        if self.gphi.get().is_none() {
            let d = legendre_transform(&self.fphi, &self.cfg)?;
            let _ = self.gphi.set(d);
        }
        Ok(self.gphi.get().expect("value was just stored"))
    }

    /// The relative potential `phi = F_phi - F0` at a chart point.
    pub fn phi_value(&self, x: &[f64]) -> f64 {
        self.fphi.eval(x) - self.f0.eval(x)
    }

    /// The support function of the moment polytope as a closed function.
    pub fn support_rep(&self) -> ConvexFunctionRep {
        let p = self.polytope.clone();
        let window = self.f0.window().to_vec();
        ConvexFunctionRep::closed(
            self.polytope.dim(),
            window,
            Arc::new(move |x: &[f64]| p.support_value(x)),
        )
    }

    /// Box on which biconjugates are compared against the original samples.
    pub fn core_box(&self) -> Vec<(f64, f64)> {
        self.f0
            .window()
            .iter()
            .map(|&(lo, hi)| (lo.max(-4.0), hi.min(4.0)))
            .collect()
    }

    /// Largest gap between the reference potential and the support function
    /// of the polytope over a sampling box.
    pub fn reference_gap(&self) -> f64 {
        let n = self.polytope.dim();
        let per_axis = match n {
            1 => 257,
            2 => 65,
            _ => 17,
        };
        let mut best = 0.0f64;
        let axes: Vec<Vec<f64>> = self
            .f0
            .window()
            .iter()
            .map(|&(lo, hi)| {
                let lo = lo.max(-8.0);
                let hi = hi.min(8.0);
                (0..per_axis)
                    .map(|k| lo + (hi - lo) * k as f64 / (per_axis - 1) as f64)
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0f64; n];
        loop {
            for (d, &i) in idx.iter().enumerate() {
                x[d] = axes[d][i];
            }
            best = best.max((self.f0.eval(&x) - self.polytope.support_value(&x)).abs());
            let mut d = 0;
            loop {
                if d == n {
                    return best;
                }
                idx[d] += 1;
                if idx[d] < per_axis {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    /// `sup phi` over the whole space, evaluated on the dual side as the
    /// largest value of `G0 - G_phi` over nodes where both transforms are
    /// finite, and cross-checked against direct sampling of `F_phi - F0`.
    pub fn sup_phi(&self) -> Result<f64> {
        let g0 = self.dual0()?;
        let gp = self.dual_phi()?;
        if g0.grid.axes() != gp.grid.axes() {
            return Err(Error::Precondition(
                "reference and candidate transforms live on different dual grids".into(),
            ));
        }
        let v0 = g0.values();
        let vp = gp.values();
        let mut best = f64::NEG_INFINITY;
        let mut both = 0usize;
        let mut phi_only = 0usize;
        for i in 0..v0.len() {
            match (g0.finite_mask[i], gp.finite_mask[i]) {
                (true, true) => {
                    both += 1;
                    best = best.max(v0[i] - vp[i]);
                }
                (false, true) => phi_only = phi_only.checked_add(1).expect("node count"),
                _ => {}
            }
        }
        if both == 0 {
            return Err(Error::Precondition(
                "transforms share no finite dual nodes".into(),
            ));
        }
        let allowed = (TOL_MASK_MISMATCH * v0.len() as f64).ceil() as usize;
        if phi_only > allowed {
            return Err(Error::Precondition(format!(
                "candidate transform is finite on {phi_only} nodes outside the reference \
                 domain; the candidate does not look dominated by the polytope"
            )));
        }
        let primal = self.primal_sup_phi();
        if (best - primal).abs() > TOL_SUP_CROSSCHECK * (1.0 + best.abs()) {
            return Err(Error::Unstable(format!(
                "dual-side sup phi {best:.6} disagrees with primal sampling {primal:.6}"
            )));
        }
        Ok(best)
    }

    fn primal_sup_phi(&self) -> f64 {
        let n = self.polytope.dim();
        let per_axis = match n {
            1 => 481,
            2 => 81,
            _ => 21,
        };
        let mut best = f64::NEG_INFINITY;
        let axes: Vec<Vec<f64>> = self
            .f0
            .window()
            .iter()
            .map(|&(lo, hi)| {
                let lo = lo.max(-12.0);
                let hi = hi.min(12.0);
                (0..per_axis)
                    .map(|k| lo + (hi - lo) * k as f64 / (per_axis - 1) as f64)
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0f64; n];
        loop {
            for (d, &i) in idx.iter().enumerate() {
                x[d] = axes[d][i];
            }
            best = best.max(self.phi_value(&x));
            let mut d = 0;
            loop {
                if d == n {
                    return best;
                }
                idx[d] += 1;
                if idx[d] < per_axis {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

// === gallery grammar ========================================================

struct Params {
    name: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn parse(spec: &str) -> Result<Self> {
        let (name, query) = match spec.split_once('?') {
            Some((n, q)) => (n, q),
            None => (spec, ""),
        };
        if name.is_empty() {
            return Err(Error::Input("empty gallery name".into()));
        }
        let mut map = BTreeMap::new();
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                Error::Input(format!("gallery parameter `{pair}` is not of the form key=value"))
            })?;
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Input(format!("gallery parameter `{k}` given twice")));
            }
        }
        Ok(Params {
            name: name.to_string(),
            map,
        })
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("parameter {key}={v} is not a number"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::Input(format!("parameter {key}={v} is not a positive integer"))),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(k) = self.map.keys().next() {
            return Err(Error::Input(format!(
                "unknown parameter `{k}` for gallery entry {}",
                self.name
            )));
        }
        Ok(())
    }
}

/// Names accepted by [`gallery`], with a one-line description each.
pub fn gallery_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("pn_fs?n=N", "Fubini-Study reference on projective N-space (N = 1..3)"),
        ("f1?a=A&b=B", "Hirzebruch surface reference with positive weights A, B"),
        ("ex310?eps=E&C=C", "piecewise-linear candidate, kink at -C, slope split E"),
        ("ex46?alpha=A", "exponential ramp (rate A in (0,1)) joined to a linear tail"),
        ("ex311iii", "finite-energy candidate whose half moment diverges slowly"),
        ("phi1?n=N", "the linear function x_1 on projective N-space"),
        ("phi2?n=N", "max of the coordinates on projective N-space"),
        ("guillemin", "canonical potential of the polytope (pass --polytope to change it)"),
        ("sqrt_cusp", "candidate whose dual is -sqrt(s); no log regularity"),
    ]
}

/// Build a gallery entry from its grammar string, e.g. `pn_fs?n=2`.
pub fn gallery(spec: &str) -> Result<ToricPotential> {
    gallery_with_polytope(spec, None)
}

/// Same as [`gallery`], with an explicit polytope for the entries that accept
/// one (currently only `guillemin`).
pub fn gallery_with_polytope(
    spec: &str,
    polytope: Option<DelzantPolytope>,
) -> Result<ToricPotential> {
    let mut params = Params::parse(spec)?;
    let name = params.name.clone();
    if name != "guillemin" && polytope.is_some() {
        return Err(Error::Input(format!(
            "gallery entry {name} carries its own polytope; --polytope only applies to guillemin"
        )));
    }
    match name.as_str() {
        "pn_fs" => {
            let n = params.usize("n", 1)?;
            params.finish()?;
            check_dim(n)?;
            let f0 = fs_reference(n);
            ToricPotential::custom(
                &format!("pn_fs?n={n}"),
                polytope::simplex(n),
                f0.clone(),
                f0,
                default_cfg(n),
            )
        }
        "f1" => {
            let a = params.f64("a", 1.0)?;
            let b = params.f64("b", 1.0)?;
            params.finish()?;
            if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                return Err(Error::Input(format!(
                    "f1 weights must be positive and finite, got a={a}, b={b}"
                )));
            }
            let f0 = f1_reference(a, b);
            ToricPotential::custom(
                &format!("f1?a={a}&b={b}"),
                polytope::hirzebruch(a, b)?,
                f0.clone(),
                f0,
                default_cfg(2),
            )
        }
        "ex310" => {
            let eps = params.f64("eps", 0.1)?;
            let c = params.f64("C", 5.0)?;
            params.finish()?;
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::Input(format!("ex310 needs eps in (0,1), got {eps}")));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Input(format!("ex310 needs C > 0, got {c}")));
            }
            let fphi = ex310_candidate(eps, c);
            ToricPotential::custom(
                &format!("ex310?eps={eps}&C={c}"),
                polytope::interval(),
                fs_reference(1),
                fphi,
                ex310_cfg(c),
            )
        }
        "ex46" => {
            let alpha = params.f64("alpha", 0.5)?;
            params.finish()?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Input(format!(
                    "ex46 needs alpha in (0,1), got {alpha}"
                )));
            }
            let fphi = ex46_candidate(alpha);
            ToricPotential::custom(
                &format!("ex46?alpha={alpha}"),
                polytope::interval(),
                fs_reference(1),
                fphi,
                default_cfg(1),
            )
        }
        "ex311iii" => {
            params.finish()?;
            ToricPotential::custom(
                "ex311iii",
                polytope::interval(),
                fs_reference(1),
                ex311iii_candidate(),
                ex311iii_cfg(),
            )
        }
        "phi1" => {
            let n = params.usize("n", 1)?;
            params.finish()?;
            check_dim(n)?;
            let fphi = ConvexFunctionRep::closed_with_grad(
                n,
                unbounded_window(n),
                Arc::new(|x: &[f64]| x[0]),
                Arc::new(move |x: &[f64]| {
                    let mut g = vec![0.0; x.len()];
                    g[0] = 1.0;
                    g
                }),
            );
            ToricPotential::custom(
                &format!("phi1?n={n}"),
                polytope::simplex(n),
                fs_reference(n),
                fphi,
                default_cfg(n),
            )
        }
        "phi2" => {
            let n = params.usize("n", 1)?;
            params.finish()?;
            check_dim(n)?;
            let fphi = ConvexFunctionRep::closed(
                n,
                unbounded_window(n),
                Arc::new(|x: &[f64]| x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
            );
            ToricPotential::custom(
                &format!("phi2?n={n}"),
                polytope::simplex(n),
                fs_reference(n),
                fphi,
                default_cfg(n),
            )
        }
        "guillemin" => {
            params.finish()?;
            let p = polytope.unwrap_or_else(polytope::interval);
            let canonical = guillemin_potential(&p)?;
            let f = canonical.primal;
            let mut cfg = default_cfg(p.dim());
            cfg.dual_box = Some(p.bounding_box());
            ToricPotential::custom("guillemin", p, f.clone(), f, cfg)
        }
        "sqrt_cusp" => {
            params.finish()?;
            let cfg = TransformConfig {
                r_schedule: vec![64.0, 128.0, 256.0],
                resolution: PrimalResolution::Spacing(1.0 / 64.0),
                dual_cells: 32768,
                ..TransformConfig::default()
            };
            ToricPotential::custom(
                "sqrt_cusp",
                polytope::interval(),
                fs_reference(1),
                sqrt_cusp_candidate(),
                cfg,
            )
        }
        other => Err(Error::Input(format!(
            "unknown gallery entry `{other}`; run the gallery listing for valid names"
        ))),
    }
}

fn check_dim(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "gallery potentials support dimensions 1 through 3, got n={n}"
        )))
    }
}

fn unbounded_window(n: usize) -> Vec<(f64, f64)> {
    vec![(f64::NEG_INFINITY, f64::INFINITY); n]
}

fn default_cfg(n: usize) -> TransformConfig {
    match n {
        1 => TransformConfig {
            resolution: PrimalResolution::Spacing(1.0 / 64.0),
            dual_cells: 1024,
            ..TransformConfig::default()
        },
        2 => TransformConfig {
            resolution: PrimalResolution::Spacing(1.0 / 16.0),
            dual_cells: 512,
            ..TransformConfig::default()
        },
        _ => TransformConfig {
            r_schedule: vec![4.0, 8.0, 16.0],
            resolution: PrimalResolution::Spacing(0.5),
            dual_cells: 64,
            ..TransformConfig::default()
        },
    }
}

pub(crate) fn ex310_cfg(c: f64) -> TransformConfig {
    let r0 = (2.0 * c).log2().ceil().exp2().max(8.0);
    let steps = (32.0 * c).ceil().max(1.0);
    TransformConfig {
        r_schedule: vec![r0, 2.0 * r0, 4.0 * r0],
        resolution: PrimalResolution::Spacing(c / steps),
        dual_cells: 1024,
        ..TransformConfig::default()
    }
}

fn ex311iii_cfg() -> TransformConfig {
    TransformConfig {
        r_schedule: vec![4096.0, 8192.0, 16384.0],
        resolution: PrimalResolution::Spacing(0.02),
        dual_cells: 2048,
        ..TransformConfig::default()
    }
}

// === closed-form references =================================================

/// Fubini-Study reference on projective n-space,
///
/// ```text
///     F0(x) = (1/2) log(1 + sum_i exp(2 x_i)) ,
/// ```
///
/// evaluated through a shifted exponential sum so large coordinates do not
/// overflow.
pub fn fs_reference(n: usize) -> ConvexFunctionRep {
    let f = move |x: &[f64]| -> f64 {
        let m = x.iter().fold(0.0f64, |a, &v| a.max(2.0 * v));
        let sum = (-m).exp() + x.iter().map(|&v| (2.0 * v - m).exp()).sum::<f64>();
        0.5 * (m + sum.ln())
    };
    let grad = move |x: &[f64]| -> Vec<f64> {
        let m = x.iter().fold(0.0f64, |a, &v| a.max(2.0 * v));
        let denom = (-m).exp() + x.iter().map(|&v| (2.0 * v - m).exp()).sum::<f64>();
        x.iter().map(|&v| (2.0 * v - m).exp() / denom).collect()
    };
    ConvexFunctionRep::closed_with_grad(n, unbounded_window(n), Arc::new(f), Arc::new(grad))
}

/// Dual of the Fubini-Study reference: the entropy-type expression
///
/// ```text
///     G0(s) = (1/2) [ sum_i s_i log s_i + (1 - sum_i s_i) log(1 - sum_i s_i) ]
/// ```
///
/// on the standard simplex, +infinity outside.
pub fn fs_dual_value(s: &[f64]) -> f64 {
    let tol = 1e-9;
    let rest = 1.0 - s.iter().sum::<f64>();
    if s.iter().any(|&v| v < -tol) || rest < -tol {
        return f64::INFINITY;
    }
    let mut acc = xlogx(rest.max(0.0));
    for &v in s {
        acc += xlogx(v.max(0.0));
    }
    0.5 * acc
}

/// Hirzebruch surface reference with weights a, b > 0:
///
/// ```text
///     F0(x) = (a/2) log(1 + e^{2x_1} + e^{2x_2}) + (b/2) log(e^{2x_1} + e^{2x_2}) .
/// ```
pub fn f1_reference(a: f64, b: f64) -> ConvexFunctionRep {
    let f = move |x: &[f64]| -> f64 {
        let m1 = x.iter().fold(0.0f64, |acc, &v| acc.max(2.0 * v));
        let s1 = (-m1).exp() + x.iter().map(|&v| (2.0 * v - m1).exp()).sum::<f64>();
        let m2 = x.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(2.0 * v));
        let s2 = x.iter().map(|&v| (2.0 * v - m2).exp()).sum::<f64>();
        0.5 * a * (m1 + s1.ln()) + 0.5 * b * (m2 + s2.ln())
    };
    let grad = move |x: &[f64]| -> Vec<f64> {
        let m1 = x.iter().fold(0.0f64, |acc, &v| acc.max(2.0 * v));
        let d1 = (-m1).exp() + x.iter().map(|&v| (2.0 * v - m1).exp()).sum::<f64>();
        let m2 = x.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(2.0 * v));
        let d2 = x.iter().map(|&v| (2.0 * v - m2).exp()).sum::<f64>();
        x.iter()
            .map(|&v| a * (2.0 * v - m1).exp() / d1 + b * (2.0 * v - m2).exp() / d2)
            .collect()
    };
    ConvexFunctionRep::closed_with_grad(2, unbounded_window(2), Arc::new(f), Arc::new(grad))
}

/// Dual of [`f1_reference`] on the trapezoid `{s >= 0, b <= s_1+s_2 <= a+b}`:
///
/// ```text
///     G0(s) = (1/2) [ s_1 log s_1 + s_2 log s_2
///                     + (a+b-s_1-s_2) log(a+b-s_1-s_2)
///                     + (s_1+s_2-b) log(s_1+s_2-b)
///                     - (s_1+s_2) log(s_1+s_2) - a log a ] .
/// ```
pub fn f1_dual_value(a: f64, b: f64, s: &[f64]) -> f64 {
    let tol = 1e-9;
    let sigma = s[0] + s[1];
    let l3 = a + b - sigma;
    let l4 = sigma - b;
    if s[0] < -tol || s[1] < -tol || l3 < -tol || l4 < -tol {
        return f64::INFINITY;
    }
    0.5 * (xlogx(s[0].max(0.0)) + xlogx(s[1].max(0.0)) + xlogx(l3.max(0.0)) + xlogx(l4.max(0.0))
        - xlogx(sigma.max(0.0))
        - xlogx(a))
}

pub(crate) fn ex310_candidate(eps: f64, c: f64) -> ConvexFunctionRep {
    ConvexFunctionRep::closed(
        1,
        unbounded_window(1),
        Arc::new(move |x: &[f64]| (1.0 - eps) * x[0].max(0.0) + eps * x[0].max(-c)),
    )
}

/// Dual of the `ex310` candidate: a single hinge,
///
/// ```text
///     G(s) = max(C (eps - s), 0)     on [0, 1].
/// ```
pub fn ex310_dual_value(eps: f64, c: f64, s: f64) -> f64 {
    let tol = 1e-9;
    if !(-tol..=1.0 + tol).contains(&s) {
        return f64::INFINITY;
    }
    (c * (eps - s)).max(0.0)
}

fn ex46_candidate(alpha: f64) -> ConvexFunctionRep {
    ConvexFunctionRep::closed(
        1,
        unbounded_window(1),
        Arc::new(move |x: &[f64]| {
            if x[0] <= 0.0 {
                (alpha * x[0]).exp()
            } else {
                x[0] + 1.0
            }
        }),
    )
}

/// Dual of the `ex46` candidate:
///
/// ```text
///     G(s) = u log u - u  with  u = s / alpha   on [0, alpha],
///     G(s) = -1                                 on [alpha, 1].
/// ```
pub fn ex46_dual_value(alpha: f64, s: f64) -> f64 {
    let tol = 1e-9;
    if !(-tol..=1.0 + tol).contains(&s) {
        return f64::INFINITY;
    }
    if s <= alpha {
        let u = (s / alpha).max(0.0);
        xlogx(u) - u
    } else {
        -1.0
    }
}

/// Fixed constants of the `ex311iii` candidate: the tail `x - 2 sqrt(x)/log x`
/// starts at `x = e^3` with value `v` and slope `d`; below the tail the
/// function is linear of slope `c` with short quadratic ramps of width `eta`
/// at both ends so the slope is continuous everywhere.
pub struct Ex311Constants {
    pub e3: f64,
    pub v: f64,
    pub d: f64,
    pub eta: f64,
    pub c: f64,
}

pub fn ex311iii_constants() -> Ex311Constants {
    let e3 = 3.0f64.exp();
    let v = e3 - 2.0 * 1.5f64.exp() / 3.0;
    let d = 1.0 - 1.0 / (9.0 * 1.5f64.exp());
    let eta = 0.1;
    let c = (v - d * eta / 2.0) / (e3 - eta);
    Ex311Constants { e3, v, d, eta, c }
}

fn ex311iii_candidate() -> ConvexFunctionRep {
    let k = ex311iii_constants();
    let (e3, eta, c, d) = (k.e3, k.eta, k.c, k.d);
    let f = move |x: &[f64]| -> f64 {
        let x = x[0];
        if x <= 0.0 {
            0.0
        } else if x < eta {
            c * x * x / (2.0 * eta)
        } else if x <= e3 - eta {
            c * x - c * eta / 2.0
        } else if x < e3 {
            let t = x - (e3 - eta);
            (c * (e3 - eta) - c * eta / 2.0) + c * t + (d - c) * t * t / (2.0 * eta)
        } else {
            x - 2.0 * x.sqrt() / x.ln()
        }
    };
    let grad = move |x: &[f64]| -> Vec<f64> {
        let x = x[0];
        let g = if x <= 0.0 {
            0.0
        } else if x < eta {
            c * x / eta
        } else if x <= e3 - eta {
            c
        } else if x < e3 {
            c + (d - c) * (x - (e3 - eta)) / eta
        } else {
            let l = x.ln();
            1.0 - (l - 2.0) / (x.sqrt() * l * l)
        };
        vec![g]
    };
    ConvexFunctionRep::closed_with_grad(1, unbounded_window(1), Arc::new(f), Arc::new(grad))
}

fn sqrt_cusp_candidate() -> ConvexFunctionRep {
    ConvexFunctionRep::closed_with_grad(
        1,
        unbounded_window(1),
        Arc::new(|x: &[f64]| {
            if x[0] >= -0.5 {
                x[0] + 1.0
            } else {
                -1.0 / (4.0 * x[0])
            }
        }),
        Arc::new(|x: &[f64]| {
            vec![if x[0] >= -0.5 { 1.0 } else { 1.0 / (4.0 * x[0] * x[0]) }]
        }),
    )
}

/// Dual of the `sqrt_cusp` candidate: `-sqrt(s)` on [0, 1].
pub fn sqrt_cusp_dual_value(s: f64) -> f64 {
    let tol = 1e-9;
    if !(-tol..=1.0 + tol).contains(&s) {
        return f64::INFINITY;
    }
    -s.max(0.0).sqrt()
}

// === canonical potential ====================================================

/// Canonical potential of a polytope: closed-form dual values, the finite
/// mask, and the primal potential recovered by conjugating them back.
pub struct CanonicalPotential {
    pub dual_grid: TensorGrid,
    /// Closed-form dual values, +infinity outside the polytope.
    pub dual_values: Vec<f64>,
    pub primal: ConvexFunctionRep,
}

/// The half entropy sum over facet distances,
///
/// ```text
///     G(s) = (1/2) sum_i l_i(s) log l_i(s) ,      l_i(s) = <s, u_i> - lambda_i ,
/// ```
///
/// with `t log t` continued by 0 at t = 0; +infinity outside the polytope.
pub fn guillemin_value(p: &DelzantPolytope, s: &[f64]) -> f64 {
    let tol = 1e-9;
    let mut acc = 0.0;
    for facet in p.facets() {
        let l = facet.value(s);
        if l < -tol {
            return f64::INFINITY;
        }
        acc += xlogx(l.max(0.0));
    }
    0.5 * acc
}

/// Sample [`guillemin_value`] on the polytope's bounding box and conjugate
/// the samples back to a primal potential on a chart box.
pub fn guillemin_potential(p: &DelzantPolytope) -> Result<CanonicalPotential> {
    let n = p.dim();
    let (dual_cells, chart_r, chart_cells) = match n {
        1 => (4096usize, 32.0f64, 4096usize),
        2 => (768, 32.0, 1024),
        3 => (96, 16.0, 64),
        _ => {
            return Err(Error::Dimension(format!(
                "canonical potentials on grids support dimensions 1 through 3, got {n}"
            )))
        }
    };
    let bbox = p.bounding_box();
    let dual_axes = bbox
        .iter()
        .map(|&(lo, hi)| Axis::new(lo, hi, dual_cells + 1))
        .collect::<Result<Vec<_>>>()?;
    let dual_grid = TensorGrid::new(dual_axes)?;
    let mut dual_values = vec![0.0f64; dual_grid.len()];
    for (flat, idx) in dual_grid.iter_indices().enumerate() {
        dual_values[flat] = guillemin_value(p, &dual_grid.point(&idx));
    }
    if !dual_values.iter().any(|v| v.is_finite()) {
        return Err(Error::Precondition(
            "canonical dual values are infinite on the whole sampling grid".into(),
        ));
    }
    let chart_axes = (0..n)
        .map(|_| Axis::new(-chart_r, chart_r, chart_cells + 1))
        .collect::<Result<Vec<_>>>()?;
    let chart_grid = TensorGrid::new(chart_axes)?;
    let primal_values = grid_conjugate(&dual_grid, &dual_values, &chart_grid);
    let primal = ConvexFunctionRep::gridded(chart_grid, primal_values)?;
    Ok(CanonicalPotential {
        dual_grid,
        dual_values,
        primal,
    })
}

// === tests ==================================================================
