//! Membership and regularity classification for toric potentials.
//!
//! The report answers, for a candidate potential `phi` with convex lift
//! `F_phi` and dual `G = G_phi`:
//!
//! ```text
//! is_toric_psh   F_phi <= F_P + C with C stable under box growth,
//!                and every sampled subgradient inside P        (flag + C)
//! in_E_tor       G finite on every interior node past the margin
//! Ep             integral_P |G|^p dV finite, for each requested p
//! bounded        G bounded on the closure of P, with its sup norm
//! lelong         nu(vertex) via the chart functionals of dom G
//! loglip/gradlog scale-fitted Log-Lipschitz constants for G
//! eps_star       largest tested eps with integral_P e^{eps|grad G|} finite
//! ```
//!
//! A negative verdict is an ordinary report, never an error; errors are
//! reserved for inputs the classifiers cannot measure at all (an empty
//! finite mask, energy classes of a non-psh candidate).

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convexfn::ConvexFunctionRep;
use crate::error::{Error, Result};
use crate::monge_ampere::{
    exp_gradient_norm_integral, level_divergent, margin_divergent, pushforward, CellAtom, Chi,
    PushforwardMeasure, QuadratureResult,
};
use crate::polytope::DelzantPolytope;
use crate::potentials::ToricPotential;
use crate::transform::{DualFunction, TransformConfig};

// === thresholds =============================================================

/// Relative stabilization tolerance for box-grown constants (C, M_eps).
pub const TOL_STABLE: f64 = 1e-3;
/// Inflation applied to P when testing subgradient membership.
pub const TOL_GRADIENT: f64 = 1e-4;
/// Lelong numbers at or below this count as vanishing.
pub const TOL_LELONG: f64 = 0.05;
/// Interior margin for "finite on int P", in dual grid cells.
pub const MARGIN_CELLS: f64 = 2.0;
/// Cap on fitted Log-Lipschitz constants; no constant fits above this.
pub const C_MAX: f64 = 1e3;

/// Default exponents for the L^p energy classes.
pub const DEFAULT_P_LIST: [f64; 2] = [1.0, 2.0];
/// Default scales for the exponential gradient integral.
pub const DEFAULT_EPS_LIST: [f64; 3] = [0.25, 0.5, 1.0];

const LEVEL_CONTRACTION: f64 = 0.75;
const SCALE_GROWTH: f64 = 1.3;
const MIN_PAIRS: usize = 8;
const PAIR_SEED: u64 = 0x746f_7270;

// === psh certificate ========================================================

/// Outcome of the psh test, with both sub-criteria exposed.
#[derive(Debug, Clone, PartialEq)]
pub struct PshCertificate {
    pub is_psh: bool,
    /// `sup over the larger box of F - F_P`.
    pub c: f64,
    pub c_stable: bool,
    pub gradients_in_p: bool,
}

/// Decide whether `F` is the lift of a toric psh potential on the variety
/// of `P`: the excess `F - F_P` must stay bounded (its sup over `[-r, r]^n`
/// stable between the two radii) and sampled subgradients must lie in `P`.
pub fn classify_psh(f: &ConvexFunctionRep, p: &DelzantPolytope) -> Result<PshCertificate> {
    classify_psh_at(f, p, 8.0, 16.0)
}

/// `classify_psh` with explicit box radii, `r_prev < r_last`.
pub fn classify_psh_at(
    f: &ConvexFunctionRep,
    p: &DelzantPolytope,
    r_prev: f64,
    r_last: f64,
) -> Result<PshCertificate> {
    if f.dim() != p.dim() {
        return Err(Error::Input(format!(
            "function dimension {} does not match polytope dimension {}",
            f.dim(),
            p.dim()
        )));
    }
    if !(r_prev > 0.0 && r_last > r_prev) {
        return Err(Error::Input(format!(
            "box radii must satisfy 0 < r_prev < r_last, got {r_prev}, {r_last}"
        )));
    }
    let excess = |x: &[f64]| f.eval(x) - p.support_value(x);
    let c_prev = sup_over_box(&excess, f.window(), r_prev)?;
    let c_last = sup_over_box(&excess, f.window(), r_last)?;
    let c_stable = (c_last - c_prev).abs() <= TOL_STABLE * (1.0 + c_last.abs());
    let per_axis = match f.dim() {
        1 => 257,
        2 => 33,
        _ => 9,
    };
    let range = f.gradient_range(r_last, per_axis)?;
    let gradients_in_p = range.samples.iter().all(|g| p.contains(g, TOL_GRADIENT));
    Ok(PshCertificate {
        is_psh: c_stable && gradients_in_p,
        c: c_last,
        c_stable,
        gradients_in_p,
    })
}

fn sup_over_box(f: &dyn Fn(&[f64]) -> f64, window: &[(f64, f64)], r: f64) -> Result<f64> {
    let n = window.len();
    let per_axis = match n {
        1 => 513,
        2 => 65,
        _ => 17,
    };
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for k in 0..n {
        lo[k] = window[k].0.max(-r);
        hi[k] = window[k].1.min(r);
        if !(lo[k] < hi[k]) {
            return Err(Error::Precondition(format!(
                "window on axis {k} does not meet the box of radius {r}"
            )));
        }
    }
    let (mut best, mut at) = scan_box(f, &lo, &hi, per_axis);
    // An interior maximum can fall between nodes of the coarse scan, and the
    // miss grows with the box; contract around the best node until the local
    // spacing no longer matters.
    let mut zlo = lo.clone();
    let mut zhi = hi.clone();
    for _ in 0..4 {
        for k in 0..n {
            let h = (zhi[k] - zlo[k]) / (per_axis - 1) as f64;
            zlo[k] = (at[k] - h).max(lo[k]);
            zhi[k] = (at[k] + h).min(hi[k]);
        }
        let (b, a) = scan_box(f, &zlo, &zhi, per_axis);
        if b > best {
            best = b;
            at = a;
        }
    }
    Ok(best)
}

fn scan_box(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    per_axis: usize,
) -> (f64, Vec<f64>) {
    let n = lo.len();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0f64; n];
    let mut best = f64::NEG_INFINITY;
    let mut at = lo.to_vec();
    loop {
        for k in 0..n {
            x[k] = lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / (per_axis - 1) as f64;
        }
        let v = f(&x);
        if v.is_finite() && v > best {
            best = v;
            at = x.clone();
        }
        let mut k = n;
        loop {
            if k == 0 {
                return (best, at);
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

fn schedule_levels(cfg: &TransformConfig) -> (f64, f64) {
    let s = &cfg.r_schedule;
    match s.len() {
        0 => (8.0, 16.0),
        1 => (0.5 * s[0], s[0]),
        n => (s[n - 2], s[n - 1]),
    }
}

// === energy classes =========================================================

/// One `L^p` verdict: the integral, and whether the class membership holds.
#[derive(Debug, Clone)]
pub struct PNorm {
    pub p: f64,
    pub finite: bool,
    pub integral: QuadratureResult,
}

#[derive(Debug, Clone)]
pub struct EnergyClassification {
    pub in_e_tor: bool,
    pub norms: Vec<PNorm>,
}

/// Finiteness of the dual on the interior of `P`, past a margin of
/// `MARGIN_CELLS` grid cells.
pub fn in_e_tor(dual: &DualFunction, p: &DelzantPolytope) -> Result<bool> {
    if dual.grid.dim() != p.dim() {
        return Err(Error::Input(format!(
            "dual grid dimension {} does not match polytope dimension {}",
            dual.grid.dim(),
            p.dim()
        )));
    }
    let margin = MARGIN_CELLS * max_step(dual);
    for i in 0..dual.grid.len() {
        if dual.finite_mask[i] {
            continue;
        }
        let s = dual.grid.point_flat(i);
        if p.boundary_distance_clamped(&s) >= margin {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `integral_P |G|^p dV` over the finite cells, with divergence detection.
pub fn lp_norm(dual: &DualFunction, p: &DelzantPolytope, pow: f64) -> Result<QuadratureResult> {
    if !(pow >= 1.0) || !pow.is_finite() {
        return Err(Error::Input(format!("L^p exponent must be >= 1, got {pow}")));
    }
    let m = pushforward(dual, p)?;
    Ok(dv_integral(
        &m,
        &|c| c.mean_value.abs().powf(pow),
        &|c| c.mean_value_prev.abs().powf(pow),
    ))
}

/// Membership in E_tor and in the requested L^p energy classes.
pub fn classify_energy(t: &ToricPotential, p_list: &[f64]) -> Result<EnergyClassification> {
    let (r_prev, r_last) = schedule_levels(t.config());
    let cert = classify_psh_at(t.candidate(), t.polytope(), r_prev, r_last)?;
    if !cert.is_psh {
        return Err(Error::Precondition(
            "candidate is not toric psh; energy classes are undefined".into(),
        ));
    }
    let dual = t.dual_phi()?;
    let in_e = in_e_tor(dual, t.polytope())?;
    let mut norms = Vec::with_capacity(p_list.len());
    for &pw in p_list {
        let integral = lp_norm(dual, t.polytope(), pw)?;
        norms.push(PNorm {
            p: pw,
            finite: in_e && !integral.divergent,
            integral,
        });
    }
    Ok(EnergyClassification { in_e_tor: in_e, norms })
}

/// `integral_P -chi(min_P G - G(s)) dV(s)` over a prepared cell measure;
/// `min_last`/`min_prev` are the dual minimum at the last two levels.
pub fn chi_energy(
    m: &PushforwardMeasure,
    min_last: f64,
    min_prev: f64,
    chi: &Chi,
) -> QuadratureResult {
    dv_integral(
        m,
        &|c| -chi.eval(min_last - c.mean_value),
        &|c| -chi.eval(min_prev - c.mean_value_prev),
    )
}

/// Whether the weighted energy `integral -chi(min_P G - G) dV` is finite.
pub fn classify_chi(t: &ToricPotential, chi: &Chi) -> Result<(bool, QuadratureResult)> {
    chi.check_weight()?;
    let dual = t.dual_phi()?;
    if dual.finite_count() == 0 {
        return Err(Error::Unstable(
            "dual transform has no finite nodes; the weighted energy is undefined".into(),
        ));
    }
    let values = dual.values();
    let prev = dual.prev_values();
    let mut min_last = f64::INFINITY;
    let mut min_prev = f64::INFINITY;
    for i in 0..values.len() {
        if dual.finite_mask[i] {
            min_last = min_last.min(values[i]);
            min_prev = min_prev.min(prev[i]);
        }
    }
    let m = pushforward(dual, t.polytope())?;
    let result = chi_energy(&m, min_last, min_prev, chi);
    Ok((!result.divergent, result))
}

fn dv_integral(
    m: &PushforwardMeasure,
    w: &dyn Fn(&CellAtom) -> f64,
    w_prev: &dyn Fn(&CellAtom) -> f64,
) -> QuadratureResult {
    let mut value = 0.0;
    let mut prev = 0.0;
    let mut overflow = false;
    for c in &m.cells {
        let wv = w(c);
        if !wv.is_finite() {
            overflow = true;
            continue;
        }
        value += wv * c.volume;
        prev += w_prev(c) * c.volume;
    }
    let divergent = overflow || level_divergent(value, prev) || margin_divergent(m, w);
    QuadratureResult {
        value,
        error_estimate: (value - prev).abs(),
        cells_used: m.cells.len(),
        divergent,
    }
}

fn max_step(dual: &DualFunction) -> f64 {
    dual.grid
        .axes()
        .iter()
        .map(|a| a.step())
        .fold(0.0f64, f64::max)
}

// === Lelong numbers =========================================================

/// Lelong numbers at the toric fixed points: for a vertex `v` with active
/// facets `i_1..i_n`,
///
/// ```text
/// nu(v) = min over finite nodes s of l_{i_1}(s) + ... + l_{i_n}(s)
/// ```
///
/// the chart-functional distance from `v` to `dom G`. Keys are `vertex_k`
/// in the polytope's vertex order.
pub fn lelong_numbers(t: &ToricPotential) -> Result<BTreeMap<String, f64>> {
    let dual = t.dual_phi()?;
    let p = t.polytope();
    if dual.finite_count() == 0 {
        return Err(Error::Unstable(
            "dual transform has no finite nodes; Lelong numbers are undefined".into(),
        ));
    }
    let nv = p.vertices().len();
    let mut best = vec![f64::INFINITY; nv];
    for i in 0..dual.grid.len() {
        if !dual.finite_mask[i] {
            continue;
        }
        let s = dual.grid.point_flat(i);
        let fv: Vec<f64> = p.facets().iter().map(|f| f.value(&s).max(0.0)).collect();
        for (vi, active) in p.vertex_facets().iter().enumerate() {
            let sum: f64 = active.iter().map(|&k| fv[k]).sum();
            if sum < best[vi] {
                best[vi] = sum;
            }
        }
    }
    let mut out = BTreeMap::new();
    for (vi, b) in best.into_iter().enumerate() {
        out.insert(format!("vertex_{vi}"), b.max(0.0));
    }
    Ok(out)
}

// === growth certificate =====================================================

/// The constant `M_eps` in `F >= (1 - eps) F_P - M_eps`, certified by
/// agreement across two sampling boxes. A non-stabilizing maximum means the
/// lower bound fails (the potential has positive Lelong numbers) and is
/// reported as an error.
///
/// The bound scales `F_P` toward the origin, which must be a point of `P`
/// for the scaled function to stay a minorant. When `P` does not contain
/// the origin the scaling is re-centered at the vertex centroid: the
/// certified inequality becomes `F >= (1 - eps) F_P + eps <x, s0> - M_eps`,
/// which is the same statement for the polytope translated by `-s0`.
pub fn growth_certificate(
    f: &ConvexFunctionRep,
    p: &DelzantPolytope,
    eps: f64,
) -> Result<f64> {
    growth_certificate_at(f, p, eps, 8.0, 16.0)
}

/// `growth_certificate` with explicit box radii.
pub fn growth_certificate_at(
    f: &ConvexFunctionRep,
    p: &DelzantPolytope,
    eps: f64,
    r_prev: f64,
    r_last: f64,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Input(format!("growth scale must be in (0,1), got {eps}")));
    }
    let s0 = if p.contains(&vec![0.0; p.dim()], 1e-9) {
        vec![0.0; p.dim()]
    } else {
        p.vertex_centroid()
    };
    let deficit = |x: &[f64]| {
        let recenter: f64 = x.iter().zip(&s0).map(|(xi, si)| xi * si).sum();
        (1.0 - eps) * p.support_value(x) + eps * recenter - f.eval(x)
    };
    let m_prev = sup_over_box(&deficit, f.window(), r_prev)?;
    let m_last = sup_over_box(&deficit, f.window(), r_last)?;
    if (m_last - m_prev).abs() > TOL_STABLE * (1.0 + m_last.abs()) {
        return Err(Error::Unstable(format!(
            "growth constant M_{eps} does not stabilize: {m_prev:.6} at r = {r_prev}, {m_last:.6} at r = {r_last}"
        )));
    }
    Ok(m_last)
}

// === sup bound ==============================================================

/// Both sides of the sup inequality `sup phi <= C_P + |G|_L1 / kappa_n vol P`.
#[derive(Debug, Clone, Serialize)]
pub struct SupBound {
    pub lhs: f64,
    pub rhs: f64,
    pub c_p: f64,
    pub l1: f64,
}

/// The normalizing constant `kappa_n = 2^{1/(n+1)} - 1` bound on the minimum:
/// a convex `G <= 0` on `P` satisfies `|min G| <= |G|_L1 / (kappa_n vol P)`.
pub fn min_bound(n: usize, vol: f64, l1: f64) -> f64 {
    let kappa = 2f64.powf(1.0 / (n as f64 + 1.0)) - 1.0;
    l1 / (kappa * vol)
}

/// Compare `sup phi` against the integral bound through the dual L^1 norm.
pub fn sup_bound_check(t: &ToricPotential) -> Result<SupBound> {
    let lhs = t.sup_phi()?;
    let c_p = t
        .dual0()?
        .sup()
        .ok_or_else(|| Error::Unstable("reference dual has no finite nodes".into()))?;
    let l1 = lp_norm(t.dual_phi()?, t.polytope(), 1.0)?;
    if l1.divergent {
        return Err(Error::Unstable(
            "L1 norm of the dual diverges; the sup bound is vacuous".into(),
        ));
    }
    let p = t.polytope();
    let rhs = c_p + min_bound(p.dim(), p.volume()?, l1.value);
    Ok(SupBound { lhs, rhs, c_p, l1: l1.value })
}

// === regularity =============================================================

/// Boundedness and Log-Lipschitz diagnostics for the dual of a finite-energy
/// potential. Absent optional fields mean the regularity in question could
/// not be certified.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub bounded: bool,
    pub sup_norm: Option<f64>,
    /// `sup |F_phi - F_P|` over the sampling box, the primal half of the
    /// sup-norm identity.
    pub primal_gap_sup: f64,
    pub loglip_c: Option<f64>,
    pub gradlog_c: Option<f64>,
    pub eps_star: Option<f64>,
}

pub fn regularity(t: &ToricPotential, eps_list: &[f64]) -> Result<RegularityReport> {
    let dual = t.dual_phi()?;
    let p = t.polytope();
    if !in_e_tor(dual, p)? {
        return Err(Error::Precondition(
            "potential is outside E_tor; regularity diagnostics need a finite dual".into(),
        ));
    }

    let nlev = dual.levels.len();
    let mut bounded = true;
    let mut sup = 0.0f64;
    for i in 0..dual.grid.len() {
        let s = dual.grid.point_flat(i);
        if !p.contains(&s, 1e-9) {
            continue;
        }
        if dual.finite_mask[i] {
            sup = sup.max(dual.levels[nlev - 1][i].abs());
            continue;
        }
        if nlev < 3 {
            bounded = false;
            continue;
        }
        let d1 = (dual.levels[nlev - 2][i] - dual.levels[nlev - 3][i]).abs();
        let d2 = (dual.levels[nlev - 1][i] - dual.levels[nlev - 2][i]).abs();
        if d2 <= LEVEL_CONTRACTION * d1 + 1e-12 {
            sup = sup.max(dual.levels[nlev - 1][i].abs());
        } else {
            bounded = false;
        }
    }

    let (_, r_last) = schedule_levels(t.config());
    let gap = |x: &[f64]| (t.candidate().eval(x) - p.support_value(x)).abs();
    let primal_gap_sup = sup_over_box(&gap, t.candidate().window(), r_last)?;

    let loglip_c = loglip_fit(dual, p);
    let m = pushforward(dual, p)?;
    let gradlog_c = gradlog_fit(&m);

    let mut eps_star: Option<f64> = None;
    for &e in eps_list {
        let r = exp_gradient_norm_integral(dual, p, e)?;
        if !r.divergent {
            eps_star = Some(eps_star.map_or(e, |b| b.max(e)));
        }
    }

    Ok(RegularityReport {
        bounded,
        sup_norm: bounded.then_some(sup),
        primal_gap_sup,
        loglip_c,
        gradlog_c,
        eps_star,
    })
}

/// Fit `|G(s) - G(s')| <= C |s - s'| log(C / |s - s'|)` scale by scale over
/// dyadic separations `2^-k`, `k = 2..12`. Pairs anchor at the finite nodes
/// nearest the boundary plus seeded random interior pairs. Present iff every
/// per-scale constant is below `C_MAX` and the sequence does not keep
/// growing toward fine scales.
fn loglip_fit(dual: &DualFunction, p: &DelzantPolytope) -> Option<f64> {
    let grid = &dual.grid;
    let values = dual.values();
    let centroid = p.vertex_centroid();
    let n = grid.dim();

    let mut anchors: Vec<(f64, usize)> = Vec::new();
    for i in 0..grid.len() {
        if !dual.finite_mask[i] {
            continue;
        }
        let s = grid.point_flat(i);
        if !p.contains(&s, 1e-9) {
            continue;
        }
        let bd = p.boundary_distance_clamped(&s);
        if bd > 0.0 {
            anchors.push((bd, i));
        }
    }
    anchors.sort_by(|a, b| a.partial_cmp(b).expect("boundary distances are finite"));
    anchors.truncate(32);

    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
    let bbox = p.bounding_box();
    let mut cs: Vec<f64> = Vec::new();
    for k in 2..=12 {
        let r = 0.5f64.powi(k);
        let mut worst = 0.0f64;
        let mut pairs = 0usize;
        for &(_, i) in &anchors {
            let s = grid.point_flat(i);
            let mut u: Vec<f64> = centroid.iter().zip(&s).map(|(c, x)| c - x).collect();
            let len = norm(&u);
            if len < 1e-12 {
                continue;
            }
            for v in &mut u {
                *v /= len;
            }
            let s2: Vec<f64> = s.iter().zip(&u).map(|(x, d)| x + r * d).collect();
            let g2 = grid.interpolate(values, &s2);
            if g2.is_finite() {
                worst = worst.max((values[i] - g2).abs() / r);
                pairs += 1;
            }
        }
        for _ in 0..128 {
            let s: Vec<f64> = bbox.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect();
            if !p.contains(&s, 0.0) {
                continue;
            }
            let u = random_direction(&mut rng, n);
            let s2: Vec<f64> = s.iter().zip(&u).map(|(x, d)| x + r * d).collect();
            let g1 = grid.interpolate(values, &s);
            let g2 = grid.interpolate(values, &s2);
            if g1.is_finite() && g2.is_finite() {
                worst = worst.max((g1 - g2).abs() / r);
                pairs += 1;
            }
        }
        if pairs < MIN_PAIRS {
            continue;
        }
        cs.push(solve_log_constant(worst, r));
    }
    fitted_constant(&cs)
}

/// Fit `|grad G(s)| <= C log(C / boundary_distance(s))` from the cell
/// gradients, bucketed by dyadic boundary distance.
fn gradlog_fit(m: &PushforwardMeasure) -> Option<f64> {
    let mut buckets: BTreeMap<i32, f64> = BTreeMap::new();
    for c in &m.cells {
        if c.boundary_distance <= 0.0 {
            continue;
        }
        let k = (-c.boundary_distance.log2()).floor() as i32;
        if !(1..=30).contains(&k) {
            continue;
        }
        let g = norm(&c.gradient);
        buckets
            .entry(k)
            .and_modify(|v| *v = v.max(g))
            .or_insert(g);
    }
    let cs: Vec<f64> = buckets
        .iter()
        .map(|(&k, &mk)| solve_log_constant(mk, 0.5f64.powi(k)))
        .collect();
    fitted_constant(&cs)
}

/// Accept a per-scale constant sequence (coarse to fine) when it stays under
/// the cap and does not sustain geometric growth; the fitted constant is the
/// worst scale.
fn fitted_constant(cs: &[f64]) -> Option<f64> {
    if cs.len() < 5 {
        return None;
    }
    if cs.iter().any(|&c| !(c <= C_MAX)) {
        return None;
    }
    let ratios: Vec<f64> = (2..cs.len()).map(|i| cs[i] / cs[i - 2].max(1e-300)).collect();
    let tail = &ratios[ratios.len().saturating_sub(5)..];
    let grown = tail.iter().filter(|&&q| q >= SCALE_GROWTH).count();
    let needed = if tail.len() >= 3 { 3 } else { 1 };
    if grown >= needed {
        return None;
    }
    Some(cs.iter().copied().fold(0.0, f64::max))
}

/// Smallest `C >= r` with `C log(C / r) = m` (the map is increasing there).
fn solve_log_constant(m: f64, r: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    let f = |c: f64| c * (c / r).ln();
    let mut lo = r;
    let mut hi = r.max(1e-9);
    while f(hi) < m {
        hi *= 2.0;
        if hi > 1e12 {
            return hi;
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = norm(&v);
        if len > 1e-6 && len <= 1.0 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// === report =================================================================

/// Full classification of one toric potential, in the report JSON shape.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub is_toric_psh: bool,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "in_E_tor")]
    pub in_e_tor: bool,
    #[serde(rename = "Ep")]
    pub ep: BTreeMap<String, bool>,
    pub bounded: Option<bool>,
    pub sup_norm: Option<f64>,
    pub lelong: BTreeMap<String, f64>,
    #[serde(rename = "loglip_C")]
    pub loglip_c: Option<f64>,
    #[serde(rename = "gradlog_C")]
    pub gradlog_c: Option<f64>,
    pub eps_star: Option<f64>,
    pub notes: Vec<String>,
}

pub fn classify(t: &ToricPotential) -> Result<ClassificationReport> {
    classify_with(t, &DEFAULT_P_LIST, &DEFAULT_EPS_LIST)
}

pub fn classify_with(
    t: &ToricPotential,
    p_list: &[f64],
    eps_list: &[f64],
) -> Result<ClassificationReport> {
    let p = t.polytope();
    let (r_prev, r_last) = schedule_levels(t.config());
    let cert = classify_psh_at(t.candidate(), p, r_prev, r_last)?;
    let mut notes = Vec::new();
    notes.push(format!(
        "psh certificate: C stable = {}, subgradients in P = {}",
        cert.c_stable, cert.gradients_in_p
    ));
    if !cert.is_psh {
        notes.push("candidate is not toric psh; energy and regularity classes not evaluated".into());
        return Ok(ClassificationReport {
            is_toric_psh: false,
            c: cert.c,
            in_e_tor: false,
            ep: BTreeMap::new(),
            bounded: None,
            sup_norm: None,
            lelong: BTreeMap::new(),
            loglip_c: None,
            gradlog_c: None,
            eps_star: None,
            notes,
        });
    }

    let dual = t.dual_phi()?;
    if dual.finite_count() == 0 {
        return Err(Error::Unstable(
            "dual transform has no finite nodes; nothing to classify".into(),
        ));
    }

    let energy = classify_energy(t, p_list)?;
    let mut ep = BTreeMap::new();
    let mut norm_notes = Vec::new();
    for pn in &energy.norms {
        let key = fmt_exponent(pn.p);
        norm_notes.push(format!(
            "integral |G|^{} dV = {:.6}{}",
            key,
            pn.integral.value,
            if pn.integral.divergent { " (divergent)" } else { "" }
        ));
        ep.insert(key, pn.finite);
    }
    notes.push(format!("energy: {}", norm_notes.join(", ")));

    let lelong = lelong_numbers(t)?;
    notes.push(
        "lelong numbers use the derived chart formula: min over dom G of the active facet sum"
            .into(),
    );

    for &e in &[0.25, 0.5] {
        match growth_certificate_at(t.candidate(), p, e, r_prev, r_last) {
            Ok(m) => notes.push(format!("growth: M_{e} = {m:.6}")),
            Err(_) => notes.push(format!("growth: M_{e} does not stabilize")),
        }
    }

    let (bounded, sup_norm, loglip_c, gradlog_c, eps_star) = if energy.in_e_tor {
        let reg = regularity(t, eps_list)?;
        notes.push(format!("regularity pair sampling seeded with {PAIR_SEED:#x}"));
        notes.push(format!(
            "sup-norm cross-check: primal gap sup = {:.6}, dual sup = {}",
            reg.primal_gap_sup,
            reg.sup_norm
                .map_or("unbounded".to_string(), |v| format!("{v:.6}"))
        ));
        (Some(reg.bounded), reg.sup_norm, reg.loglip_c, reg.gradlog_c, reg.eps_star)
    } else {
        notes.push("not in E_tor: boundedness and regularity diagnostics are skipped".into());
        (None, None, None, None, None)
    };

    Ok(ClassificationReport {
        is_toric_psh: true,
        c: cert.c,
        in_e_tor: energy.in_e_tor,
        ep,
        bounded,
        sup_norm,
        lelong,
        loglip_c,
        gradlog_c,
        eps_star,
        notes,
    })
}

fn fmt_exponent(p: f64) -> String {
    if (p - p.round()).abs() < 1e-12 {
        format!("{}", p.round() as i64)
    } else {
        format!("{p}")
    }
}

// === tests ==================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, TensorGrid};
    use crate::polytope;
    use crate::potentials::gallery;

    fn interval_potential(spec: &str) -> ToricPotential {
        gallery(spec).expect("gallery entry exists")
    }

    #[test]
    fn reference_is_psh_with_half_log_two() {
        let t = interval_potential("pn_fs?n=1");
        let cert = classify_psh(t.reference(), t.polytope()).expect("certificate");
        assert!(cert.is_psh, "reference must pass both psh criteria");
        assert!(cert.c_stable && cert.gradients_in_p);
        assert!(
            (cert.c - 0.5 * 2f64.ln()).abs() < 1e-3,
            "C = {} should be log(2)/2",
            cert.c
        );
    }

    #[test]
    fn doubled_support_function_is_not_psh() {
        let p = polytope::interval();
        let f = ConvexFunctionRep::closed(
            1,
            vec![(f64::NEG_INFINITY, f64::INFINITY)],
            std::sync::Arc::new(|x: &[f64]| 2.0 * x[0].max(0.0)),
        );
        let cert = classify_psh(&f, &p).expect("certificate");
        assert!(!cert.is_psh);
        assert!(!cert.c_stable, "sup of F_P grows linearly with the box");
        assert!(!cert.gradients_in_p, "slope 2 lies outside [0,1]");
    }

    #[test]
    fn face_potentials_fail_e_tor_but_canonical_passes() {
        let phi1 = interval_potential("phi1?n=1");
        let e1 = classify_energy(&phi1, &[1.0]).expect("classification");
        assert!(!e1.in_e_tor, "dom G = {{1}} misses the interior");

        let g = interval_potential("guillemin");
        let eg = classify_energy(&g, &[1.0, 2.0]).expect("classification");
        assert!(eg.in_e_tor);
        assert!(eg.norms.iter().all(|n| n.finite), "t log t is bounded, every L^p holds");
    }

    #[test]
    fn slow_moment_example_is_l1_but_not_l2() {
        let t = interval_potential("ex311iii");
        let e = classify_energy(&t, &[1.0, 2.0]).expect("classification");
        assert!(e.in_e_tor, "the dual is finite on the interior margin");
        assert!(e.norms[0].finite, "integral |G| dV converges");
        assert!(!e.norms[1].finite, "integral |G|^2 dV diverges near s = 1");
    }

    #[test]
    fn chi_energy_separates_weight_growth() {
        let axis = Axis::new(0.0, 1.0, 2049).expect("axis");
        let grid = TensorGrid::new(vec![axis]).expect("grid");
        let values: Vec<f64> = grid
            .axes()[0]
            .nodes()
            .iter()
            .map(|&s| if s <= 0.0 { f64::INFINITY } else { s.powf(-0.5) - 2.0 })
            .collect();
        let mask: Vec<bool> = values.iter().map(|v| v.is_finite()).collect();
        let dual = DualFunction {
            grid: grid.clone(),
            levels: vec![values.clone(), values.clone(), values.clone()],
            r_schedule: vec![8.0, 16.0, 32.0],
            finite_mask: mask,
            windows: vec![vec![(-8.0, 8.0)], vec![(-16.0, 16.0)], vec![(-32.0, 32.0)]],
        };
        let p = polytope::interval();
        let m = pushforward(&dual, &p).expect("measure");
        let min_g = values
            .iter()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, |a, &b| a.min(b));

        let linear = chi_energy(&m, min_g, min_g, &Chi::Linear);
        assert!(
            !linear.divergent,
            "integral (G - min G) dV is finite for an L^1 dual, got {}",
            linear.value
        );
        let steep = chi_energy(&m, min_g, min_g, &Chi::Exp { k: 4.0 });
        assert!(steep.divergent, "e^{{4/sqrt(s)}} is not integrable at 0");
    }

    #[test]
    fn lelong_numbers_of_the_face_potentials() {
        let phi1 = interval_potential("phi1?n=1");
        let nu = lelong_numbers(&phi1).expect("lelong");
        assert!((nu["vertex_0"] - 1.0).abs() < 1e-6 || (nu["vertex_1"] - 1.0).abs() < 1e-6);
        let total: f64 = nu.values().sum();
        assert!((total - 1.0).abs() < 1e-6, "one unit mass at dom G = {{1}}, got {nu:?}");

        let phi2 = interval_potential("phi2?n=2");
        let nu2 = lelong_numbers(&phi2).expect("lelong");
        let positives: Vec<_> = nu2.values().filter(|&&v| v > TOL_LELONG).collect();
        assert_eq!(positives.len(), 1, "exactly one positive Lelong number, got {nu2:?}");
        assert!((positives[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lelong_matches_the_asymptotic_slope_in_1d() {
        let phi1 = interval_potential("phi1?n=1");
        let nu = lelong_numbers(&phi1).expect("lelong");
        let f = phi1.candidate();
        let dom_left = f.eval(&[-1e5]) / -1e5;
        let dom_right = f.eval(&[1e5]) / 1e5;
        for (vi, v) in phi1.polytope().vertices().iter().enumerate() {
            let expected = if v[0] < 0.5 { dom_left } else { 1.0 - dom_right };
            let got = nu[&format!("vertex_{vi}")];
            assert!(
                (got - expected).abs() < 1e-6,
                "vertex {vi}: chart formula {got} vs slope oracle {expected}"
            );
        }
    }

    #[test]
    fn canonical_potential_has_vanishing_lelong_numbers() {
        let g = interval_potential("guillemin");
        let nu = lelong_numbers(&g).expect("lelong");
        for (k, v) in &nu {
            assert!(*v <= TOL_LELONG, "{k} = {v} should vanish, dom G = P");
        }
    }

    #[test]
    fn growth_certificate_stabilizes_for_the_reference_only() {
        let t = interval_potential("pn_fs?n=1");
        let m = growth_certificate(t.reference(), t.polytope(), 0.5).expect("certificate");
        assert!(m.abs() < 1e-2, "M_0.5 = {m} should vanish for the reference");

        let phi1 = interval_potential("phi1?n=1");
        let err = growth_certificate(phi1.candidate(), phi1.polytope(), 0.5);
        assert!(err.is_err(), "affine candidates violate every (1-eps) lower bound");
    }

    #[test]
    fn canonical_regularity_chain_is_fully_present() {
        let g = interval_potential("guillemin");
        let reg = regularity(&g, &DEFAULT_EPS_LIST).expect("regularity");
        assert!(reg.bounded);
        let sup = reg.sup_norm.expect("bounded reports a sup norm");
        assert!(
            (sup - 0.5 * 2f64.ln()).abs() < 2e-3,
            "sup |G| = {sup} should be log(2)/2 at the midpoint"
        );
        assert!(
            (reg.primal_gap_sup - sup).abs() < 5e-3,
            "primal gap {} and dual sup {} should agree",
            reg.primal_gap_sup,
            sup
        );
        assert!(reg.loglip_c.is_some(), "t log t is Log-Lipschitz");
        assert!(reg.gradlog_c.is_some());
        assert_eq!(reg.eps_star, Some(1.0), "the half-log gradient integrates at eps = 1");
    }

    #[test]
    fn kinked_candidate_regularity_thresholds() {
        let t = interval_potential("ex46?alpha=0.5");
        let reg = regularity(&t, &DEFAULT_EPS_LIST).expect("regularity");
        assert!(reg.bounded);
        let sup = reg.sup_norm.expect("sup norm");
        assert!((sup - 1.0).abs() < 1e-3, "|G| peaks at 1, got {sup}");
        assert!((reg.primal_gap_sup - 1.0).abs() < 1e-3);
        assert!(reg.loglip_c.is_some());
        assert!(reg.gradlog_c.is_some());
        assert_eq!(reg.eps_star, Some(0.25), "(2s)^{{-2 eps}} integrates only below eps = 1/2");
    }

    #[test]
    fn cusp_fails_the_whole_regularity_chain() {
        let t = interval_potential("sqrt_cusp");
        let reg = regularity(&t, &DEFAULT_EPS_LIST).expect("regularity");
        assert!(reg.bounded, "G = -sqrt(s) is bounded");
        let sup = reg.sup_norm.expect("sup norm");
        assert!((sup - 1.0).abs() < 1e-3, "sup |G| = 1 at s = 1, got {sup}");
        assert!(reg.loglip_c.is_none(), "sqrt growth beats every C r log(C/r)");
        assert!(reg.gradlog_c.is_none());
        assert_eq!(reg.eps_star, None, "exp(eps/(2 sqrt s)) never integrates");
    }

    #[test]
    fn slow_moment_example_is_unbounded() {
        let t = interval_potential("ex311iii");
        let reg = regularity(&t, &[0.25]).expect("regularity");
        assert!(!reg.bounded, "G blows up at s = 1");
        assert!(reg.sup_norm.is_none());
        assert_eq!(reg.eps_star, None);
    }

    #[test]
    fn sup_bound_holds_for_gallery_entries() {
        for spec in ["pn_fs?n=1", "guillemin", "ex310?eps=0.1&C=5", "ex46?alpha=0.5"] {
            let t = interval_potential(spec);
            let b = sup_bound_check(&t).expect("sup bound");
            assert!(
                b.lhs <= b.rhs + 1e-9,
                "{spec}: sup phi = {} exceeds bound {}",
                b.lhs,
                b.rhs
            );
        }
    }

    #[test]
    fn shifted_reference_saturates_the_sup_bound_shape() {
        let t = interval_potential("pn_fs?n=1");
        let base = sup_bound_check(&t).expect("sup bound");
        assert!(base.lhs.abs() < 1e-6, "phi = 0 has sup 0");
        assert!(base.rhs > 0.0, "the L1 side is strictly positive");
        assert!((base.c_p - 0.0).abs() < 1e-6, "sup G_0 = 0 at the vertices");
    }

    #[test]
    fn report_has_the_contract_keys_and_verdicts() {
        let g = interval_potential("guillemin");
        let report = classify(&g).expect("report");
        assert!(report.is_toric_psh && report.in_e_tor);
        assert_eq!(report.bounded, Some(true));
        assert_eq!(report.eps_star, Some(1.0));
        assert!(report.ep["1"] && report.ep["2"]);
        assert!(report.lelong.values().all(|&v| v <= TOL_LELONG));

        let json = serde_json::to_value(&report).expect("serializes");
        for key in [
            "is_toric_psh",
            "C",
            "in_E_tor",
            "Ep",
            "bounded",
            "sup_norm",
            "lelong",
            "loglip_C",
            "gradlog_C",
            "eps_star",
            "notes",
        ] {
            assert!(json.get(key).is_some(), "report JSON must carry `{key}`");
        }
    }

    #[test]
    fn face_potential_report_is_negative_but_not_an_error() {
        let phi2 = interval_potential("phi2?n=2");
        let report = classify(&phi2).expect("report");
        assert!(report.is_toric_psh, "max(x_i) is psh");
        assert!(!report.in_e_tor);
        assert_eq!(report.bounded, None);
        assert_eq!(report.sup_norm, None);
        assert_eq!(report.eps_star, None);
        assert!(!report.ep["1"]);
        let positive: Vec<_> = report
            .lelong
            .iter()
            .filter(|(_, &v)| v > TOL_LELONG)
            .collect();
        assert_eq!(positive.len(), 1, "one positive Lelong number, got {:?}", report.lelong);
    }

    #[test]
    fn e_tor_lelong_growth_three_way_agreement() {
        for spec in [
            "pn_fs?n=1",
            "f1?a=1&b=1",
            "guillemin",
            "ex310?eps=0.1&C=5",
            "ex46?alpha=0.5",
            "ex311iii",
            "sqrt_cusp",
            "phi1?n=1",
            "phi2?n=2",
        ] {
            let t = interval_potential(spec);
            let (r_prev, r_last) = schedule_levels(t.config());
            let in_e = in_e_tor(t.dual_phi().expect("dual"), t.polytope()).expect("flag");
            let nu_ok = lelong_numbers(&t)
                .expect("lelong")
                .values()
                .all(|&v| v <= TOL_LELONG);
            let growth_ok =
                growth_certificate_at(t.candidate(), t.polytope(), 0.5, r_prev, r_last).is_ok();
            assert_eq!(in_e, nu_ok, "{spec}: E_tor vs Lelong disagree");
            assert_eq!(in_e, growth_ok, "{spec}: E_tor vs growth certificate disagree");
        }
    }

    #[test]
    fn min_bound_dominates_cone_minima() {
        let bound = min_bound(1, 1.0, 0.5);
        assert!(bound >= 1.0, "the 1-d cone min -1 must obey |min| <= {bound}");
    }
}
