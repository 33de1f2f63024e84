//! Distances between toric potentials through their conjugates.
//!
//! The order-`p` distance between two potentials on the same polytope is the
//! `L^p` gap of their conjugates,
//!
//! ```text
//!     d_p(phi_1, phi_2)^p  =  integral_P |G_1 - G_2|^p dV ,
//! ```
//!
//! computed by cell quadrature on a shared dual grid. The quadrature runs
//! over the common finite mask eroded by a small margin, so values next to an
//! observed finite-to-infinite transition (where saturation is least
//! trustworthy) never enter the sum; a mask disagreement that survives the
//! margin means one conjugate is finite where the other is not, and the
//! distance is reported as divergent.
//!
//! The second half of the module diagnoses the convergence modes of the
//! kinked candidate family `ex310(eps_j, C_j)`. Its conjugates are hinges
//! `max(C_j (eps_j - s), 0)`, so the three modes separate cleanly: the
//! deviation set has volume `eps_j`, the uniform gap is `eps_j C_j`, and the
//! order-one distance is `eps_j^2 C_j / 2`. All three are measured from the
//! computed conjugates on grids aligned with the hinge.

use serde::Serialize;

use crate::classify::MARGIN_CELLS;
use crate::error::{Error, Result};
use crate::grid::TensorGrid;
use crate::monge_ampere::QuadratureResult;
use crate::polytope;
use crate::potentials::{ex310_candidate, ex310_cfg, fs_reference, ToricPotential};
use crate::transform::DualFunction;

/// Decay factor on a proxy sequence (last over first term) below which the
/// sequence counts as tending to zero.
pub const TOL_LIMIT: f64 = 0.3;

/// Relative slack allowed when checking that a proxy sequence is
/// nonincreasing.
const TOL_MONOTONE: f64 = 1e-9;

/// Smallest dual cell count for the hinge-aligned grids of [`ex310_modes`].
const ALIGNED_CELLS_MIN: usize = 4096;

/// Largest dual cell count tried when aligning a grid with a hinge.
const ALIGNED_CELLS_MAX: usize = 1 << 17;

// === the d_p distance ========================================================

/// `L^p(P)` distance between two conjugates on a shared dual grid.
///
/// The integration domain is the intersection of the finite masks, eroded by
/// [`MARGIN_CELLS`] grid cells around every observed infinite node (the grid
/// edge itself does not count as a transition). If either mask is finite
/// somewhere the other is infinite beyond that margin, the gap is genuinely
/// infinite on an interior region and the result is flagged divergent with
/// an infinite value. The error estimate is the change of the distance
/// between the last two truncation levels.
pub fn dp_distance(g1: &DualFunction, g2: &DualFunction, p: f64) -> Result<QuadratureResult> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Input(format!("distance order must be >= 1, got {p}")));
    }
    check_same_grid(&g1.grid, &g2.grid)?;
    let grid = &g1.grid;
    let radius = MARGIN_CELLS.ceil() as usize;
    let eroded1 = erode(grid, &g1.finite_mask, radius);
    let eroded2 = erode(grid, &g2.finite_mask, radius);
    let disagree = (0..grid.len()).any(|i| {
        (eroded1[i] && !g2.finite_mask[i]) || (eroded2[i] && !g1.finite_mask[i])
    });
    if disagree {
        return Ok(QuadratureResult {
            value: f64::INFINITY,
            error_estimate: f64::INFINITY,
            cells_used: 0,
            divergent: true,
        });
    }
    let domain: Vec<bool> = (0..grid.len()).map(|i| eroded1[i] && eroded2[i]).collect();
    if !domain.iter().any(|&d| d) {
        return Err(Error::Precondition(
            "the conjugates share no interior nodes inside the margin".into(),
        ));
    }

    let last1 = g1.values();
    let last2 = g2.values();
    let prev1 = g1.prev_values();
    let prev2 = g2.prev_values();
    let mut sum = 0.0;
    let mut sum_prev = 0.0;
    let mut cells_used = 0usize;
    for_each_cell(grid, &mut |corner_flat, cell_volume| {
        if corner_flat.iter().any(|&f| !domain[f]) {
            return;
        }
        let corners = corner_flat.len() as f64;
        let mut gap = 0.0;
        let mut gap_prev = 0.0;
        for &f in corner_flat {
            gap += (last1[f] - last2[f]).abs().powf(p);
            gap_prev += (prev1[f] - prev2[f]).abs().powf(p);
        }
        sum += gap / corners * cell_volume;
        sum_prev += gap_prev / corners * cell_volume;
        cells_used += 1;
    });
    let value = sum.powf(1.0 / p);
    let value_prev = sum_prev.powf(1.0 / p);
    Ok(QuadratureResult {
        value,
        error_estimate: (value - value_prev).abs(),
        cells_used,
        divergent: false,
    })
}

fn check_same_grid(a: &TensorGrid, b: &TensorGrid) -> Result<()> {
    let matches = a.dim() == b.dim()
        && a.axes().iter().zip(b.axes()).all(|(x, y)| {
            let tol = 1e-9 * (1.0 + x.node(0).abs().max(x.node(x.count - 1).abs()));
            x.count == y.count
                && (x.node(0) - y.node(0)).abs() <= tol
                && (x.node(x.count - 1) - y.node(y.count - 1)).abs() <= tol
        });
    if matches {
        Ok(())
    } else {
        Err(Error::Input(
            "conjugates live on different dual grids; transform both with a shared dual box and cell count".into(),
        ))
    }
}

/// Erode `mask` by a Chebyshev ball of `radius` nodes, axis by axis.
/// Neighbours beyond the grid edge are treated as finite, so the erosion
/// responds only to transitions the grid actually observed.
fn erode(grid: &TensorGrid, mask: &[bool], radius: usize) -> Vec<bool> {
    let counts: Vec<usize> = grid.axes().iter().map(|a| a.count).collect();
    let mut current = mask.to_vec();
    for d in 0..grid.dim() {
        let stride = grid.stride(d);
        let mut next = current.clone();
        for (i, slot) in next.iter_mut().enumerate() {
            if !*slot {
                continue;
            }
            let k = i / stride % counts[d];
            let lo = k.saturating_sub(radius);
            let hi = (k + radius).min(counts[d] - 1);
            for j in lo..=hi {
                if !current[i + j * stride - k * stride] {
                    *slot = false;
                    break;
                }
            }
        }
        current = next;
    }
    current
}

/// Visit every grid cell, passing the flat corner indices and the cell
/// volume in a fixed row-major order.
fn for_each_cell(grid: &TensorGrid, visit: &mut dyn FnMut(&[usize], f64)) {
    let n = grid.dim();
    let counts: Vec<usize> = grid.axes().iter().map(|a| a.count).collect();
    if counts.iter().any(|&c| c < 2) {
        return;
    }
    let cell_volume: f64 = grid.axes().iter().map(|a| a.step()).product();
    let corner_count = 1usize << n;
    let mut idx = vec![0usize; n];
    let mut corner_flat = vec![0usize; corner_count];
    loop {
        for bits in 0..corner_count {
            let mut f = 0usize;
            for d in 0..n {
                f = f * counts[d] + idx[d] + ((bits >> d) & 1);
            }
            corner_flat[bits] = f;
        }
        visit(&corner_flat, cell_volume);
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            idx[d] += 1;
            if idx[d] + 1 < counts[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

// === convergence modes of the kinked family =================================

/// Verdicts for the three convergence modes of a potential sequence:
/// in volume (`l1`), uniformly (`linf`), and in the order-one distance
/// (`e1`). Uniform convergence dominates the other two on a compact
/// polytope, and the verdicts respect that: `linf` implies `l1` and `e1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConvergenceModes {
    pub l1: bool,
    pub linf: bool,
    pub e1: bool,
}

/// Per-member proxies and limit verdicts for a kinked candidate family.
#[derive(Debug, Clone, Serialize)]
pub struct Ex310Diagnostics {
    pub eps: Vec<f64>,
    pub c: Vec<f64>,
    /// Volume of the dual region where the member's conjugate deviates from
    /// the limit's.
    pub l1_proxy: Vec<f64>,
    /// Uniform gap between the conjugates.
    pub linf_proxy: Vec<f64>,
    /// Order-one distance to the limit.
    pub e1_proxy: Vec<f64>,
    pub limits: ConvergenceModes,
}

/// Diagnose how the family `ex310(eps_j, C_j)` approaches the normal form
/// as `j` grows.
///
/// Every member is transformed on a dual grid of `[0, 1]` aligned so the
/// hinge `s = eps_j` falls on a node, which makes the cell quadrature exact
/// for these piecewise-linear conjugates; the limit potential is transformed
/// on the same grid. The three proxies are measured from the computed
/// conjugates, and each mode holds when its proxy sequence is nonincreasing
/// and decays below [`TOL_LIMIT`] times its first term.
pub fn ex310_modes(eps_seq: &[f64], c_seq: &[f64]) -> Result<Ex310Diagnostics> {
    if eps_seq.len() != c_seq.len() {
        return Err(Error::Input(format!(
            "sequence lengths differ: {} kink positions, {} slopes",
            eps_seq.len(),
            c_seq.len()
        )));
    }
    if eps_seq.len() < 2 {
        return Err(Error::Input(
            "mode detection needs at least two family members".into(),
        ));
    }
    for (&eps, &c) in eps_seq.iter().zip(c_seq) {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Input(format!("kink positions must lie in (0,1), got {eps}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Input(format!("slopes must be positive and finite, got {c}")));
        }
    }

    let mut l1_proxy = Vec::with_capacity(eps_seq.len());
    let mut linf_proxy = Vec::with_capacity(eps_seq.len());
    let mut e1_proxy = Vec::with_capacity(eps_seq.len());
    for (&eps, &c) in eps_seq.iter().zip(c_seq) {
        let member = ex310_member(eps, c)?;
        let limit = ex310_limit(&member)?;
        let g = member.dual_phi()?;
        let g_lim = limit.dual_phi()?;
        let d1 = dp_distance(g, g_lim, 1.0)?;
        if d1.divergent {
            return Err(Error::Unstable(format!(
                "member eps={eps}, C={c} does not share the limit's finiteness region"
            )));
        }
        l1_proxy.push(deviation_volume(g, g_lim));
        linf_proxy.push(uniform_gap(g, g_lim));
        e1_proxy.push(d1.value);
    }

    let mut limits = ConvergenceModes {
        l1: tends_to_zero(&l1_proxy),
        linf: tends_to_zero(&linf_proxy),
        e1: tends_to_zero(&e1_proxy),
    };
    if limits.linf {
        limits.l1 = true;
        limits.e1 = true;
    }
    Ok(Ex310Diagnostics {
        eps: eps_seq.to_vec(),
        c: c_seq.to_vec(),
        l1_proxy,
        linf_proxy,
        e1_proxy,
        limits,
    })
}

fn ex310_member(eps: f64, c: f64) -> Result<ToricPotential> {
    let mut cfg = ex310_cfg(c);
    cfg.dual_cells = aligned_cells(eps);
    cfg.dual_inflate = 0.0;
    cfg.dual_box = Some(vec![(0.0, 1.0)]);
    ToricPotential::custom(
        &format!("ex310?eps={eps}&C={c}"),
        polytope::interval(),
        fs_reference(1),
        ex310_candidate(eps, c),
        cfg,
    )
}

fn ex310_limit(member: &ToricPotential) -> Result<ToricPotential> {
    ToricPotential::custom(
        "ex310-limit",
        member.polytope().clone(),
        fs_reference(1),
        member.support_rep(),
        member.config().clone(),
    )
}

/// Smallest cell count at least [`ALIGNED_CELLS_MIN`] that puts `eps` on a
/// grid node of `[0, 1]`, falling back to the best alignment found.
fn aligned_cells(eps: f64) -> usize {
    let mut best = (ALIGNED_CELLS_MIN, f64::INFINITY);
    for n in ALIGNED_CELLS_MIN..=ALIGNED_CELLS_MAX {
        let k = eps * n as f64;
        let offset = (k - k.round()).abs() / n as f64;
        if offset < 1e-12 {
            return n;
        }
        if offset < best.1 {
            best = (n, offset);
        }
    }
    best.0
}

/// Volume of the cells where the two conjugates differ beyond float noise.
fn deviation_volume(g1: &DualFunction, g2: &DualFunction) -> f64 {
    let last1 = g1.values();
    let last2 = g2.values();
    let tol = 1e-9 * (1.0 + uniform_gap(g1, g2));
    let mut volume = 0.0;
    for_each_cell(&g1.grid, &mut |corner_flat, cell_volume| {
        let live = corner_flat.iter().all(|&f| g1.finite_mask[f] && g2.finite_mask[f]);
        if live && corner_flat.iter().any(|&f| (last1[f] - last2[f]).abs() > tol) {
            volume += cell_volume;
        }
    });
    volume
}

fn uniform_gap(g1: &DualFunction, g2: &DualFunction) -> f64 {
    let last1 = g1.values();
    let last2 = g2.values();
    (0..last1.len())
        .filter(|&i| g1.finite_mask[i] && g2.finite_mask[i])
        .map(|i| (last1[i] - last2[i]).abs())
        .fold(0.0f64, f64::max)
}

fn tends_to_zero(proxy: &[f64]) -> bool {
    let first = proxy[0];
    if first <= 1e-12 {
        return true;
    }
    let nonincreasing = proxy
        .windows(2)
        .all(|w| w[1] <= w[0] + TOL_MONOTONE * w[0].abs().max(1.0));
    nonincreasing && proxy[proxy.len() - 1] <= TOL_LIMIT * first
}

// === tests ===================================================================

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::grid::Axis;
    use crate::monge_ampere::{pushforward, pushforward_integral};
    use crate::potentials::gallery;

    fn synthetic_dual(values: Vec<f64>) -> DualFunction {
        let grid = TensorGrid::new(vec![Axis::new(0.0, 1.0, values.len()).expect("axis")])
            .expect("grid");
        let mask = vec![true; values.len()];
        DualFunction {
            grid,
            levels: vec![values.clone(), values.clone(), values],
            r_schedule: vec![8.0, 16.0, 32.0],
            finite_mask: mask,
            windows: vec![vec![(-8.0, 8.0)], vec![(-16.0, 16.0)], vec![(-32.0, 32.0)]],
        }
    }

    #[test]
    fn identical_conjugates_are_at_distance_zero() {
        let t = gallery("guillemin").expect("gallery entry exists");
        let g = t.dual_phi().expect("transform");
        for p in [1.0, 2.0] {
            let d = dp_distance(g, g, p).expect("distance");
            assert!(!d.divergent);
            assert_eq!(d.value, 0.0, "self distance of order {p}");
        }
    }

    #[test]
    fn constant_gap_is_the_gap() {
        let zero = synthetic_dual(vec![0.0; 101]);
        let shifted = synthetic_dual(vec![0.75; 101]);
        for p in [1.0, 2.0, 3.0] {
            let d = dp_distance(&zero, &shifted, p).expect("distance");
            assert!(
                (d.value - 0.75).abs() < 1e-12,
                "order {p} distance between constants, got {}",
                d.value
            );
        }
    }

    #[test]
    fn hinge_distance_matches_the_dual_area() {
        let (eps, c) = (0.1, 5.0);
        let member = ex310_member(eps, c).expect("member");
        let limit = ex310_limit(&member).expect("limit");
        let d1 = dp_distance(
            member.dual_phi().expect("transform"),
            limit.dual_phi().expect("transform"),
            1.0,
        )
        .expect("distance");
        let area = c * eps * eps / 2.0;
        assert!(
            (d1.value - area).abs() < 1e-9,
            "hinge integral {} vs half-base-times-height {area}",
            d1.value
        );
    }

    #[test]
    fn grid_mismatch_is_an_input_error() {
        let a = synthetic_dual(vec![0.0; 65]);
        let b = synthetic_dual(vec![0.0; 129]);
        let err = dp_distance(&a, &b, 1.0).unwrap_err();
        assert!(err.is_input_error(), "expected an input error, got {err}");
    }

    #[test]
    fn face_supported_conjugate_is_infinitely_far() {
        let face = gallery("phi2?n=2").expect("gallery entry exists");
        let smooth = gallery("pn_fs?n=2").expect("gallery entry exists");
        let d = dp_distance(
            face.dual_phi().expect("transform"),
            smooth.dual_phi().expect("transform"),
            1.0,
        )
        .expect("distance");
        assert!(d.divergent, "finiteness regions disagree on the interior");
        assert!(d.value.is_infinite());
    }

    #[test]
    fn degenerate_masks_are_a_precondition_error() {
        let face = gallery("phi1?n=1").expect("gallery entry exists");
        let g = face.dual_phi().expect("transform");
        let err = dp_distance(g, g, 1.0).unwrap_err();
        assert!(
            matches!(err, Error::Precondition(_)),
            "no interior nodes survive the margin, got {err}"
        );
    }

    #[test]
    fn erosion_ignores_the_grid_edge() {
        let grid = TensorGrid::new(vec![Axis::new(0.0, 1.0, 9).expect("axis")]).expect("grid");
        let mut mask = vec![true; 9];
        let eroded = erode(&grid, &mask, 2);
        assert!(eroded.iter().all(|&m| m), "an all-finite mask stays intact");
        mask[4] = false;
        let eroded = erode(&grid, &mask, 2);
        assert_eq!(
            eroded,
            vec![true, true, false, false, false, false, false, true, true],
            "two nodes on each side of the transition are dropped"
        );
    }

    #[test]
    fn primal_gap_integral_is_finite_on_smooth_pairs() {
        let t1 = gallery("pn_fs?n=1").expect("gallery entry exists");
        let t2 = gallery("guillemin").expect("gallery entry exists");
        let g1 = t1.dual_phi().expect("transform");
        let g2 = t2.dual_phi().expect("transform");
        let m = pushforward(g1, t1.polytope()).expect("measure");
        for p in [1.0, 2.0] {
            let d = dp_distance(g1, g2, p).expect("distance");
            assert!(!d.divergent, "smooth pair stays at finite distance");
            let f1 = t1.candidate().clone();
            let f2 = t2.candidate().clone();
            let gap = pushforward_integral(&m, &move |x: &[f64]| {
                (f1.eval(x) - f2.eval(x)).abs().powf(p)
            })
            .expect("integral");
            assert!(
                gap.value.is_finite(),
                "order {p} primal gap against the first member's measure"
            );
        }
    }

    #[test]
    fn mode_proxies_match_the_hinge_geometry() {
        let eps: Vec<f64> = (2..=6).map(|j| 1.0 / j as f64).collect();
        let c: Vec<f64> = (2..=6).map(|j| j as f64).collect();
        let modes = ex310_modes(&eps, &c).expect("diagnostics");
        for k in 0..eps.len() {
            assert!(
                (modes.l1_proxy[k] - eps[k]).abs() < 1e-9,
                "deviation volume at j={}, got {}",
                k + 2,
                modes.l1_proxy[k]
            );
            assert!(
                (modes.linf_proxy[k] - eps[k] * c[k]).abs() < 1e-9 * (1.0 + eps[k] * c[k]),
                "uniform gap at j={}, got {}",
                k + 2,
                modes.linf_proxy[k]
            );
            assert!(
                (modes.e1_proxy[k] - eps[k] * eps[k] * c[k] / 2.0).abs() < 1e-9,
                "order-one distance at j={}, got {}",
                k + 2,
                modes.e1_proxy[k]
            );
        }
    }

    #[test]
    fn balanced_family_converges_in_volume_and_distance_only() {
        let eps: Vec<f64> = (2..=13).map(|j| 1.0 / j as f64).collect();
        let c: Vec<f64> = (2..=13).map(|j| j as f64).collect();
        let modes = ex310_modes(&eps, &c).expect("diagnostics").limits;
        assert_eq!(modes, ConvergenceModes { l1: true, linf: false, e1: true });
    }

    #[test]
    fn steep_family_converges_in_volume_only() {
        let eps: Vec<f64> = (2..=13).map(|j| 1.0 / j as f64).collect();
        let c: Vec<f64> = (2..=13).map(|j| (j * j) as f64).collect();
        let modes = ex310_modes(&eps, &c).expect("diagnostics").limits;
        assert_eq!(modes, ConvergenceModes { l1: true, linf: false, e1: false });
    }

    #[test]
    fn shallow_family_converges_in_every_mode() {
        let eps: Vec<f64> = (2..=13).map(|j| 1.0 / (j * j) as f64).collect();
        let c: Vec<f64> = (2..=13).map(|j| j as f64).collect();
        let modes = ex310_modes(&eps, &c).expect("diagnostics").limits;
        assert_eq!(modes, ConvergenceModes { l1: true, linf: true, e1: true });
    }

    #[test]
    fn mode_detection_rejects_bad_sequences() {
        assert!(ex310_modes(&[0.5], &[1.0, 2.0]).is_err(), "length mismatch");
        assert!(ex310_modes(&[0.5], &[1.0]).is_err(), "too short");
        assert!(ex310_modes(&[0.5, 1.5], &[1.0, 1.0]).is_err(), "kink outside (0,1)");
        assert!(ex310_modes(&[0.5, 0.25], &[1.0, -1.0]).is_err(), "negative slope");
    }

    #[test]
    fn uniform_convergence_dominates() {
        let families: [(Vec<f64>, Vec<f64>); 4] = [
            ((2..=9).map(|j| 1.0 / j as f64).collect(), (2..=9).map(|j| j as f64).collect()),
            ((2..=9).map(|j| 1.0 / j as f64).collect(), (2..=9).map(|j| (j * j) as f64).collect()),
            ((2..=9).map(|j| 1.0 / (j * j) as f64).collect(), (2..=9).map(|j| j as f64).collect()),
            (vec![0.4, 0.3, 0.35, 0.2], vec![1.0, 1.5, 1.25, 2.0]),
        ];
        for (eps, c) in families {
            let m = ex310_modes(&eps, &c).expect("diagnostics").limits;
            assert!(!m.linf || (m.l1 && m.e1), "got {m:?} for eps={eps:?}, C={c:?}");
        }
    }

    #[test]
    fn closed_form_self_distance_of_the_projective_line() {
        let t = gallery("pn_fs?n=1").expect("gallery entry exists");
        let g = t.dual_phi().expect("transform");
        let zero = DualFunction {
            grid: g.grid.clone(),
            levels: g.levels.iter().map(|l| vec![0.0; l.len()]).collect(),
            r_schedule: g.r_schedule.clone(),
            finite_mask: g.finite_mask.clone(),
            windows: g.windows.clone(),
        };
        let d = dp_distance(g, &zero, 1.0).expect("distance");
        let oracle = crate::numerics::adaptive_simpson(
            &|s: f64| 0.5 * (s * s.ln() + (1.0 - s) * (1.0 - s).ln()).abs(),
            1e-9,
            1.0 - 1e-9,
            1e-10,
        );
        assert!(oracle.converged, "reference quadrature converged");
        assert!(
            (d.value - oracle.value).abs() < 2e-3,
            "entropy area {} vs quadrature {}",
            d.value,
            oracle.value
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn distance_is_a_metric(
            a in proptest::collection::vec(-1.0f64..1.0, 33),
            b in proptest::collection::vec(-1.0f64..1.0, 33),
            c in proptest::collection::vec(-1.0f64..1.0, 33),
            p in 1.0f64..3.0,
        ) {
            let ga = synthetic_dual(a);
            let gb = synthetic_dual(b);
            let gc = synthetic_dual(c);
            let dab = dp_distance(&ga, &gb, p).expect("distance").value;
            let dba = dp_distance(&gb, &ga, p).expect("distance").value;
            prop_assert_eq!(dab, dba, "symmetry is exact");
            let dac = dp_distance(&ga, &gc, p).expect("distance").value;
            let dbc = dp_distance(&gb, &gc, p).expect("distance").value;
            prop_assert!(dac <= dab + dbc + 1e-9, "triangle: {} > {} + {}", dac, dab, dbc);
        }

        #[test]
        fn distance_vanishes_only_on_equal_conjugates(
            a in proptest::collection::vec(-1.0f64..1.0, 33),
            shift in 0.01f64..1.0,
        ) {
            let ga = synthetic_dual(a.clone());
            let gb = synthetic_dual(a.iter().map(|v| v + shift).collect());
            let d = dp_distance(&ga, &gb, 2.0).expect("distance").value;
            prop_assert!((d - shift).abs() < 1e-12);
        }
    }

    #[test]
    fn support_function_conjugates_to_zero() {
        let member = ex310_member(0.25, 2.0).expect("member");
        let limit = ex310_limit(&member).expect("limit");
        let g = limit.dual_phi().expect("transform");
        assert!(g.finite_mask.iter().all(|&m| m), "finite on all of [0,1]");
        assert!(
            g.values().iter().all(|&v| v.abs() < 1e-12),
            "the normal form's conjugate vanishes identically"
        );
    }
}
