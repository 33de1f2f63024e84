use torpot::monge_ampere::{moment_of, pushforward};
use torpot::potentials::gallery;
use torpot::transform::PrimalResolution;

fn main() {
    let r_top = 12f64.exp();
    let mut windows = Vec::new();
    let mut r = 3f64.exp();
    while r < r_top {
        windows.push(r);
        r *= 2.0;
    }
    windows.push(r_top);
    let mut prev = f64::NEG_INFINITY;
    for &rk in &windows {
        let base = gallery("ex311iii").unwrap();
        let mut cfg = base.config().clone();
        cfg.r_schedule = vec![rk / 2.0, rk];
        let h = (rk / 100_000.0).max(0.02);
        cfg.resolution = PrimalResolution::Spacing(h);
        cfg.dual_cells = ((2048.0 * (rk / 650.0).sqrt()).ceil() as usize).clamp(2048, 32768);
        let t = base.with_config(cfg.clone());
        let m = pushforward(t.dual_phi().unwrap(), t.polytope()).unwrap();
        let q = moment_of(&m, 0.5).unwrap();
        let growth = if prev > 0.0 { (q.value / prev - 1.0) * 100.0 } else { 0.0 };
        println!(
            "R={rk:>12.1} cells={} M={:.6} step={growth:+.2}% mass={:.6}",
            cfg.dual_cells, q.value, m.mass
        );
        prev = q.value;
    }
}
