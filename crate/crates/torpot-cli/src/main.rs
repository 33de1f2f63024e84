//! Command-line surface for the torpot toolkit.
//!
//! Potentials are named by source specs:
//!
//! ```text
//!     gallery:NAME?key=value&...   a built-in entry (see `torpot gallery`)
//!     grid:PATH                    sampled convex candidate F (primal side)
//!     dual:PATH                    sampled conjugate G (dual side)
//! ```
//!
//! Grid files are the plain text format written by `transform`: an `n=DIM`
//! header, one `axis k: min,max,count` line per axis, then one value per
//! node in row-major order (`inf` marks nodes outside the finite mask).
//!
//! Exit codes: 0 for any completed analysis, including negative or
//! divergent verdicts; 2 for malformed requests; 3 for violated
//! mathematical preconditions (non-convex samples, degenerate domains).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use torpot::classify::classify;
use torpot::convexfn::ConvexFunctionRep;
use torpot::error::{Error, Result};
use torpot::grid::{read_grid_file, write_grid_file, Axis, TensorGrid};
use torpot::metric::dp_distance;
use torpot::monge_ampere::{moment_of, pushforward, PushforwardMeasure};
use torpot::numerics::{gradient_mass_1d, gradient_mass_2d};
use torpot::polytope::{self, DelzantPolytope};
use torpot::potentials::{gallery_names, gallery_with_polytope, guillemin_potential, ToricPotential};
use torpot::transform::{biconjugate, DualFunction, TransformConfig};

// === argument surface ========================================================

#[derive(Parser)]
#[command(
    name = "torpot",
    about = "Numerical toolkit for toric potentials: conjugates, masses, energies, distances",
    version
)]
struct Cli {
    /// Dual grid cells per axis (min 16); overrides the source's default
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Comma-separated increasing truncation radii, e.g. 8,16,32
    #[arg(long, global = true)]
    radii: Option<String>,

    /// Saturation tolerance for the finite mask
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Worker threads (falls back to TORPOT_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the command's artifact here instead of the default
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Output format where a choice exists: json or csv
    #[arg(long, global = true)]
    format: Option<String>,

    /// Moment polytope: interval, simplex1..simplex3, hirzebruch:a,b,
    /// or a JSON file path (required for grid: and dual: sources)
    #[arg(long, global = true)]
    polytope: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conjugate a potential and write the dual samples as a grid file
    Transform {
        /// Source spec (gallery:NAME, grid:PATH, or dual:PATH)
        spec: String,
    },
    /// Full classification report: psh certificate, energy classes, Lelong
    /// numbers, regularity chain
    Classify {
        /// Source spec with a primal side (gallery:NAME or grid:PATH)
        spec: String,
    },
    /// Total Monge-Ampere mass against the expected n! vol(P)
    Mass {
        spec: String,
        /// Also report an independent gradient-image estimate (1-D/2-D)
        #[arg(long)]
        oracle: bool,
    },
    /// Moments of the Monge-Ampere measure with weights |x|^q
    Moments {
        spec: String,
        /// Comma-separated exponents
        #[arg(long, default_value = "0.1,0.25,0.4")]
        q: String,
    },
    /// L^p distance between two conjugates on a shared dual grid
    Distance {
        /// First source spec
        a: String,
        /// Second source spec, or vs-zero for the polytope's normal form
        #[arg(default_value = "vs-zero")]
        b: String,
        /// Distance order (>= 1)
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Per-cell table of the conjugate: position, value, gradient norm,
    /// boundary distance
    Plotdata { spec: String },
    /// List the built-in gallery entries
    Gallery,
    /// Check a polytope description against the Delzant conditions
    Validate {
        /// Preset name or JSON file path
        polytope: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var("TORPOT_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| {
                Error::Input(format!("TORPOT_THREADS must be a thread count, got `{v}`"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = requested {
        if n == 0 {
            return Err(Error::Input("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Transform { spec } => cmd_transform(cli, spec),
        Command::Classify { spec } => cmd_classify(cli, spec),
        Command::Mass { spec, oracle } => cmd_mass(cli, spec, *oracle),
        Command::Moments { spec, q } => cmd_moments(cli, spec, q),
        Command::Distance { a, b, p } => cmd_distance(cli, a, b, *p),
        Command::Plotdata { spec } => cmd_plotdata(cli, spec),
        Command::Gallery => cmd_gallery(cli),
        Command::Validate { polytope } => cmd_validate(cli, polytope),
    }
}

// === source resolution =======================================================

enum Source {
    Gallery(String),
    Grid(PathBuf),
    Dual(PathBuf),
}

fn parse_source(spec: &str) -> Result<Source> {
    if let Some(name) = spec.strip_prefix("gallery:") {
        Ok(Source::Gallery(name.to_string()))
    } else if let Some(path) = spec.strip_prefix("grid:") {
        Ok(Source::Grid(PathBuf::from(path)))
    } else if let Some(path) = spec.strip_prefix("dual:") {
        Ok(Source::Dual(PathBuf::from(path)))
    } else {
        Err(Error::Input(format!(
            "source spec must start with gallery:, grid:, or dual:, got `{spec}`"
        )))
    }
}

/// A resolved source: either a potential bundle that can still be
/// conjugated, or bare dual samples read from a file.
enum Resolved {
    Potential(Box<ToricPotential>),
    Dual {
        label: String,
        dual: Box<DualFunction>,
        polytope: DelzantPolytope,
    },
}

impl Resolved {
    fn label(&self) -> &str {
        match self {
            Resolved::Potential(t) => t.label(),
            Resolved::Dual { label, .. } => label,
        }
    }

    fn polytope(&self) -> &DelzantPolytope {
        match self {
            Resolved::Potential(t) => t.polytope(),
            Resolved::Dual { polytope, .. } => polytope,
        }
    }

    fn dual(&self) -> Result<&DualFunction> {
        match self {
            Resolved::Potential(t) => t.dual_phi(),
            Resolved::Dual { dual, .. } => Ok(dual),
        }
    }

    fn potential(&self) -> Option<&ToricPotential> {
        match self {
            Resolved::Potential(t) => Some(t),
            Resolved::Dual { .. } => None,
        }
    }
}

fn resolve(cli: &Cli, spec: &str) -> Result<Resolved> {
    match parse_source(spec)? {
        Source::Gallery(name) => {
            let p = cli.polytope.as_deref().map(parse_polytope).transpose()?;
            let base = name.split('?').next().unwrap_or("");
            let mut t = if base == "guillemin" {
                gallery_with_polytope(&name, p)?
            } else {
                let t = gallery_with_polytope(&name, None)?;
                if let Some(p) = &p {
                    check_polytope_agrees(p, t.polytope(), &name)?;
                }
                t
            };
            if has_overrides(cli) {
                let cfg = apply_overrides(cli, t.config().clone())?;
                t = t.with_config(cfg);
            }
            Ok(Resolved::Potential(Box::new(t)))
        }
        Source::Grid(path) => {
            let p = required_polytope(cli, "grid")?;
            let (grid, values) = read_grid_file(&path, true)?;
            let candidate = ConvexFunctionRep::gridded(grid, values)?;
            let reference = guillemin_potential(&p)?.primal;
            let cfg = apply_overrides(cli, file_cfg(p.dim()))?;
            let t = ToricPotential::custom(
                &format!("grid:{}", path.display()),
                p,
                reference,
                candidate,
                cfg,
            )?;
            Ok(Resolved::Potential(Box::new(t)))
        }
        Source::Dual(path) => {
            let p = required_polytope(cli, "dual")?;
            let (grid, values) = read_grid_file(&path, true)?;
            if grid.dim() != p.dim() {
                return Err(Error::Dimension(format!(
                    "dual file has {} axes, polytope has {}",
                    grid.dim(),
                    p.dim()
                )));
            }
            Ok(Resolved::Dual {
                label: format!("dual:{}", path.display()),
                dual: Box::new(dual_from_samples(grid, values)),
                polytope: p,
            })
        }
    }
}

/// Wrap file samples as an untruncated conjugate: one level duplicated, so
/// refinement-based error estimates read zero and divergence verdicts rest
/// on the margin rule alone.
fn dual_from_samples(grid: TensorGrid, values: Vec<f64>) -> DualFunction {
    let finite_mask: Vec<bool> = values.iter().map(|v| v.is_finite()).collect();
    let window: Vec<(f64, f64)> = grid.axes().iter().map(|a| (a.min, a.max)).collect();
    DualFunction {
        grid,
        levels: vec![values.clone(), values],
        r_schedule: vec![f64::INFINITY, f64::INFINITY],
        finite_mask,
        windows: vec![window.clone(), window],
    }
}

/// Gallery entries other than guillemin already carry their polytope, so an
/// explicit --polytope is only a cross-check: it must describe the same body.
fn check_polytope_agrees(
    given: &DelzantPolytope,
    built_in: &DelzantPolytope,
    name: &str,
) -> Result<()> {
    if given.dim() != built_in.dim() {
        return Err(Error::Dimension(format!(
            "--polytope is {}-dimensional but gallery entry {name} lives in dimension {}",
            given.dim(),
            built_in.dim()
        )));
    }
    let boxes_match = given
        .bounding_box()
        .iter()
        .zip(built_in.bounding_box().iter())
        .all(|(a, b)| {
            (a.0 - b.0).abs() <= 1e-9 * (1.0 + b.0.abs())
                && (a.1 - b.1).abs() <= 1e-9 * (1.0 + b.1.abs())
        });
    let volumes_match = match (given.volume(), built_in.volume()) {
        (Ok(va), Ok(vb)) => (va - vb).abs() <= 1e-9 * (1.0 + vb.abs()),
        _ => false,
    };
    if !(boxes_match && volumes_match) {
        return Err(Error::Input(format!(
            "--polytope disagrees with the polytope built into gallery entry {name}"
        )));
    }
    Ok(())
}

fn required_polytope(cli: &Cli, kind: &str) -> Result<DelzantPolytope> {
    match &cli.polytope {
        Some(s) => parse_polytope(s),
        None => Err(Error::Input(format!(
            "{kind}: sources need --polytope (preset name or JSON file)"
        ))),
    }
}

fn parse_polytope(spec: &str) -> Result<DelzantPolytope> {
    match spec {
        "interval" => Ok(polytope::interval()),
        "simplex1" => Ok(polytope::simplex(1)),
        "simplex2" => Ok(polytope::simplex(2)),
        "simplex3" => Ok(polytope::simplex(3)),
        _ => {
            if let Some(params) = spec.strip_prefix("hirzebruch:") {
                let parts: Vec<&str> = params.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::Input(format!(
                        "hirzebruch preset takes two weights, got `{params}`"
                    )));
                }
                let a = parse_f64(parts[0], "hirzebruch weight")?;
                let b = parse_f64(parts[1], "hirzebruch weight")?;
                return polytope::hirzebruch(a, b);
            }
            let text = std::fs::read_to_string(Path::new(spec))?;
            DelzantPolytope::from_json(&text)
        }
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Input(format!("{what} must be a number, got `{s}`")))
}

fn has_overrides(cli: &Cli) -> bool {
    cli.grid.is_some() || cli.radii.is_some() || cli.tol.is_some()
}

fn apply_overrides(cli: &Cli, mut cfg: TransformConfig) -> Result<TransformConfig> {
    if let Some(cells) = cli.grid {
        if cells < 16 {
            return Err(Error::Input(format!(
                "--grid must be at least 16 cells per axis, got {cells}"
            )));
        }
        cfg.dual_cells = cells;
    }
    if let Some(radii) = &cli.radii {
        let schedule: Result<Vec<f64>> = radii
            .split(',')
            .map(|s| parse_f64(s, "truncation radius"))
            .collect();
        let schedule = schedule?;
        if schedule.len() < 2 {
            return Err(Error::Input(
                "--radii needs at least two levels for saturation checks".into(),
            ));
        }
        if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] <= 0.0 {
            return Err(Error::Input(format!(
                "--radii must be positive and increasing, got {radii}"
            )));
        }
        cfg.r_schedule = schedule;
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Input(format!("--tol must be positive, got {tol}")));
        }
        cfg.tol_saturation = tol;
    }
    Ok(cfg)
}

/// Defaults for file-based candidates, which carry no gallery config.
fn file_cfg(dim: usize) -> TransformConfig {
    TransformConfig {
        dual_cells: if dim == 1 { 512 } else { 256 },
        ..TransformConfig::default()
    }
}

// === output plumbing =========================================================

enum Format {
    Json,
    Csv,
}

fn output_format(cli: &Cli, default: Format) -> Result<Format> {
    match cli.format.as_deref() {
        None => Ok(default),
        Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some(other) => Err(Error::Input(format!(
            "--format must be json or csv, got `{other}`"
        ))),
    }
}

/// Send the command's artifact to --output or stdout.
fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(cli: &Cli, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("serialization: {e}")))?;
    emit(cli, &format!("{text}\n"))
}

fn grid_summary(grid: &TensorGrid) -> serde_json::Value {
    json!({
        "axes": grid.axes().iter().map(|a| json!({
            "min": a.min,
            "max": a.max,
            "count": a.count,
        })).collect::<Vec<_>>(),
    })
}

// === commands ================================================================

fn cmd_transform(cli: &Cli, spec: &str) -> Result<()> {
    let source = resolve(cli, spec)?;
    let (grid, values, r_schedule, suffix) = match &source {
        Resolved::Potential(t) => {
            let dual = t.dual_phi()?;
            (
                dual.grid.clone(),
                dual.masked_values(),
                dual.r_schedule.clone(),
                "dual",
            )
        }
        // A dual source goes the other way: conjugate the samples back onto
        // a primal window.
        Resolved::Dual { dual, .. } => {
            if dual.finite_count() == 0 {
                return Err(Error::Precondition(
                    "dual samples have no finite nodes; nothing to conjugate".into(),
                ));
            }
            let cfg = apply_overrides(cli, file_cfg(dual.grid.dim()))?;
            let r = cfg.r_schedule.last().copied().unwrap_or(32.0);
            let axes: Result<Vec<Axis>> = (0..dual.grid.dim())
                .map(|_| Axis::new(-r, r, cfg.dual_cells + 1))
                .collect();
            let out_grid = TensorGrid::new(axes?)?;
            let values = biconjugate(dual, &out_grid);
            (out_grid, values, cfg.r_schedule, "primal")
        }
    };
    let out_path = cli.output.clone().unwrap_or_else(|| {
        PathBuf::from(format!("{}.{suffix}.txt", sanitize(source.label())))
    });
    write_grid_file(&out_path, &grid, &values, true)?;

    let finite = values.iter().filter(|v| v.is_finite()).count();
    let min = values
        .iter()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let sup = values
        .iter()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let summary = json!({
        "label": source.label(),
        "output": out_path.display().to_string(),
        "side": suffix,
        "grid": grid_summary(&grid),
        "r_schedule": r_schedule,
        "sup": if sup.is_finite() { Some(sup) } else { None },
        "min": if min.is_finite() { Some(min) } else { None },
        "finite_nodes": finite,
        "mask_fraction": finite as f64 / grid.len() as f64,
    });
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Input(format!("serialization: {e}")))?;
    println!("{text}");
    Ok(())
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

fn cmd_classify(cli: &Cli, spec: &str) -> Result<()> {
    let source = resolve(cli, spec)?;
    let t = source.potential().ok_or_else(|| {
        Error::Input(
            "classify needs a primal candidate (gallery: or grid:); conjugate a dual file back with `transform dual:...` first".into(),
        )
    })?;
    let report = classify(t)?;
    let value = serde_json::to_value(&report)
        .map_err(|e| Error::Input(format!("serialization: {e}")))?;
    emit_json(cli, &value)
}

fn cmd_mass(cli: &Cli, spec: &str, oracle: bool) -> Result<()> {
    let source = resolve(cli, spec)?;
    let m = pushforward(source.dual()?, source.polytope())?;
    let mut out = json!({
        "label": source.label(),
        "mass": m.mass,
        "expected_mass": m.expected_mass,
        "full_mass": m.is_full_mass(),
        "cells": m.cells.len(),
    });
    if oracle {
        let t = source.potential().ok_or_else(|| {
            Error::Input("--oracle estimates need a primal candidate (gallery: or grid:)".into())
        })?;
        out["oracle_mass"] = json!(oracle_mass(t)?);
    }
    emit_json(cli, &out)
}

/// Independent mass estimate from the gradient image of the primal samples,
/// never touching the pushforward path.
fn oracle_mass(t: &ToricPotential) -> Result<f64> {
    let f = t.candidate();
    let r = t.config().r_schedule.last().copied().unwrap_or(32.0);
    let window: Vec<(f64, f64)> = f
        .window()
        .iter()
        .map(|&(lo, hi)| (lo.max(-r), hi.min(r)))
        .collect();
    match f.dim() {
        1 => gradient_mass_1d(f, window[0].0, window[0].1),
        2 => {
            let lo = [window[0].0, window[1].0];
            let hi = [window[0].1, window[1].1];
            Ok(2.0 * gradient_mass_2d(f, &lo, &hi)?)
        }
        n => Err(Error::Input(format!(
            "--oracle supports 1-D and 2-D potentials, got {n}-D"
        ))),
    }
}

fn cmd_moments(cli: &Cli, spec: &str, q_list: &str) -> Result<()> {
    let source = resolve(cli, spec)?;
    let exponents: Result<Vec<f64>> = q_list
        .split(',')
        .map(|s| parse_f64(s, "moment exponent"))
        .collect();
    let exponents = exponents?;
    if exponents.is_empty() {
        return Err(Error::Input("--q needs at least one exponent".into()));
    }
    let m = pushforward(source.dual()?, source.polytope())?;
    let mut rows = Vec::with_capacity(exponents.len());
    for &q in &exponents {
        let r = moment_of(&m, q)?;
        rows.push(json!({
            "q": q,
            "value": r.value,
            "error_estimate": r.error_estimate,
            "divergent": r.divergent,
        }));
    }
    match output_format(cli, Format::Json)? {
        Format::Json => emit_json(cli, &json!({ "label": source.label(), "moments": rows })),
        Format::Csv => {
            let mut text = String::from("q,value,error_estimate,divergent\n");
            for row in &rows {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    row["q"], row["value"], row["error_estimate"], row["divergent"]
                ));
            }
            emit(cli, &text)
        }
    }
}

fn cmd_distance(cli: &Cli, a: &str, b: &str, p: f64) -> Result<()> {
    let first = resolve(cli, a)?;
    let ga = first.dual()?;
    let result = if b == "vs-zero" {
        let zero = zero_dual_like(ga, first.polytope());
        dp_distance(ga, &zero, p)?
    } else {
        let second = resolve(cli, b)?;
        dp_distance(ga, second.dual()?, p)?
    };
    emit_json(
        cli,
        &json!({
            "a": first.label(),
            "b": b,
            "p": p,
            "value": result.value,
            "error_estimate": result.error_estimate,
            "divergent": result.divergent,
            "cells_used": result.cells_used,
        }),
    )
}

/// The polytope's normal form seen from `g`'s grid: conjugate zero on the
/// closed polytope, infinite outside.
fn zero_dual_like(g: &DualFunction, p: &DelzantPolytope) -> DualFunction {
    let finite_mask: Vec<bool> = (0..g.grid.len())
        .map(|f| p.contains(&g.grid.point_flat(f), 1e-9))
        .collect();
    DualFunction {
        grid: g.grid.clone(),
        levels: g.levels.iter().map(|l| vec![0.0; l.len()]).collect(),
        r_schedule: g.r_schedule.clone(),
        finite_mask,
        windows: g.windows.clone(),
    }
}

fn cmd_plotdata(cli: &Cli, spec: &str) -> Result<()> {
    let source = resolve(cli, spec)?;
    let m = pushforward(source.dual()?, source.polytope())?;
    match output_format(cli, Format::Csv)? {
        Format::Csv => emit(cli, &plot_csv(&m)),
        Format::Json => {
            let rows: Vec<serde_json::Value> = m
                .cells
                .iter()
                .map(|c| {
                    json!({
                        "s": c.center,
                        "g": c.mean_value,
                        "grad_norm": norm(&c.gradient),
                        "boundary_distance": c.boundary_distance,
                    })
                })
                .collect();
            emit_json(cli, &json!({ "label": source.label(), "cells": rows }))
        }
    }
}

fn plot_csv(m: &PushforwardMeasure) -> String {
    let dim = m.grid.dim();
    let mut text = String::new();
    for d in 0..dim {
        text.push_str(&format!("s{},", d + 1));
    }
    text.push_str("g,grad_norm,boundary_distance\n");
    for c in &m.cells {
        for v in &c.center {
            text.push_str(&format!("{v},"));
        }
        text.push_str(&format!(
            "{},{},{}\n",
            c.mean_value,
            norm(&c.gradient),
            c.boundary_distance
        ));
    }
    text
}

fn norm(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn cmd_gallery(cli: &Cli) -> Result<()> {
    match output_format(cli, Format::Json)? {
        Format::Json => {
            let rows: Vec<serde_json::Value> = gallery_names()
                .into_iter()
                .map(|(spec, desc)| json!({ "spec": spec, "description": desc }))
                .collect();
            emit_json(cli, &json!(rows))
        }
        Format::Csv => {
            let mut text = String::from("spec,description\n");
            for (spec, desc) in gallery_names() {
                text.push_str(&format!("{spec},\"{desc}\"\n"));
            }
            emit(cli, &text)
        }
    }
}

fn cmd_validate(cli: &Cli, spec: &str) -> Result<()> {
    let polytope = match parse_polytope(spec) {
        Ok(p) => p,
        Err(e) if e.is_input_error() => return Err(e),
        Err(e) => {
            // Construction itself rejected the data: that is a verdict.
            return emit_json(
                cli,
                &json!({
                    "is_delzant": false,
                    "issues": [e.to_string()],
                }),
            );
        }
    };
    let report = polytope.validate_delzant();
    let mut out = json!({
        "is_delzant": report.is_delzant,
        "dim": report.dim,
        "facet_count": report.facet_count,
        "vertex_count": report.vertex_count,
        "issues": report.issues,
    });
    if report.is_delzant {
        out["volume"] = json!(polytope.volume()?);
    }
    emit_json(cli, &out)
}
