//! Subcommand implementations.

use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use clap::{Args, ValueEnum};
use serde::Serialize;

use nsbox_core::analysis::{
    self, distill_curve, distill_staircase, one_step_boundary, quantum_boundary, region_classify,
    region_width_probe_with, sampled_search, verify_protocol_identity, RegionCell, SearchOptions,
};
use nsbox_core::boxes::TOL_EXACT;
use nsbox_core::dynamics::{
    fixed_points_1d, fixed_points_2d, iterate_eps, iterate_plane, map_eps, map_plane, MapState,
    Stability, StopReason, StopRule, Trajectory, DEFAULT_MAX_STEPS,
};
use nsbox_core::io::fmt_f64;
use nsbox_core::{estimate_composed, Epsilon, NsBox, ProtocolWiring};

use crate::input::{read_box, BoxSel, State, StateSel};
use crate::{CliError, Format};

/// Writes one line to stdout, treating a closed pipe as success.
fn emit(line: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(CliError::Internal(e.to_string())),
    }
}

fn emit_box(b: &NsBox, format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => emit(&b.to_csv_line()),
        Format::Json => emit(&b.to_json()),
    }
}

fn emit_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    emit(&nsbox_core::io::to_json(value)?)
}

// ---------------------------------------------------------------- chsh

#[derive(Args)]
pub struct ChshArgs {
    #[command(flatten)]
    sel: BoxSel,
    /// Print all 8 sign/relabeling variants instead of the canonical value.
    #[arg(long)]
    all8: bool,
}

pub fn chsh(args: &ChshArgs, format: Format) -> Result<(), CliError> {
    let b = args.sel.resolve()?;
    if args.all8 {
        let values = b.chsh_all8();
        match format {
            Format::Csv => emit(
                &values
                    .iter()
                    .map(|v| format!("{v:?}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            Format::Json => emit_json(&values.to_vec()),
        }
    } else {
        emit(&format!("{:?}", b.chsh()))
    }
}

// ---------------------------------------------------------------- box

#[derive(Args)]
pub struct BoxArgs {
    #[command(flatten)]
    sel: BoxSel,
    /// Print the box's plane coordinates instead of the table.
    #[arg(long)]
    coords: bool,
}

pub fn make_box(args: &BoxArgs, format: Format) -> Result<(), CliError> {
    let b = args.sel.resolve()?;
    if args.coords {
        let c = b.to_plane_coords()?;
        return match format {
            Format::Csv => emit(&format!("{},{}", fmt_f64(c.xi), fmt_f64(c.gamma))),
            Format::Json => emit_json(&c),
        };
    }
    emit_box(&b, format)
}

// ---------------------------------------------------------------- compose

#[derive(Args)]
pub struct ComposeArgs {
    /// First box: path to JSON/CSV, or '-' for stdin.
    #[arg(long)]
    box1: String,
    /// Second box: path to JSON/CSV, or '-' for stdin.
    #[arg(long)]
    box2: String,
    /// Alice's strategy id (15-bit wiring encoding).
    #[arg(long, default_value_t = ProtocolWiring::distillation().ids().0)]
    alice_id: u16,
    /// Bob's strategy id.
    #[arg(long, default_value_t = ProtocolWiring::distillation().ids().1)]
    bob_id: u16,
    /// Cross-check the exact table against a Monte Carlo run of this many
    /// trials per input pair (deviation reported on stderr).
    #[arg(long)]
    mc_trials: Option<u32>,
}

pub fn compose(args: &ComposeArgs, format: Format, seed: u64) -> Result<(), CliError> {
    if args.box1 == "-" && args.box2 == "-" {
        return Err(CliError::Domain("only one box can come from stdin".into()));
    }
    let b1 = read_box(&args.box1)?;
    let b2 = read_box(&args.box2)?;
    let w = ProtocolWiring::from_ids(args.alice_id, args.bob_id)?;
    let out = nsbox_core::compose(&b1, &b2, &w)?;
    if let Some(trials) = args.mc_trials {
        let mc = estimate_composed(&b1, &b2, &w, trials, seed)?;
        eprintln!(
            "monte carlo deviation over {trials} trials/input: {:.3e}",
            out.max_abs_diff(&mc)
        );
    }
    emit_box(&out, format)
}

// ---------------------------------------------------------------- map

#[derive(Args)]
pub struct MapArgs {
    #[command(flatten)]
    sel: StateSel,
    /// Number of map applications.
    #[arg(long, default_value_t = 1)]
    steps: u32,
}

pub fn map(args: &MapArgs) -> Result<(), CliError> {
    match args.sel.resolve()? {
        State::Eps(mut e) => {
            for _ in 0..args.steps {
                e = map_eps(e);
            }
            emit(&format!("{:?}", e.value()))
        }
        State::Plane(mut c) => {
            for _ in 0..args.steps {
                c = map_plane(c)?;
            }
            emit(&format!("{:?},{:?}", c.xi, c.gamma))
        }
    }
}

// ---------------------------------------------------------------- trajectory

#[derive(Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    sel: StateSel,
    /// Iteration cap.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    steps: usize,
    /// Stop once the CHSH value strictly exceeds this threshold.
    #[arg(long)]
    until_chsh: Option<f64>,
    /// Stop once successive states are closer than this distance.
    #[arg(long)]
    converge: Option<f64>,
}

#[derive(Serialize)]
struct EpsRow {
    step: usize,
    eps: f64,
    chsh: f64,
}

#[derive(Serialize)]
struct PlaneRow {
    step: usize,
    xi: f64,
    gamma: f64,
    chsh: f64,
}

fn stop_rule(args: &TrajectoryArgs) -> StopRule {
    StopRule {
        max_steps: args.steps,
        chsh_above: args.until_chsh,
        converge_tol: args.converge,
    }
}

fn note_termination<S: MapState>(t: &Trajectory<S>) {
    let reason = match t.terminated_by {
        StopReason::MaxIterations => "iteration cap",
        StopReason::ThresholdCrossed => "chsh threshold",
        StopReason::Converged => "convergence",
    };
    eprintln!("terminated by {reason} after {} steps", t.steps());
}

pub fn trajectory(args: &TrajectoryArgs, format: Format) -> Result<(), CliError> {
    match args.sel.resolve()? {
        State::Eps(e) => {
            let t = iterate_eps(e, &stop_rule(args));
            note_termination(&t);
            let rows: Vec<EpsRow> = t
                .points
                .iter()
                .zip(&t.chsh)
                .enumerate()
                .map(|(step, (p, c))| EpsRow { step, eps: p.value(), chsh: *c })
                .collect();
            match format {
                Format::Csv => {
                    emit("step,eps,chsh")?;
                    for r in rows {
                        emit(&format!("{},{},{}", r.step, fmt_f64(r.eps), fmt_f64(r.chsh)))?;
                    }
                    Ok(())
                }
                Format::Json => emit_json(&rows),
            }
        }
        State::Plane(c) => {
            let t = iterate_plane(c, &stop_rule(args))?;
            note_termination(&t);
            let rows: Vec<PlaneRow> = t
                .points
                .iter()
                .zip(&t.chsh)
                .enumerate()
                .map(|(step, (p, c))| PlaneRow { step, xi: p.xi, gamma: p.gamma, chsh: *c })
                .collect();
            match format {
                Format::Csv => {
                    emit("step,xi,gamma,chsh")?;
                    for r in rows {
                        emit(&format!(
                            "{},{},{},{}",
                            r.step,
                            fmt_f64(r.xi),
                            fmt_f64(r.gamma),
                            fmt_f64(r.chsh)
                        ))?;
                    }
                    Ok(())
                }
                Format::Json => emit_json(&rows),
            }
        }
    }
}

// ---------------------------------------------------------------- fixed-points

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WhichMap {
    Eps,
    Plane,
}

#[derive(Args)]
pub struct FixedPointsArgs {
    /// Which map to analyze.
    #[arg(long, value_enum, default_value_t = WhichMap::Eps)]
    map: WhichMap,
}

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::Attractive => "attractive",
        Stability::Repulsive => "repulsive",
        Stability::Saddle => "saddle",
        Stability::Marginal => "marginal",
    }
}

#[derive(Serialize)]
struct EpsFixedPoint {
    eps: f64,
    lambda: f64,
    class: &'static str,
}

#[derive(Serialize)]
struct PlaneFixedPoint {
    xi: f64,
    gamma: f64,
    lambda1: f64,
    lambda2: f64,
    class: &'static str,
}

pub fn fixed_points(args: &FixedPointsArgs, format: Format) -> Result<(), CliError> {
    match args.map {
        WhichMap::Eps => {
            let rows: Vec<EpsFixedPoint> = fixed_points_1d()
                .into_iter()
                .map(|fp| EpsFixedPoint {
                    eps: fp.location.value(),
                    lambda: fp.eigenvalues[0],
                    class: stability_name(fp.classification),
                })
                .collect();
            match format {
                Format::Csv => {
                    emit("eps,lambda,class")?;
                    for r in rows {
                        emit(&format!("{},{},{}", fmt_f64(r.eps), fmt_f64(r.lambda), r.class))?;
                    }
                    Ok(())
                }
                Format::Json => emit_json(&rows),
            }
        }
        WhichMap::Plane => {
            let rows: Vec<PlaneFixedPoint> = fixed_points_2d()
                .into_iter()
                .map(|fp| PlaneFixedPoint {
                    xi: fp.location.xi,
                    gamma: fp.location.gamma,
                    lambda1: fp.eigenvalues[0],
                    lambda2: fp.eigenvalues[1],
                    class: stability_name(fp.classification),
                })
                .collect();
            match format {
                Format::Csv => {
                    emit("xi,gamma,lambda1,lambda2,class")?;
                    for r in rows {
                        emit(&format!(
                            "{},{},{},{},{}",
                            fmt_f64(r.xi),
                            fmt_f64(r.gamma),
                            fmt_f64(r.lambda1),
                            fmt_f64(r.lambda2),
                            r.class
                        ))?;
                    }
                    Ok(())
                }
                Format::Json => emit_json(&rows),
            }
        }
    }
}

// ---------------------------------------------------------------- depolarize

#[derive(Args)]
pub struct DepolarizeArgs {
    #[command(flatten)]
    sel: BoxSel,
}

pub fn depolarize(args: &DepolarizeArgs, format: Format) -> Result<(), CliError> {
    let b = args.sel.resolve()?;
    emit_box(&b.depolarize()?, format)
}

// ---------------------------------------------------------------- verify

#[derive(Args)]
pub struct VerifyArgs {
    /// Number of eps grid points.
    #[arg(long, default_value_t = 101)]
    grid_n: usize,
}

pub fn verify(args: &VerifyArgs, format: Format) -> Result<(), CliError> {
    if args.grid_n < 2 {
        return Err(CliError::Domain("--grid-n must be at least 2".into()));
    }
    let report = verify_protocol_identity(args.grid_n)?;
    match format {
        Format::Csv => {
            emit("grid_n,max_deviation,worst_eps")?;
            emit(&format!(
                "{},{},{}",
                report.grid_n,
                fmt_f64(report.max_deviation),
                fmt_f64(report.worst_eps)
            ))?;
        }
        Format::Json => emit_json(&report)?,
    }
    if report.passes(TOL_EXACT) {
        Ok(())
    } else {
        Err(CliError::Internal(format!(
            "identity violated at eps = {} with deviation {:.3e}",
            report.worst_eps, report.max_deviation
        )))
    }
}

// ---------------------------------------------------------------- search

#[derive(Args)]
pub struct SearchArgs {
    #[command(flatten)]
    sel: BoxSel,
    /// Also evaluate pairs where the parties query the boxes in opposite
    /// orders (the full 32768 x 32768 space).
    #[arg(long)]
    include_crossed: bool,
    /// Worker threads (default: NSBOX_THREADS or the rayon default).
    #[arg(long)]
    threads: Option<usize>,
    /// Evaluate only this many random pairs by direct composition.
    #[arg(long)]
    sample: Option<u64>,
    /// Cap on reported maximizer pairs.
    #[arg(long, default_value_t = 4096)]
    max_pairs: usize,
    /// Resume file for the exhaustive sweep.
    #[arg(long)]
    checkpoint: Option<std::path::PathBuf>,
}

pub fn search(args: &SearchArgs, seed: u64) -> Result<(), CliError> {
    let b = args.sel.resolve()?;
    let result = if let Some(n) = args.sample {
        sampled_search(&b, n, seed, args.include_crossed)?
    } else {
        let mut opts = SearchOptions::new(args.include_crossed);
        opts.threads = args.threads.or_else(|| {
            std::env::var("NSBOX_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        });
        opts.max_pairs = args.max_pairs;
        opts.checkpoint = args.checkpoint.clone();
        let last_percent = AtomicU64::new(0);
        let progress = |done: u64, total: u64| {
            let percent = done * 100 / total;
            if percent > last_percent.swap(percent, Ordering::Relaxed) {
                eprintln!("search progress: {percent}% ({done} / {total} pairs)");
            }
        };
        analysis::optimal_two_copy_search_with(&b, &opts, Some(&progress))?
    };
    eprintln!(
        "{} maximizer pairs within 1e-9 ({} reported)",
        result.tie_count,
        result.best_pairs.len()
    );
    emit(&result.to_json())
}

// ---------------------------------------------------------------- region

#[derive(Args)]
pub struct RegionArgs {
    /// Grid points per axis.
    #[arg(long, default_value_t = analysis::DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Iteration cap per cell.
    #[arg(long, default_value_t = analysis::DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Instead of the grid, print the collapsing width of the constant-CHSH
    /// line at this level.
    #[arg(long)]
    width_at: Option<f64>,
    /// Samples along the line for --width-at.
    #[arg(long, default_value_t = analysis::DEFAULT_WIDTH_SAMPLES)]
    samples: usize,
}

fn emit_region_rows(cells: &[RegionCell], format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            emit("xi,gamma,chsh0,class,one_step,n_to_collapse")?;
            for cell in cells {
                let n = cell
                    .n_to_collapse
                    .map(|n| n.to_string())
                    .unwrap_or_default();
                emit(&format!(
                    "{},{},{},{},{},{}",
                    fmt_f64(cell.coords.xi),
                    fmt_f64(cell.coords.gamma),
                    fmt_f64(cell.chsh0),
                    cell.class,
                    cell.one_step_distilled,
                    n
                ))?;
            }
            Ok(())
        }
        Format::Json => emit_json(&cells.to_vec()),
    }
}

pub fn region(args: &RegionArgs, format: Format) -> Result<(), CliError> {
    if let Some(level) = args.width_at {
        let w = region_width_probe_with(level, args.samples, args.max_iter)?;
        return emit(&format!("{w:?}"));
    }
    if args.resolution < 2 {
        return Err(CliError::Domain("--resolution must be at least 2".into()));
    }
    let cells = region_classify(args.resolution, args.max_iter);
    emit_region_rows(&cells, format)
}

// ---------------------------------------------------------------- fig3

#[derive(Args)]
pub struct Fig3Args {
    /// Number of eps grid points for the curve.
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Emit the iteration staircase instead of the curve.
    #[arg(long)]
    staircase: bool,
    /// Initial CHSH value for the staircase.
    #[arg(long, default_value_t = 2.2)]
    start_chsh: f64,
    /// Staircase iteration cap.
    #[arg(long, default_value_t = 60)]
    max_steps: usize,
}

pub fn fig3(args: &Fig3Args, format: Format) -> Result<(), CliError> {
    if args.staircase {
        if !(2.0..=4.0).contains(&args.start_chsh) {
            return Err(CliError::Domain(format!(
                "--start-chsh {} outside [2, 4]",
                args.start_chsh
            )));
        }
        let start = Epsilon::new(args.start_chsh / 2.0 - 1.0)?;
        let rows = distill_staircase(start, args.max_steps);
        return match format {
            Format::Csv => {
                emit("step,eps,chsh")?;
                for r in rows {
                    emit(&format!("{},{},{}", r.step, fmt_f64(r.eps), fmt_f64(r.chsh)))?;
                }
                Ok(())
            }
            Format::Json => emit_json(&rows),
        };
    }
    if args.points < 2 {
        return Err(CliError::Domain("--points must be at least 2".into()));
    }
    let rows = distill_curve(args.points)?;
    match format {
        Format::Csv => {
            emit("eps,chsh_i,chsh_f")?;
            for r in rows {
                emit(&format!(
                    "{},{},{}",
                    fmt_f64(r.eps),
                    fmt_f64(r.chsh_i),
                    fmt_f64(r.chsh_f)
                ))?;
            }
            Ok(())
        }
        Format::Json => emit_json(&rows),
    }
}

// ---------------------------------------------------------------- fig4

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Curve {
    /// Boundary of the quantum-compatible region.
    Quantum,
    /// Boundary of the set distilled by one iteration.
    OneStep,
}

#[derive(Args)]
pub struct Fig4Args {
    /// Grid points per axis for the region table.
    #[arg(long, default_value_t = analysis::DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Iteration cap per cell.
    #[arg(long, default_value_t = analysis::DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Emit a boundary curve instead of the region table.
    #[arg(long, value_enum)]
    curve: Option<Curve>,
    /// Sample count along xi for curves.
    #[arg(long, default_value_t = 512)]
    samples: usize,
}

pub fn fig4(args: &Fig4Args, format: Format) -> Result<(), CliError> {
    if let Some(curve) = args.curve {
        if args.samples < 2 {
            return Err(CliError::Domain("--samples must be at least 2".into()));
        }
        let pts = match curve {
            Curve::Quantum => quantum_boundary(args.samples),
            Curve::OneStep => one_step_boundary(args.samples),
        };
        return match format {
            Format::Csv => {
                emit("xi,gamma")?;
                for p in pts {
                    emit(&format!("{},{}", fmt_f64(p.xi), fmt_f64(p.gamma)))?;
                }
                Ok(())
            }
            Format::Json => emit_json(&pts),
        };
    }
    if args.resolution < 2 {
        return Err(CliError::Domain("--resolution must be at least 2".into()));
    }
    let cells = region_classify(args.resolution, args.max_iter);
    emit_region_rows(&cells, format)
}
