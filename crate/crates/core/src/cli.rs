//! The `magbeam` command line.
//!
//! Exit codes: 0 success, 2 bad input (config, CSV, flags), 3 numerical
//! failure (divergence, no feasible calibration cell, degenerate fit).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::warn;
use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

use crate::beam::BeamFormulation;
use crate::calibration::{
    evaluate_metrics, grid_search_calibrate, predict_records, CalibrationGrid, NotchTransform, DEFAULT_GRID_POINTS,
};
use crate::config::{paper_demonstrator, ConfigError, RobotConfigFile};
use crate::equilibrium::{solve_tip_pose, sweep, sweep_pairs, AnglePairing, MagneticRobot, SolverSettings, SweepOptions};
use crate::io;
use crate::report::{
    CalibrationReport, Inputs, MetricsReport, RecordComparison, RunReport, SimulateResults, Software, SweepResults,
    ValidationReport, WorkspaceReport,
};
use crate::svg;
use crate::workspace::{fit_ellipse, merge_biplanar, project_yz, workspace_stats, CameraPlane};

/// Environment variable capping worker threads; 0 or unset means automatic.
pub const THREADS_ENV: &str = "MAGBEAM_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "magbeam", version, about = "Magnetic continuum robot simulation and calibration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one equilibrium and print the tip pose.
    Simulate(SimulateArgs),
    /// Solve over a grid or schedule of magnet angles and write CSV.
    Sweep(SweepArgs),
    /// Grid-search (K_E, K_B) against measured tip positions.
    Calibrate(CalibrateArgs),
    /// Compare model predictions with measurements at fixed (K_E, K_B).
    Validate(ValidateArgs),
    /// Fit an ellipse to a tip workspace from a schedule or camera tracks.
    Workspace(WorkspaceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Robot config JSON. The bundled benchtop demonstrator when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Beam formulation, overriding the config's `beam_mode`.
    #[arg(long)]
    pub mode: Option<BeamFormulation>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Stiffness scale K_E, overriding the config.
    #[arg(long)]
    pub ke: Option<f64>,
    /// Field calibration factor K_B.
    #[arg(long, default_value_t = 1.0)]
    pub kb: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta2: f64,
    /// Write a JSON run report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Stiffness scale K_E, overriding the config.
    #[arg(long)]
    pub ke: Option<f64>,
    /// Field calibration factor K_B.
    #[arg(long, default_value_t = 1.0)]
    pub kb: f64,
    /// θ₁ in degrees: `start:step:stop` or a single value.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "schedule")]
    pub theta1: Option<String>,
    /// θ₂ in degrees: `start:step:stop` or a single value.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub theta2: String,
    /// CSV of `theta1_deg,theta2_deg` pairs visited in order.
    #[arg(long, conflicts_with = "theta1")]
    pub schedule: Option<PathBuf>,
    /// Solve points concurrently, each from the straight pose.
    #[arg(long)]
    pub parallel: bool,
    /// Sweep CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct NotchArgs {
    /// Degrees of magnet rotation per millimetre of notch travel.
    #[arg(long, requires = "notch_offset", allow_negative_numbers = true)]
    pub notch_slope: Option<f64>,
    /// Notch position (mm) at zero rotation.
    #[arg(long, requires = "notch_slope", allow_negative_numbers = true)]
    pub notch_offset: Option<f64>,
}

impl NotchArgs {
    fn transform(&self) -> Option<NotchTransform> {
        Some(NotchTransform::from_deg_per_mm(self.notch_slope?, self.notch_offset?))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Experiment CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// K_E axis `lo:hi[:n]`.
    #[arg(long, default_value = "0.009:0.018")]
    pub ke: String,
    /// K_B axis `lo:hi[:n]`.
    #[arg(long, default_value = "3.5:4.5")]
    pub kb: String,
    #[command(flatten)]
    pub notch: NotchArgs,
    /// Calibration JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Error surface as `ke,kb,max_error_mm` rows.
    #[arg(long)]
    pub surface: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Stiffness scale K_E, overriding the config.
    #[arg(long)]
    pub ke: Option<f64>,
    /// Field calibration factor K_B.
    #[arg(long, default_value_t = 1.0)]
    pub kb: f64,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub notch: NotchArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// SVG of measured and predicted deflection.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct WorkspaceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Stiffness scale K_E, overriding the config.
    #[arg(long)]
    pub ke: Option<f64>,
    /// Field calibration factor K_B.
    #[arg(long, default_value_t = 1.0)]
    pub kb: f64,
    /// Actuation schedule CSV solved with the model.
    #[arg(long, required_unless_present_all = ["top", "side"], conflicts_with_all = ["top", "side"])]
    pub schedule: Option<PathBuf>,
    /// Top-camera track `index,x_mm,y_mm`.
    #[arg(long, requires = "side")]
    pub top: Option<PathBuf>,
    /// Side-camera track `index,x_mm,z_mm`.
    #[arg(long, requires = "top")]
    pub side: Option<PathBuf>,
    /// Largest tolerated x disagreement between views, mm.
    #[arg(long, default_value_t = 2.0)]
    pub x_tolerance_mm: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// `start:step:stop` (inclusive) or a single value.
pub fn parse_step_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}` in range `{s}`")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [v] if v.is_finite() => Ok(vec![v]),
        [start, step, stop] if start.is_finite() && step.is_finite() && stop.is_finite() => {
            if step <= 0.0 {
                return Err(format!("range `{s}` needs a positive step"));
            }
            if stop < start {
                return Err(format!("range `{s}` ends before it starts"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(format!("expected `start:step:stop` or a single value, got `{s}`")),
    }
}

/// `lo:hi` or `lo:hi:n`.
pub fn parse_grid_range(s: &str, default_points: usize) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}` in `{s}`"));
    match parts[..] {
        [lo, hi] => Ok((num(lo)?, num(hi)?, default_points)),
        [lo, hi, n] => {
            let n = n.trim().parse::<usize>().map_err(|_| format!("bad point count `{n}` in `{s}`"))?;
            Ok((num(lo)?, num(hi)?, n))
        }
        _ => Err(format!("expected `lo:hi[:n]`, got `{s}`")),
    }
}

fn configure_threads() -> CliResult<()> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    // A second build in the same process (tests) is harmless.
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("global thread pool already initialised");
    }
    Ok(())
}

struct Model {
    source: String,
    config: RobotConfigFile,
    robot: MagneticRobot,
    settings: SolverSettings,
}

fn load_model(args: &ModelArgs, ke: Option<f64>, kb: f64) -> CliResult<Model> {
    let (config, source) = match &args.config {
        Some(p) => (RobotConfigFile::load(p)?, p.display().to_string()),
        None => (paper_demonstrator(), "bundled:paper-demonstrator.json".to_string()),
    };
    let robot = config.build_robot(kb, ke, args.mode)?;
    let settings = config.solver_settings(&robot.params);
    Ok(Model {
        source,
        config,
        robot,
        settings,
    })
}

fn inputs<A: Serialize>(model: &Model, args: &A) -> Inputs {
    let arguments = match serde_json::to_value(args) {
        Ok(serde_json::Value::Object(m)) => m,
        _ => Default::default(),
    };
    Inputs {
        config_source: model.source.clone(),
        config: model.config.clone(),
        ke: model.robot.params.stiffness_scale,
        kb: model.robot.calibration.k_b,
        beam_mode: model.robot.mode,
        arguments,
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<fs::File> {
    fs::File::create(path).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_report<T: Serialize>(
    path: &Path,
    command: &str,
    inputs: Inputs,
    results: T,
    started: Instant,
) -> CliResult<()> {
    let report = RunReport {
        software: Software::default(),
        command: command.to_string(),
        inputs,
        results,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Input(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let started = Instant::now();
    let m = load_model(&args.model, args.ke, args.kb)?;
    let (t1, t2) = (args.theta1.to_radians(), args.theta2.to_radians());
    let result = solve_tip_pose(&m.robot.with_angles(t1, t2), &m.settings)?;
    let straight = m.robot.params.straight_tip();
    let out = SimulateResults::new(t1, t2, &result, &straight);
    let p = out.tip_position_mm;
    let t = out.tip_tangent;
    println!("tip position (mm): {:.4} {:.4} {:.4}", p[0], p[1], p[2]);
    println!("tip tangent:       {:.6} {:.6} {:.6}", t[0], t[1], t[2]);
    println!("deflection (mm):   {:.4}", out.deflection_mm);
    println!("iterations:        {}", out.iterations);
    let converged = out.converged;
    if let Some(path) = &args.report {
        write_report(path, "simulate", inputs(&m, args), out, started)?;
    }
    if !converged {
        return Err(CliError::Numerical(format!(
            "no convergence within {} iterations (residual {:e} m)",
            result.iterations, result.residual
        )));
    }
    Ok(())
}

fn deg_list(s: &str) -> CliResult<Vec<f64>> {
    Ok(parse_step_range(s)
        .map_err(CliError::Input)?
        .into_iter()
        .map(f64::to_radians)
        .collect())
}

fn run_sweep(args: &SweepArgs) -> CliResult<()> {
    let started = Instant::now();
    let m = load_model(&args.model, args.ke, args.kb)?;
    let points = match (&args.schedule, &args.theta1) {
        (Some(path), _) => sweep_pairs(&m.robot, &m.settings, &io::read_schedule_file(path)?, args.parallel)?,
        (None, Some(t1)) => sweep(
            &m.robot,
            &m.settings,
            &deg_list(t1)?,
            &deg_list(&args.theta2)?,
            SweepOptions {
                pairing: AnglePairing::Cartesian,
                parallel: args.parallel,
            },
        )?,
        (None, None) => return Err(CliError::Input("need --theta1 or --schedule".into())),
    };
    match &args.out {
        Some(path) => io::write_sweep_csv(create(path)?, &points)?,
        None => io::write_sweep_csv(std::io::stdout().lock(), &points)?,
    }
    let rows: Vec<io::SweepRow> = points.iter().map(io::SweepRow::from_point).collect();
    let results = SweepResults::new(rows, &m.robot.params.straight_tip());
    if results.failed_count > 0 {
        warn!("{} of {} sweep points did not converge", results.failed_count, points.len());
    }
    let none_converged = results.converged_count == 0;
    if let Some(path) = &args.report {
        write_report(path, "sweep", inputs(&m, args), results, started)?;
    }
    if none_converged {
        return Err(CliError::Numerical("no sweep point converged".into()));
    }
    Ok(())
}

fn calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let started = Instant::now();
    let m = load_model(&args.model, None, 1.0)?;
    let records = io::read_experiment_file(&args.data, args.notch.transform().as_ref())?;
    let ke = parse_grid_range(&args.ke, DEFAULT_GRID_POINTS).map_err(CliError::Input)?;
    let kb = parse_grid_range(&args.kb, DEFAULT_GRID_POINTS).map_err(CliError::Input)?;
    let grid = CalibrationGrid::from_ranges(ke, kb)?;
    let result = grid_search_calibrate(&records, &m.robot, &grid, &m.settings)?;
    println!(
        "K_E* = {}  K_B* = {}  max error = {:.3} mm  mean error = {:.3} mm",
        result.ke_star,
        result.kb_star,
        result.metrics_at_optimum.max_abs_error * 1e3,
        result.metrics_at_optimum.mean_abs_error * 1e3
    );
    if let Some(path) = &args.surface {
        io::write_surface_csv(create(path)?, &result)?;
    }
    write_report(&args.out, "calibrate", inputs(&m, args), CalibrationReport::from(&result), started)
}

fn validate(args: &ValidateArgs) -> CliResult<()> {
    let started = Instant::now();
    let m = load_model(&args.model, args.ke, args.kb)?;
    let records = io::read_experiment_file(&args.data, args.notch.transform().as_ref())?;
    let predictions = predict_records(&m.robot, &records, &m.settings)
        .ok_or_else(|| CliError::Numerical("forward model failed on at least one record".into()))?;
    let metrics = evaluate_metrics(&records, &predictions)?;
    let table: Vec<RecordComparison> = records
        .iter()
        .zip(&predictions)
        .map(|(r, p)| RecordComparison::new(r, p))
        .collect();
    println!(
        "max error = {:.3} mm  mean error = {:.3} mm  std = {:.3} mm  R^2 = {:.4}",
        metrics.max_abs_error * 1e3,
        metrics.mean_abs_error * 1e3,
        metrics.std_error * 1e3,
        metrics.r_squared
    );
    if let Some(path) = &args.plot {
        write_text(path, &svg::validation_plot(&table))?;
    }
    let results = ValidationReport {
        records: table,
        metrics: MetricsReport::from(&metrics),
    };
    write_report(&args.out, "validate", inputs(&m, args), results, started)
}

fn workspace(args: &WorkspaceArgs) -> CliResult<()> {
    let started = Instant::now();
    let m = load_model(&args.model, args.ke, args.kb)?;
    let (source, points, flagged, failed): (&str, Vec<Vector3<f64>>, Vec<u64>, usize) = match &args.schedule {
        Some(path) => {
            let pairs = io::read_schedule_file(path)?;
            let sweep = sweep_pairs(&m.robot, &m.settings, &pairs, false)?;
            let pts: Vec<_> = sweep.iter().filter_map(|p| p.converged().map(|r| r.tip.position)).collect();
            let failed = sweep.len() - pts.len();
            ("schedule", pts, Vec::new(), failed)
        }
        None => {
            let (top, side) = match (&args.top, &args.side) {
                (Some(t), Some(s)) => (t, s),
                _ => return Err(CliError::Input("need --schedule or both --top and --side".into())),
            };
            let top = io::read_track_file(top, CameraPlane::Top)?;
            let side = io::read_track_file(side, CameraPlane::Side)?;
            let merged = merge_biplanar(&top, &side, args.x_tolerance_mm * 1e-3)?;
            let flagged: Vec<u64> = merged.iter().filter(|p| p.flagged).map(|p| p.index).collect();
            if !flagged.is_empty() {
                warn!("{} frames exceed the x tolerance between views", flagged.len());
            }
            ("biplanar", merged.iter().map(|p| p.position).collect(), flagged, 0)
        }
    };
    if failed > 0 {
        warn!("{failed} schedule points did not converge");
    }
    let fit = fit_ellipse(&project_yz(&points))?;
    let stats = workspace_stats(&points, &m.robot.params.straight_tip())?;
    let report = WorkspaceReport::new(source, &points, flagged, failed, &fit, &stats);
    println!(
        "{} points  rms to ellipse = {:.3} mm  max |dy| = {:.2} mm  max |dz| = {:.2} mm",
        points.len(),
        report.rms_distance_mm,
        report.max_deflection_y_mm,
        report.max_deflection_z_mm
    );
    if let Some(path) = &args.plot {
        write_text(path, &svg::workspace_plot(&report, &fit.ellipse))?;
    }
    write_report(&args.out, "workspace", inputs(&m, args), report, started)
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Validate(a) => validate(a),
        Command::Workspace(a) => workspace(a),
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn step_ranges() {
        assert_eq!(parse_step_range("0:12:180").unwrap().len(), 16);
        assert_eq!(parse_step_range("0:360:0").unwrap(), vec![0.0]);
        assert_eq!(parse_step_range("-30").unwrap(), vec![-30.0]);
        assert_eq!(parse_step_range("0:0.1:0.3").unwrap().len(), 4);
        assert!(parse_step_range("0:0:10").is_err());
        assert!(parse_step_range("10:1:0").is_err());
        assert!(parse_step_range("a").is_err());
        assert!(parse_step_range("0:1").is_err());
    }

    #[test]
    fn grid_ranges() {
        assert_eq!(parse_grid_range("0.009:0.018", 25).unwrap(), (0.009, 0.018, 25));
        assert_eq!(parse_grid_range("3.5:4.5:11", 25).unwrap(), (3.5, 4.5, 11));
        assert!(parse_grid_range("1", 25).is_err());
        assert!(parse_grid_range("1:2:x", 25).is_err());
    }
}
