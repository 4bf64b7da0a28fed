//! Drive both rings through a revolution, fit an ellipse to the tip's y–z
//! trace, and repeat from the shipped two-camera tracks.
//!
//! ```text
//! cargo run --release --example workspace_ellipse [-- plot.svg]
//! ```

use std::path::PathBuf;

use magbeam::config::paper_demonstrator;
use magbeam::equilibrium::sweep_pairs;
use magbeam::io::{read_schedule_file, read_track_file};
use magbeam::report::WorkspaceReport;
use magbeam::workspace::{fit_ellipse, merge_biplanar, project_yz, workspace_stats, CameraPlane, DEFAULT_X_TOLERANCE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = paper_demonstrator();
    let robot = cfg.build_robot(4.0, Some(0.012), None)?;
    let settings = cfg.solver_settings(&robot.params);
    let straight = robot.params.straight_tip();

    let schedule = read_schedule_file(&data.join("elliptical-schedule.csv"))?;
    let points: Vec<_> = sweep_pairs(&robot, &settings, &schedule, false)?
        .iter()
        .filter_map(|p| p.converged().map(|r| r.tip.position))
        .collect();
    let fit = fit_ellipse(&project_yz(&points))?;
    let stats = workspace_stats(&points, &straight)?;
    let e = &fit.ellipse;
    println!("model: {} points", points.len());
    println!(
        "  ellipse centre ({:.2}, {:.2}) mm, axes {:.2} / {:.2} mm, orientation {:.1} deg",
        e.center.x * 1e3,
        e.center.y * 1e3,
        e.semi_major * 1e3,
        e.semi_minor * 1e3,
        e.orientation.to_degrees()
    );
    println!(
        "  rms distance {:.3} mm, mean deflection {:.2} mm, max |dy| {:.2} mm, max |dz| {:.2} mm",
        fit.rms_distance * 1e3,
        stats.mean_deflection * 1e3,
        stats.max_deflection_y * 1e3,
        stats.max_deflection_z * 1e3
    );

    let top = read_track_file(&data.join("workspace-top.csv"), CameraPlane::Top)?;
    let side = read_track_file(&data.join("workspace-side.csv"), CameraPlane::Side)?;
    let merged = merge_biplanar(&top, &side, DEFAULT_X_TOLERANCE)?;
    let measured: Vec<_> = merged.iter().map(|m| m.position).collect();
    let mfit = fit_ellipse(&project_yz(&measured))?;
    println!(
        "cameras: {} frames, {} flagged, rms distance {:.3} mm",
        merged.len(),
        merged.iter().filter(|m| m.flagged).count(),
        mfit.rms_distance * 1e3
    );

    if let Some(path) = std::env::args().nth(1) {
        let report = WorkspaceReport::new("schedule", &points, Vec::new(), 0, &fit, &stats);
        std::fs::write(&path, magbeam::svg::workspace_plot(&report, &fit.ellipse))?;
        println!("plot written to {path}");
    }
    Ok(())
}
