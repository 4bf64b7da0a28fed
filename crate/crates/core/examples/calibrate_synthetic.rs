//! Grid-search (K_E, K_B) against the shipped synthetic sweep and report
//! fit metrics at the optimum.
//!
//! ```text
//! cargo run --release --example calibrate_synthetic [-- data.csv]
//! ```

use std::path::PathBuf;

use magbeam::calibration::{grid_search_calibrate, CalibrationGrid};
use magbeam::config::paper_demonstrator;
use magbeam::io::read_experiment_file;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic-sweep.csv")
    });
    let records = read_experiment_file(&path, None)?;
    let cfg = paper_demonstrator();
    let robot = cfg.build_robot(1.0, None, None)?;
    let settings = cfg.solver_settings(&robot.params);
    let grid = CalibrationGrid::default();

    let t = std::time::Instant::now();
    let result = grid_search_calibrate(&records, &robot, &grid, &settings)?;
    println!("{} records, {} grid cells, {:.2} s", records.len(), grid.len(), t.elapsed().as_secs_f64());
    println!(
        "K_E* = {:.5} (index {}), K_B* = {:.4} (index {})",
        result.ke_star, result.ke_index, result.kb_star, result.kb_index
    );
    let m = &result.metrics_at_optimum;
    println!(
        "max {:.3} mm, mean {:.3} mm, std {:.3} mm, R^2 {:.4}",
        m.max_abs_error * 1e3,
        m.mean_abs_error * 1e3,
        m.std_error * 1e3,
        m.r_squared
    );

    // The minimax surface along the K_E axis at the optimal K_B.
    println!("\nmax error along K_E at K_B*:");
    for (i, ke) in grid.ke_values.iter().enumerate().step_by(3) {
        println!("  K_E = {ke:.5}: {:.3} mm", result.cell(i, result.kb_index) * 1e3);
    }
    Ok(())
}
