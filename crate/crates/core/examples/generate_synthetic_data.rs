//! Regenerate the synthetic datasets shipped in `data/`.
//!
//! ```text
//! cargo run --release --example generate_synthetic_data [-- OUT_DIR]
//! ```
//!
//! Everything is produced by the forward model on the bundled demonstrator
//! config, so the files double as fixtures with a known answer:
//!
//! - `synthetic-sweep.csv`: θ₁ = 0, 12, …, 180°, θ₂ = 0, full 3D tips at
//!   the grid cell (K_E, K_B) = (0.012, 4.0), noiseless.
//! - `synthetic-sweep-noisy.csv`: the same with N(0, 0.5 mm) added to every
//!   coordinate (ChaCha8, seed 20_240).
//! - `elliptical-schedule.csv`: both rings turned together through a full
//!   revolution in 10° steps.
//! - `workspace-top.csv`, `workspace-side.csv`: that schedule as seen by a
//!   top and a side camera, with N(0, 0.3 mm) pixel noise (seed 7).

use std::fs::File;
use std::path::PathBuf;

use magbeam::calibration::{predict_records, CalibrationGrid, ExperimentRecord, TipMeasurement};
use magbeam::config::paper_demonstrator;
use magbeam::equilibrium::sweep_pairs;
use magbeam::io;
use magbeam::workspace::{CameraPlane, PlanarTrack};
use nalgebra::{Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    std::fs::create_dir_all(&out)?;

    let cfg = paper_demonstrator();
    let grid = CalibrationGrid::default();
    let (ke, kb) = (grid.ke_values[8], grid.kb_values[12]);
    let robot = cfg.build_robot(kb, Some(ke), None)?;
    let settings = cfg.solver_settings(&robot.params);
    println!("generating at K_E = {ke}, K_B = {kb} ({} mode)", robot.mode);

    // θ₁ sweep, noiseless and noisy.
    let angles: Vec<f64> = (0..16).map(|k| (12.0 * k as f64).to_radians()).collect();
    let placeholders: Vec<ExperimentRecord> = angles
        .iter()
        .map(|&a| ExperimentRecord::new(a, 0.0, TipMeasurement::Spatial(Vector3::zeros())))
        .collect::<Result<_, _>>()?;
    let tips = predict_records(&robot, &placeholders, &settings).ok_or("forward model failed")?;
    let clean: Vec<ExperimentRecord> = angles
        .iter()
        .zip(&tips)
        .map(|(&a, t)| ExperimentRecord::new(a, 0.0, TipMeasurement::Spatial(t.position)))
        .collect::<Result<_, _>>()?;
    io::write_experiment_csv(File::create(out.join("synthetic-sweep.csv"))?, &clean)?;

    let mut rng = ChaCha8Rng::seed_from_u64(20_240);
    let noise = Normal::new(0.0, 0.5e-3)?;
    let noisy: Vec<ExperimentRecord> = clean
        .iter()
        .map(|r| {
            let p = r.tip.observed() + Vector3::from_fn(|_, _| noise.sample(&mut rng));
            ExperimentRecord::new(r.theta1, r.theta2, TipMeasurement::Spatial(p))
        })
        .collect::<Result<_, _>>()?;
    io::write_experiment_csv(File::create(out.join("synthetic-sweep-noisy.csv"))?, &noisy)?;

    // Synchronised rotation of both rings.
    let schedule: Vec<(f64, f64)> = (0..36)
        .map(|k| {
            let phi = (10.0 * k as f64).to_radians();
            (phi, phi)
        })
        .collect();
    io::write_schedule_csv(File::create(out.join("elliptical-schedule.csv"))?, &schedule)?;

    let points = sweep_pairs(&robot, &settings, &schedule, false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pixel = Normal::new(0.0, 0.3e-3)?;
    let mut top = Vec::new();
    let mut side = Vec::new();
    for p in &points {
        let tip = p.converged().ok_or("schedule point did not converge")?.tip.position;
        top.push(Vector2::new(tip.x + pixel.sample(&mut rng), tip.y + pixel.sample(&mut rng)));
        side.push(Vector2::new(tip.x + pixel.sample(&mut rng), tip.z + pixel.sample(&mut rng)));
    }
    let top = PlanarTrack::sequential(CameraPlane::Top, top)?;
    let side = PlanarTrack::sequential(CameraPlane::Side, side)?;
    io::write_track_csv(File::create(out.join("workspace-top.csv"))?, &top)?;
    io::write_track_csv(File::create(out.join("workspace-side.csv"))?, &side)?;

    println!("wrote datasets to {}", out.display());
    Ok(())
}
