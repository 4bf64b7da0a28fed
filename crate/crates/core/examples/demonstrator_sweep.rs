//! θ₁ sweep of the benchtop demonstrator at the calibrated scales, in both
//! beam formulations.
//!
//! ```text
//! cargo run --release --example demonstrator_sweep
//! ```

use magbeam::config::paper_demonstrator;
use magbeam::equilibrium::{sweep, SweepOptions};
use magbeam::BeamFormulation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = paper_demonstrator();
    let theta1: Vec<f64> = (0..=15).map(|k| (12.0 * k as f64).to_radians()).collect();

    for mode in [BeamFormulation::Corrected, BeamFormulation::PaperLiteral] {
        let robot = cfg.build_robot(4.03, Some(0.009), Some(mode))?;
        let settings = cfg.solver_settings(&robot.params);
        let straight = robot.params.straight_tip();
        let points = sweep(&robot, &settings, &theta1, &[0.0], SweepOptions::default())?;

        println!("\n{mode} (K_E = 0.009, K_B = 4.03)");
        println!("{:>10} {:>9} {:>9} {:>9} {:>14} {:>6}", "theta1_deg", "x_mm", "y_mm", "z_mm", "deflection_mm", "iters");
        let mut max: f64 = 0.0;
        for p in &points {
            match p.converged() {
                Some(r) => {
                    let d = (r.tip.position - straight).norm() * 1e3;
                    max = max.max(d);
                    let t = r.tip.position * 1e3;
                    println!(
                        "{:>10.0} {:>9.3} {:>9.3} {:>9.3} {:>14.3} {:>6}",
                        p.theta1.to_degrees(),
                        t.x,
                        t.y,
                        t.z,
                        d,
                        r.iterations
                    );
                }
                None => println!("{:>10.0}  no convergence", p.theta1.to_degrees()),
            }
        }
        println!("max deflection: {max:.2} mm");
    }
    Ok(())
}
