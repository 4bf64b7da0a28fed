//! Recover magnet angles that put the tip at a requested position.
//!
//! ```text
//! cargo run --release --example inverse_controls
//! ```

use magbeam::config::paper_demonstrator;
use magbeam::equilibrium::{invert_controls, solve_tip_pose, InverseSettings, InverseTarget};
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = paper_demonstrator();
    let robot = cfg.build_robot(4.03, Some(0.009), None)?;
    let settings = cfg.solver_settings(&robot.params);

    // A reachable target: wherever the tip sits at (50°, −20°).
    let (a, b) = (50f64.to_radians(), (-20f64).to_radians());
    let reachable = solve_tip_pose(&robot.with_angles(a, b), &settings)?.tip.position;

    let targets = [
        ("reachable", reachable),
        ("outside the workspace", Vector3::new(0.15, 0.04, 0.0)),
    ];
    for (label, target) in targets {
        let inv = invert_controls(&robot, InverseTarget::Position(target), &settings, &InverseSettings::default())?;
        println!("\n{label}: target ({:.2}, {:.2}, {:.2}) mm", target.x * 1e3, target.y * 1e3, target.z * 1e3);
        println!(
            "  theta1 = {:.2} deg, theta2 = {:.2} deg, error = {:.4} mm",
            inv.theta1.to_degrees(),
            inv.theta2.to_degrees(),
            inv.error * 1e3
        );
        println!(
            "  nearest achievable: {}, distinct solutions: {}, failed samples: {}",
            inv.nearest_achievable, inv.basins, inv.skipped
        );
    }
    Ok(())
}
