//! Tip pose and centerline of the bare tube under a prescribed tip wrench,
//! in both beam formulations.
//!
//! ```text
//! cargo run --example beam_deflection
//! ```

use magbeam::beam::{centerline, tip_pose_from_wrench};
use magbeam::config::paper_demonstrator;
use magbeam::{BeamFormulation, Wrench};
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = paper_demonstrator().robot_params()?;
    let k = params.bending_stiffness();
    println!(
        "L = {} mm, E = {} MPa, I = {:.4e} m^4, K_E = {}, K = {:.4e} N m^2",
        params.length * 1e3,
        params.elastic_modulus * 1e-6,
        params.section_moment,
        params.stiffness_scale,
        k
    );

    let cases = [
        ("end moment 2e-6 N m about z", Wrench { force: Vector3::zeros(), torque: Vector3::new(0.0, 0.0, 2e-6) }),
        ("end force 20 uN along y", Wrench { force: Vector3::new(0.0, 2e-5, 0.0), torque: Vector3::zeros() }),
    ];
    for (label, w) in cases {
        println!("\n{label}");
        for mode in [BeamFormulation::Corrected, BeamFormulation::PaperLiteral] {
            let tip = tip_pose_from_wrench(&params, &w, mode)?;
            println!(
                "  {:<14} tip = ({:.3}, {:.3}, {:.3}) mm",
                mode.as_str(),
                tip.position.x * 1e3,
                tip.position.y * 1e3,
                tip.position.z * 1e3
            );
        }
        let l = params.length;
        let closed = w.torque.z * l * l / (2.0 * k) + w.force.y * l.powi(3) / (3.0 * k);
        println!("  cantilever closed form: y = {:.3} mm", closed * 1e3);
    }

    let w = Wrench {
        force: Vector3::new(0.0, 2e-5, 0.0),
        torque: Vector3::new(0.0, 0.0, 2e-6),
    };
    println!("\ncenterline under both loads (corrected):");
    for p in centerline(&params, &w, 7)? {
        println!("  x = {:6.1} mm  y = {:7.3} mm", p.x * 1e3, p.y * 1e3);
    }
    Ok(())
}
