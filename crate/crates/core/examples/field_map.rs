//! Field, gradient and tip wrench of the demonstrator's external magnet.
//!
//! ```text
//! cargo run --example field_map
//! ```

use magbeam::config::paper_demonstrator;
use magbeam::geomag::{calibrated_field, tip_wrench, FieldCalibration};
use magbeam::TipPose;
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let robot = paper_demonstrator().build_robot(1.0, None, None)?;
    let source = robot.source;
    println!(
        "external moment {:.2} A m^2 at x = {:.0} mm",
        source.moment.norm(),
        source.position.x * 1e3
    );

    println!("\nfield along the tube axis (K_B = 1)");
    println!("{:>8} {:>12} {:>14}", "x_mm", "Bx_mT", "dBx/dx_T/m");
    for x_mm in [100.0, 120.0, 140.0, 150.0, 160.0, 180.0] {
        let s = calibrated_field(&source, &FieldCalibration::identity(), &Vector3::new(x_mm * 1e-3, 0.0, 0.0))?;
        println!("{x_mm:>8.0} {:>12.4} {:>14.5}", s.b.x * 1e3, s.gradient[(0, 0)]);
    }

    let tip = Vector3::new(0.15, 0.0, 0.0);
    for k_b in [1.0, 4.03] {
        let s = calibrated_field(&source, &FieldCalibration::new(k_b)?, &tip)?;
        println!("\nK_B = {k_b}: B at tip = {:.4e} T, gradient trace = {:.1e}", s.b.x, s.gradient.trace());
    }

    println!("\nwrench on the straight tip as the distal ring turns (theta2 = 0, K_B = 1)");
    println!("{:>10} {:>24} {:>24}", "theta1_deg", "force_mN", "torque_mNm");
    let pose = TipPose::straight(&Vector3::zeros(), robot.params.length);
    for deg in (0..=180).step_by(30) {
        let pair = robot.pair.with_angles((deg as f64).to_radians(), 0.0);
        let w = tip_wrench(&pair, &pose, &source, &FieldCalibration::identity())?;
        let f = w.force * 1e3;
        let t = w.torque * 1e3;
        println!(
            "{deg:>10} {:>7.3} {:>7.3} {:>7.3}  {:>7.4} {:>7.4} {:>7.4}",
            f.x, f.y, f.z, t.x, t.y, t.z
        );
    }
    Ok(())
}
