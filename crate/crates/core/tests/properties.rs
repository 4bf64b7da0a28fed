//! Property tests across the numerical core.

use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use magbeam::beam::{centerline, tip_pose_from_wrench};
use magbeam::calibration::{evaluate_metrics, grid_search_calibrate, CalibrationGrid, ExperimentRecord, TipMeasurement};
use magbeam::config::paper_demonstrator;
use magbeam::equilibrium::{
    fixed_point_residual, invert_controls, solve_from, solve_tip_pose, sweep, InverseSettings, InverseTarget,
    MagneticRobot, SolverSettings, SweepOptions,
};
use magbeam::geomag::{dipole_field, tip_wrench, DipoleSource, FieldCalibration, RingPairConfig};
use magbeam::workspace::{fit_ellipse, rms_distance, Ellipse};
use magbeam::{BeamFormulation, RobotParams, TipPose, Wrench};
use nalgebra::{Rotation2, Vector2, Vector3};
use proptest::prelude::*;

fn demonstrator() -> (MagneticRobot, SolverSettings) {
    let cfg = paper_demonstrator();
    let robot = cfg.build_robot(4.03, Some(0.009), None).unwrap();
    let settings = cfg.solver_settings(&robot.params);
    (robot, settings)
}

fn vec3(range: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn away_from_origin() -> impl Strategy<Value = Vector3<f64>> {
    vec3(0.3).prop_filter("not near the source", |p| p.norm() > 0.02)
}

// ── geomag ─────────────────────────────────────────────────────────────────

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradient_is_symmetric_and_traceless(m in vec3(100.0), p in away_from_origin()) {
        let s = DipoleSource::new(m, Vector3::zeros()).unwrap();
        let g = dipole_field(&s, &p).unwrap().gradient;
        let scale = g.norm().max(1e-300);
        prop_assert!((g - g.transpose()).norm() <= 1e-12 * scale);
        prop_assert!(g.trace().abs() <= 1e-12 * scale);
    }

    #[test]
    fn field_is_linear_in_moment(a in vec3(50.0), b in vec3(50.0), k in -3.0..3.0f64, p in away_from_origin()) {
        let f = |m: Vector3<f64>| dipole_field(&DipoleSource::new(m, Vector3::zeros()).unwrap(), &p).unwrap();
        let lhs = f(a * k + b);
        let rhs_b = f(a).b * k + f(b).b;
        let rhs_g = f(a).gradient * k + f(b).gradient;
        prop_assert!((lhs.b - rhs_b).norm() <= 1e-10 * (rhs_b.norm() + lhs.b.norm() + 1e-300));
        prop_assert!((lhs.gradient - rhs_g).norm() <= 1e-10 * (rhs_g.norm() + lhs.gradient.norm() + 1e-300));
    }

    #[test]
    fn field_scales_inverse_cube(m in vec3(50.0), p in away_from_origin(), s in 0.5..3.0f64) {
        let src = DipoleSource::new(m, Vector3::zeros()).unwrap();
        let near = dipole_field(&src, &p).unwrap().b;
        let far = dipole_field(&src, &(p * s)).unwrap().b;
        prop_assert!((far * s.powi(3) - near).norm() <= 1e-10 * near.norm().max(1e-300));
    }

    #[test]
    fn torque_is_bounded_and_orthogonal(t1 in -TAU..TAU, t2 in -TAU..TAU, tip in vec3(0.02)) {
        let (robot, _) = demonstrator();
        let pair = robot.pair.with_angles(t1, t2);
        let pose = TipPose { position: Vector3::new(0.15, 0.0, 0.0) + tip, tangent: Vector3::x() };
        let w = tip_wrench(&pair, &pose, &robot.source, &robot.calibration).unwrap();
        let b = magbeam::geomag::calibrated_field(&robot.source, &robot.calibration, &pose.position).unwrap().b;
        // δ = 0: τ = (m₁ + m₂) × B, so |τ| ≤ (|m₁| + |m₂|)|B| and τ ⊥ B.
        let m = pair.distal.moment_magnitude + pair.proximal.moment_magnitude;
        prop_assert!(w.torque.norm() <= m * b.norm() * (1.0 + 1e-12));
        prop_assert!(w.torque.dot(&b).abs() <= 1e-12 * w.torque.norm() * b.norm() + 1e-30);
    }

    #[test]
    fn antiparallel_rings_cancel(t in -TAU..TAU, tip in vec3(0.02)) {
        let (robot, _) = demonstrator();
        let pair = robot.pair.with_angles(t, t + PI);
        let pose = TipPose { position: Vector3::new(0.15, 0.0, 0.0) + tip, tangent: Vector3::x() };
        let w = tip_wrench(&pair, &pose, &robot.source, &robot.calibration).unwrap();
        prop_assert!(w.force.norm() < 1e-15 && w.torque.norm() < 1e-15, "{:?}", w);
    }

    #[test]
    fn calibration_shift_matches_moved_source(kb in 0.5..5.0f64, p in vec3(0.05)) {
        let src = DipoleSource::new(Vector3::new(-200.0, 0.0, 0.0), Vector3::new(0.23, 0.0, 0.0)).unwrap();
        let cal = FieldCalibration::new(kb).unwrap();
        let moved = DipoleSource::new(src.moment, src.position * kb).unwrap();
        let point = Vector3::new(0.15, 0.0, 0.0) + p;
        prop_assume!((point - moved.position).norm() > 0.02);
        let a = magbeam::geomag::calibrated_field(&src, &cal, &point).unwrap();
        let b = dipole_field(&moved, &point).unwrap();
        prop_assert!((a.b - b.b * kb).norm() <= 1e-12 * a.b.norm());
    }
}

// ── beam ───────────────────────────────────────────────────────────────────

fn params(ke: f64) -> RobotParams {
    let mut p = paper_demonstrator().robot_params().unwrap();
    p.stiffness_scale = ke;
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn beam_is_linear_in_wrench(f in vec3(1e-4), t in vec3(1e-5), g in vec3(1e-4), u in vec3(1e-5), k in -2.0..2.0f64) {
        let p = params(0.009);
        for mode in [BeamFormulation::Corrected, BeamFormulation::PaperLiteral] {
            let disp = |w: Wrench| tip_pose_from_wrench(&p, &w, mode).unwrap().position - p.straight_tip();
            let a = Wrench { force: f, torque: t };
            let b = Wrench { force: g, torque: u };
            let lhs = disp(a * k + b);
            let rhs = disp(a) * k + disp(b);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (lhs.norm() + rhs.norm() + 1e-300));
        }
    }

    #[test]
    fn axial_loads_do_nothing(fx in -1.0..1.0f64, tx in -1.0..1.0f64) {
        let p = params(0.009);
        let w = Wrench { force: Vector3::new(fx, 0.0, 0.0), torque: Vector3::new(tx, 0.0, 0.0) };
        let tip = tip_pose_from_wrench(&p, &w, BeamFormulation::Corrected).unwrap();
        prop_assert_eq!(tip.position, p.straight_tip());
        prop_assert_eq!(tip.tangent, Vector3::x());
    }

    #[test]
    fn planar_loads_stay_in_plane(fy in -1e-4..1e-4f64, tz in -1e-5..1e-5f64) {
        let p = params(0.009);
        let w = Wrench { force: Vector3::new(0.0, fy, 0.0), torque: Vector3::new(0.0, 0.0, tz) };
        for mode in [BeamFormulation::Corrected, BeamFormulation::PaperLiteral] {
            let tip = tip_pose_from_wrench(&p, &w, mode).unwrap();
            prop_assert_eq!(tip.position.z, 0.0);
            prop_assert_eq!(tip.tangent.z, 0.0);
            prop_assert!((tip.tangent.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn doubling_stiffness_halves_deflection(f in vec3(1e-4), t in vec3(1e-5), ke in 0.005..0.02f64) {
        let w = Wrench { force: f, torque: t };
        let d1 = tip_pose_from_wrench(&params(ke), &w, BeamFormulation::Corrected).unwrap().position - params(ke).straight_tip();
        let d2 = tip_pose_from_wrench(&params(2.0 * ke), &w, BeamFormulation::Corrected).unwrap().position - params(ke).straight_tip();
        prop_assert!((d1 - d2 * 2.0).norm() <= 1e-12 * d1.norm().max(1e-300));
    }

    #[test]
    fn centerline_ends_at_tip(f in vec3(1e-4), t in vec3(1e-5)) {
        let p = params(0.009);
        let w = Wrench { force: f, torque: t };
        let tip = tip_pose_from_wrench(&p, &w, BeamFormulation::Corrected).unwrap();
        let line = centerline(&p, &w, 2001).unwrap();
        prop_assert!((line.last().unwrap() - tip.position).norm() <= 1e-6 * p.length);
        prop_assert_eq!(line[0], p.base_position);
    }
}

// ── equilibrium ────────────────────────────────────────────────────────────

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn converged_residual_is_within_tolerance(t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let (robot, settings) = demonstrator();
        let r = robot.with_angles(t1, t2);
        let res = solve_tip_pose(&r, &settings).unwrap();
        prop_assert!(res.converged);
        let fresh = fixed_point_residual(&r, &res.tip, settings.relaxation).unwrap();
        prop_assert!(fresh <= settings.position_tolerance, "{fresh}");
    }

    #[test]
    fn periodic_in_both_angles(t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let (robot, settings) = demonstrator();
        let a = solve_tip_pose(&robot.with_angles(t1, t2), &settings).unwrap();
        let b = solve_tip_pose(&robot.with_angles(t1 + TAU, t2 + TAU), &settings).unwrap();
        prop_assert!((a.tip.position - b.tip.position).norm() <= 2.0 * settings.position_tolerance);
    }

    #[test]
    fn negated_angles_mirror_through_xz(t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let (robot, settings) = demonstrator();
        let a = solve_tip_pose(&robot.with_angles(t1, t2), &settings).unwrap().tip.position;
        let b = solve_tip_pose(&robot.with_angles(-t1, -t2), &settings).unwrap().tip.position;
        let mirrored = Vector3::new(b.x, -b.y, b.z);
        prop_assert!((a - mirrored).norm() <= 2.0 * settings.position_tolerance);
    }

    #[test]
    fn seed_choice_does_not_matter(t1 in 0.0..TAU, t2 in 0.0..TAU, dt in -0.2..0.2f64) {
        let (robot, settings) = demonstrator();
        let neighbour = solve_tip_pose(&robot.with_angles(t1 + dt, t2), &settings).unwrap();
        let r = robot.with_angles(t1, t2);
        let cold = solve_tip_pose(&r, &settings).unwrap();
        let warm = solve_from(&r, &settings, neighbour.tip).unwrap();
        prop_assert!((cold.tip.position - warm.tip.position).norm() <= 2.0 * settings.position_tolerance);
    }

    #[test]
    fn coincident_pair_equals_single_summed_magnet(t1 in 0.0..TAU, t2 in 0.0..TAU) {
        let (robot, settings) = demonstrator();
        let m = robot.pair.distal.moment_magnitude;
        // m(θ₁) + m(θ₂) = 2m cos((θ₁−θ₂)/2) · m̂((θ₁+θ₂)/2)
        let half = 0.5 * (t1 - t2);
        let (mag, angle) = (2.0 * m * half.cos(), 0.5 * (t1 + t2));
        let (mag, angle) = if mag < 0.0 { (-mag, angle + PI) } else { (mag, angle) };
        let mut single = robot.clone();
        single.pair = RingPairConfig::new(mag, 0.0, 0.0, angle, 0.0).unwrap();
        let a = solve_tip_pose(&robot.with_angles(t1, t2), &settings).unwrap().tip.position;
        let b = solve_tip_pose(&single, &settings).unwrap().tip.position;
        prop_assert!((a - b).norm() <= 2.0 * settings.position_tolerance);
    }
}

#[test]
fn parallel_and_serial_sweeps_agree() {
    let (robot, settings) = demonstrator();
    let t1: Vec<f64> = (0..16).map(|k| (12.0 * k as f64).to_radians()).collect();
    let serial = sweep(&robot, &settings, &t1, &[0.0], SweepOptions::default()).unwrap();
    let par = sweep(&robot, &settings, &t1, &[0.0], SweepOptions { parallel: true, ..Default::default() }).unwrap();
    assert_eq!(serial.len(), 16);
    for (a, b) in serial.iter().zip(&par) {
        assert_eq!((a.theta1, a.theta2), (b.theta1, b.theta2));
        let (a, b) = (a.converged().unwrap(), b.converged().unwrap());
        assert!((a.tip.position - b.tip.position).norm() <= 2.0 * settings.position_tolerance);
    }
}

#[test]
fn inverse_of_straight_tip_is_antiparallel() {
    let (robot, settings) = demonstrator();
    let target = robot.params.straight_tip();
    let inv = invert_controls(&robot, InverseTarget::Position(target), &settings, &InverseSettings::default()).unwrap();
    assert_eq!((inv.theta1, inv.theta2), (0.0, PI));
    assert!(inv.error <= settings.position_tolerance);
    assert!(!inv.nearest_achievable);
    assert!(inv.basins >= 1);
}

#[test]
fn inverse_round_trip() {
    let (robot, settings) = demonstrator();
    for (a, b) in [(0.9, -0.35), (2.0, 0.4), (4.0, 3.0)] {
        let target = solve_tip_pose(&robot.with_angles(a, b), &settings).unwrap().tip.position;
        let inv = invert_controls(&robot, InverseTarget::Position(target), &settings, &InverseSettings::default()).unwrap();
        assert!(inv.error <= settings.position_tolerance, "({a}, {b}): error {}", inv.error);
        assert!(!inv.nearest_achievable);
        let check = solve_tip_pose(&robot.with_angles(inv.theta1, inv.theta2), &settings).unwrap();
        assert!((check.tip.position - target).norm() <= 2.0 * settings.position_tolerance);
    }
}

#[test]
fn inverse_flags_unreachable_target() {
    let (robot, settings) = demonstrator();
    let far = Vector3::new(0.3, 0.0, 0.0);
    let inv = invert_controls(&robot, InverseTarget::Position(far), &settings, &InverseSettings::default()).unwrap();
    assert!(inv.nearest_achievable);
    assert!(inv.error > 0.1);
    assert_eq!(inv.basins, 0);
}

#[test]
fn inverse_is_deterministic() {
    let (robot, settings) = demonstrator();
    let target = solve_tip_pose(&robot.with_angles(1.3, 0.2), &settings).unwrap().tip.position;
    let a = invert_controls(&robot, InverseTarget::Position(target), &settings, &InverseSettings::default()).unwrap();
    let b = invert_controls(&robot, InverseTarget::Position(target), &settings, &InverseSettings::default()).unwrap();
    assert_eq!((a.theta1, a.theta2), (b.theta1, b.theta2));
}

// ── calibration ────────────────────────────────────────────────────────────

fn synthetic_records(robot: &MagneticRobot, settings: &SolverSettings) -> Vec<ExperimentRecord> {
    (0..8)
        .map(|k| {
            let a = (24.0 * k as f64).to_radians();
            let tip = solve_tip_pose(&robot.with_angles(a, 0.0), settings).unwrap().tip.position;
            ExperimentRecord::new(a, 0.0, TipMeasurement::Top { x: tip.x, y: tip.y }).unwrap()
        })
        .collect()
}

#[test]
fn calibration_ignores_record_order() {
    let cfg = paper_demonstrator();
    let grid = CalibrationGrid::from_ranges((0.009, 0.018, 5), (3.5, 4.5, 5)).unwrap();
    let truth = cfg.build_robot(grid.kb_values[2], Some(grid.ke_values[3]), None).unwrap();
    let settings = cfg.solver_settings(&truth.params);
    let mut records = synthetic_records(&truth, &settings);
    let a = grid_search_calibrate(&records, &truth, &grid, &settings).unwrap();
    records.reverse();
    records.swap(1, 5);
    let b = grid_search_calibrate(&records, &truth, &grid, &settings).unwrap();
    assert_eq!((a.ke_index, a.kb_index), (b.ke_index, b.kb_index));
    assert_eq!(a.error_surface, b.error_surface);
    assert_eq!((a.ke_index, a.kb_index), (3, 2));
}

#[test]
fn surface_cells_match_direct_minimax() {
    let cfg = paper_demonstrator();
    let grid = CalibrationGrid::from_ranges((0.009, 0.018, 3), (3.5, 4.5, 3)).unwrap();
    let base = cfg.build_robot(4.0, Some(0.012), None).unwrap();
    let settings = cfg.solver_settings(&base.params);
    let records = synthetic_records(&base, &settings);
    let result = grid_search_calibrate(&records, &base, &grid, &settings).unwrap();
    for (i, &ke) in grid.ke_values.iter().enumerate() {
        for (j, &kb) in grid.kb_values.iter().enumerate() {
            let r = base.with_scales(ke, kb).unwrap();
            let worst = records
                .iter()
                .map(|rec| {
                    let tip = solve_tip_pose(&r.with_angles(rec.theta1, rec.theta2), &settings).unwrap().tip.position;
                    ((rec.tip.observed().x - tip.x).powi(2) + (rec.tip.observed().y - tip.y).powi(2)).sqrt()
                })
                .fold(0.0, f64::max);
            assert_relative_eq!(result.cell(i, j), worst, max_relative = 1e-12, epsilon = 1e-18);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_match_direct_formulas(errs in prop::collection::vec((-5e-3..5e-3f64, -5e-3..5e-3f64), 2..20)) {
        let records: Vec<ExperimentRecord> = errs
            .iter()
            .enumerate()
            .map(|(k, _)| ExperimentRecord::new(0.1 * k as f64, 0.0, TipMeasurement::Top { x: 0.15, y: 0.001 * k as f64 }).unwrap())
            .collect();
        let preds: Vec<TipPose> = records
            .iter()
            .zip(&errs)
            .map(|(r, (dx, dy))| TipPose { position: r.tip.observed() + Vector3::new(*dx, *dy, 0.0), tangent: Vector3::x() })
            .collect();
        let m = evaluate_metrics(&records, &preds).unwrap();
        let e: Vec<f64> = errs.iter().map(|(a, b)| a.hypot(*b)).collect();
        let n = e.len() as f64;
        let mean = e.iter().sum::<f64>() / n;
        let std = (e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        prop_assert!((m.max_abs_error - e.iter().cloned().fold(0.0, f64::max)).abs() < 1e-15);
        prop_assert!((m.mean_abs_error - mean).abs() < 1e-15);
        prop_assert!((m.std_error - std).abs() < 1e-14);
        prop_assert!(m.r_squared <= 1.0);
    }
}

// ── workspace ──────────────────────────────────────────────────────────────

fn ellipse_strategy() -> impl Strategy<Value = Ellipse> {
    (-0.05..0.05f64, -0.05..0.05f64, 0.005..0.05f64, 0.2..1.0f64, 0.0..PI).prop_map(|(cx, cy, a, ratio, phi)| {
        Ellipse::new(Vector2::new(cx, cy), a, a * ratio, phi).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_commutes_with_rigid_motion(e in ellipse_strategy(), angle in 0.0..TAU, shift in (-0.1..0.1f64, -0.1..0.1f64)) {
        let pts: Vec<Vector2<f64>> = e.sample(40).iter().enumerate()
            .map(|(k, p)| p + Vector2::new(1e-4 * ((k * 7) % 5) as f64, -1e-4 * ((k * 3) % 4) as f64))
            .collect();
        let rot = Rotation2::new(angle);
        let t = Vector2::new(shift.0, shift.1);
        let moved: Vec<Vector2<f64>> = pts.iter().map(|p| rot * p + t).collect();
        let a = fit_ellipse(&pts).unwrap();
        let b = fit_ellipse(&moved).unwrap();
        prop_assert!((rot * a.ellipse.center + t - b.ellipse.center).norm() < 1e-7);
        prop_assert!((a.ellipse.semi_major - b.ellipse.semi_major).abs() < 1e-7);
        prop_assert!((a.ellipse.semi_minor - b.ellipse.semi_minor).abs() < 1e-7);
        prop_assert!((a.rms_distance - b.rms_distance).abs() < 1e-8);
    }

    #[test]
    fn distance_is_zero_on_curve_and_radial_outside(e in ellipse_strategy(), t in 0.0..TAU, h in 0.0..0.02f64) {
        let on = e.point_at(t);
        prop_assert!(e.distance(&on) < 1e-12);
        // Stepping along the outward normal by h lands exactly h away.
        let (s, c) = t.sin_cos();
        let local = Vector2::new(c / e.semi_major, s / e.semi_minor).normalize();
        let normal = Rotation2::new(e.orientation) * local;
        let out = on + normal * h;
        prop_assert!((e.distance(&out) - h).abs() < 1e-9, "{} vs {h}", e.distance(&out));
    }

    #[test]
    fn rms_of_exact_points_is_zero(e in ellipse_strategy()) {
        prop_assert!(rms_distance(&e, &e.sample(50)) < 1e-12);
    }
}
