//! Point-dipole fields and the wrench they exert on the rotatable tip magnets.
//!
//! All quantities are SI. A [`FieldSample`] carries both the flux density and
//! its Jacobian `G[(i, j)] = ∂B_i/∂p_j`, which is all the force/torque model
//! needs:
//!
//! ```text
//! f = Σ_i G(p_i)ᵀ m_i(θ_i)
//! τ = Σ_i m_i(θ_i) × B(p_i) + δ n × f
//! ```

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::beam::{TipPose, Wrench};
use crate::error::{Error, Result};

/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 4.0e-7 * PI;

/// Default remanence of N52 grade NdFeB, T.
pub const N52_REMANENCE: f64 = 1.45;

/// Distances below this are treated as coincident with the source.
const SINGULAR_DISTANCE: f64 = 1e-12;

/// Skew-symmetric cross-product matrix: `skew(v) * u == v × u`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

// ── Sources ────────────────────────────────────────────────────────────────

/// External permanent magnet modelled as a point dipole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleSource {
    /// Dipole moment, A·m².
    pub moment: Vector3<f64>,
    /// Dipole position in the robot base frame, m.
    pub position: Vector3<f64>,
}

impl DipoleSource {
    pub fn new(moment: Vector3<f64>, position: Vector3<f64>) -> Result<Self> {
        if !moment.iter().chain(position.iter()).all(|c| c.is_finite()) {
            return Err(Error::contract("dipole source must have finite moment and position"));
        }
        Ok(Self { moment, position })
    }
}

/// Scalar correction `K_B` applied to the nominal source.
///
/// The calibrated field scales both the source position and the overall
/// field magnitude by `k_b`; `k_b = 1` is the nominal dipole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCalibration {
    pub k_b: f64,
}

impl FieldCalibration {
    pub fn new(k_b: f64) -> Result<Self> {
        if !(k_b.is_finite() && k_b > 0.0) {
            return Err(Error::contract(format!("k_b must be positive, got {k_b}")));
        }
        Ok(Self { k_b })
    }

    pub const fn identity() -> Self {
        Self { k_b: 1.0 }
    }
}

impl Default for FieldCalibration {
    fn default() -> Self {
        Self::identity()
    }
}

/// Flux density and its spatial Jacobian at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    /// Flux density, T.
    pub b: Vector3<f64>,
    /// `gradient[(i, j)] = ∂B_i/∂p_j`, T/m.
    pub gradient: Matrix3<f64>,
}

impl FieldSample {
    pub fn zero() -> Self {
        Self {
            b: Vector3::zeros(),
            gradient: Matrix3::zeros(),
        }
    }

    fn scaled(self, s: f64) -> Self {
        Self {
            b: self.b * s,
            gradient: self.gradient * s,
        }
    }
}

/// Anything that can report a field and field gradient at a point.
pub trait FieldModel: Sync {
    fn sample(&self, point: &Vector3<f64>) -> Result<FieldSample>;
}

/// Nominal or `K_B`-corrected dipole source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedDipole {
    pub source: DipoleSource,
    pub calibration: FieldCalibration,
}

impl FieldModel for CalibratedDipole {
    fn sample(&self, point: &Vector3<f64>) -> Result<FieldSample> {
        calibrated_field(&self.source, &self.calibration, point)
    }
}

/// Spatially constant field; exerts torque but no force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformField {
    pub b: Vector3<f64>,
}

impl FieldModel for UniformField {
    fn sample(&self, _point: &Vector3<f64>) -> Result<FieldSample> {
        Ok(FieldSample {
            b: self.b,
            gradient: Matrix3::zeros(),
        })
    }
}

/// Flux density of a point dipole and its closed-form Jacobian.
///
/// With `P = point − source.position`, `r = |P|`, `u = P / r`:
/// `B = μ₀/4π · (3u(u·m) − m) / r³`.
pub fn dipole_field(source: &DipoleSource, point: &Vector3<f64>) -> Result<FieldSample> {
    dipole_from_displacement(&source.moment, &(point - source.position))
}

fn dipole_from_displacement(moment: &Vector3<f64>, disp: &Vector3<f64>) -> Result<FieldSample> {
    let r = disp.norm();
    if !(r > SINGULAR_DISTANCE) {
        return Err(Error::Singularity { distance: r });
    }
    let c = MU0 / (4.0 * PI);
    let r2 = r * r;
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    let pm = disp.dot(moment);

    let b = (disp * (3.0 * pm / r5) - moment / r3) * c;

    // ∂B_i/∂P_j = c [ 3(δ_ij (P·m) + P_i m_j + m_i P_j) / r⁵ − 15 P_i P_j (P·m) / r⁷ ]
    let outer_pm = disp * moment.transpose();
    let gradient = (Matrix3::identity() * (3.0 * pm / r5)
        + (outer_pm + outer_pm.transpose()) * (3.0 / r5)
        - disp * disp.transpose() * (15.0 * pm / r7))
        * c;

    Ok(FieldSample { b, gradient })
}

/// Dipole field with the `K_B` correction: displacement taken from the
/// scaled source position `K_B·p_e`, nominal moment, overall `K_B` prefactor.
pub fn calibrated_field(
    source: &DipoleSource,
    cal: &FieldCalibration,
    point: &Vector3<f64>,
) -> Result<FieldSample> {
    let disp = point - source.position * cal.k_b;
    Ok(dipole_from_displacement(&source.moment, &disp)?.scaled(cal.k_b))
}

// ── Tip magnets ────────────────────────────────────────────────────────────

/// One diametrically magnetised ring on the robot tip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingMagnet {
    /// |m|, A·m².
    pub moment_magnitude: f64,
    /// Rotation about the tip tangent, rad. Never wrapped.
    pub angle: f64,
    /// Signed offset along the tip tangent measured from the tip point, m.
    pub axial_offset: f64,
}

/// Distal/proximal ring pair separated by `separation` along the tangent.
///
/// The distal magnet sits on the tip point and the proximal one `separation`
/// behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingPairConfig {
    pub distal: RingMagnet,
    pub proximal: RingMagnet,
    pub separation: f64,
}

impl RingPairConfig {
    pub fn new(
        distal_moment: f64,
        proximal_moment: f64,
        separation: f64,
        theta1: f64,
        theta2: f64,
    ) -> Result<Self> {
        if !(distal_moment >= 0.0 && proximal_moment >= 0.0) {
            return Err(Error::contract("ring magnet moments must be non-negative"));
        }
        if !(separation >= 0.0 && separation.is_finite()) {
            return Err(Error::contract("ring separation must be non-negative"));
        }
        if !(theta1.is_finite() && theta2.is_finite()) {
            return Err(Error::contract("ring angles must be finite"));
        }
        Ok(Self {
            distal: RingMagnet {
                moment_magnitude: distal_moment,
                angle: theta1,
                axial_offset: 0.0,
            },
            proximal: RingMagnet {
                moment_magnitude: proximal_moment,
                angle: theta2,
                axial_offset: -separation,
            },
            separation,
        })
    }

    /// Same magnets, new rotation angles `q = (θ₁, θ₂)`.
    pub fn with_angles(&self, theta1: f64, theta2: f64) -> Self {
        let mut out = *self;
        out.distal.angle = theta1;
        out.proximal.angle = theta2;
        out
    }

    pub fn angles(&self) -> (f64, f64) {
        (self.distal.angle, self.proximal.angle)
    }

    pub fn magnets(&self) -> [&RingMagnet; 2] {
        [&self.distal, &self.proximal]
    }
}

/// Minimal rotation carrying `e₁` onto the unit vector `n`.
pub fn minimal_rotation(n: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let e1 = Vector3::x();
    let v = e1.cross(n);
    let c = e1.dot(n);
    if 1.0 + c <= 1e-12 {
        return Err(Error::contract("tangent is antiparallel to e1; tip frame undefined"));
    }
    let k = skew(&v);
    Ok(Matrix3::identity() + k + k * k / (1.0 + c))
}

fn check_unit(tangent: &Vector3<f64>) -> Result<()> {
    let norm = tangent.norm();
    if !((norm - 1.0).abs() <= 1e-9) {
        return Err(Error::contract(format!("tangent must have unit norm, got |n| = {norm}")));
    }
    Ok(())
}

/// Dipole moment of a ring magnet for the given tip tangent.
///
/// At θ = 0 the moment points along `e₃`; θ turns it right-handedly about
/// `e₁`, and the result is carried into the tip frame by the minimal
/// rotation `e₁ → tangent`.
pub fn ring_dipole_moment(magnet: &RingMagnet, tangent: &Vector3<f64>) -> Result<Vector3<f64>> {
    check_unit(tangent)?;
    let rot = minimal_rotation(tangent)?;
    Ok(rot * ring_direction(magnet.angle) * magnet.moment_magnitude)
}

fn ring_direction(angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    Vector3::new(0.0, -s, c)
}

/// Dipole moment `B_r·V/μ₀` of a uniformly magnetised (annular) cylinder.
///
/// Pass `inner_diameter = 0` for a solid cylinder. Dimensions in metres.
pub fn magnet_moment_from_geometry(
    outer_diameter: f64,
    inner_diameter: f64,
    length: f64,
    remanence: f64,
) -> Result<f64> {
    if !(inner_diameter >= 0.0 && outer_diameter > inner_diameter && length > 0.0) {
        return Err(Error::contract(format!(
            "non-physical magnet geometry: OD {outer_diameter}, ID {inner_diameter}, length {length}"
        )));
    }
    if !(remanence >= 0.0 && remanence.is_finite()) {
        return Err(Error::contract(format!("remanence must be non-negative, got {remanence}")));
    }
    let ro = 0.5 * outer_diameter;
    let ri = 0.5 * inner_diameter;
    let volume = PI * (ro * ro - ri * ri) * length;
    Ok(remanence * volume / MU0)
}

// ── Wrench ─────────────────────────────────────────────────────────────────

/// Force and torque on the ring pair at `tip_pose` in an arbitrary field.
pub fn tip_wrench_in_field<F: FieldModel + ?Sized>(
    pair: &RingPairConfig,
    tip_pose: &TipPose,
    field: &F,
) -> Result<Wrench> {
    let n = &tip_pose.tangent;
    check_unit(n)?;
    let rot = minimal_rotation(n)?;

    let mut force = Vector3::zeros();
    let mut torque = Vector3::zeros();
    for magnet in pair.magnets() {
        let m = rot * ring_direction(magnet.angle) * magnet.moment_magnitude;
        let p_i = tip_pose.position + n * magnet.axial_offset;
        let sample = field.sample(&p_i)?;
        force += sample.gradient.transpose() * m;
        torque += m.cross(&sample.b);
    }
    torque += n.cross(&force) * pair.separation;
    Ok(Wrench { force, torque })
}

/// Force and torque on the ring pair exerted by a (calibrated) dipole source.
pub fn tip_wrench(
    pair: &RingPairConfig,
    tip_pose: &TipPose,
    source: &DipoleSource,
    cal: &FieldCalibration,
) -> Result<Wrench> {
    tip_wrench_in_field(
        pair,
        tip_pose,
        &CalibratedDipole {
            source: *source,
            calibration: *cal,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn source_x(m: f64) -> DipoleSource {
        DipoleSource::new(Vector3::new(m, 0.0, 0.0), Vector3::zeros()).unwrap()
    }

    /// Textbook form written out component-wise, independent of the
    /// vectorised implementation.
    fn textbook_b(m: &Vector3<f64>, p: &Vector3<f64>) -> Vector3<f64> {
        let r = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
        let mdotr = m.x * p.x + m.y * p.y + m.z * p.z;
        let k = 1e-7;
        Vector3::new(
            k * (3.0 * p.x * mdotr / r.powi(5) - m.x / r.powi(3)),
            k * (3.0 * p.y * mdotr / r.powi(5) - m.y / r.powi(3)),
            k * (3.0 * p.z * mdotr / r.powi(5) - m.z / r.powi(3)),
        )
    }

    #[test]
    fn on_axis_field() {
        let s = source_x(200.0);
        let p = Vector3::new(0.08, 0.0, 0.0);
        let f = dipole_field(&s, &p).unwrap();
        let expected = 2e-7 * 200.0 / 0.08f64.powi(3);
        assert_relative_eq!(f.b.x, expected, max_relative = 1e-14);
        assert_relative_eq!(f.b.x, 0.078125, max_relative = 1e-12);
        assert_eq!(f.b.y, 0.0);
        assert_eq!(f.b.z, 0.0);
        assert_relative_eq!(f.b, textbook_b(&s.moment, &p), max_relative = 1e-14);
    }

    #[test]
    fn equatorial_field() {
        let s = source_x(200.0);
        let f = dipole_field(&s, &Vector3::new(0.0, 0.08, 0.0)).unwrap();
        assert_relative_eq!(f.b.x, -0.0390625, max_relative = 1e-12);
        assert!(f.b.y.abs() < 1e-18 && f.b.z.abs() < 1e-18);
    }

    #[test]
    fn zero_moment_gives_zero_field() {
        let f = dipole_field(&source_x(0.0), &Vector3::new(0.1, 0.02, -0.03)).unwrap();
        assert_eq!(f.b, Vector3::zeros());
        assert_eq!(f.gradient, Matrix3::zeros());
    }

    #[test]
    fn coincident_point_is_singular() {
        let s = DipoleSource::new(Vector3::x(), Vector3::new(0.1, 0.2, 0.3)).unwrap();
        let err = dipole_field(&s, &Vector3::new(0.1, 0.2, 0.3)).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
    }

    #[test]
    fn gradient_matches_scalar_potential_hessian() {
        // B = −μ₀∇ψ with ψ = (m·P)/(4π r³); check B and ∂B/∂p by nested
        // central differences of the potential.
        let m = Vector3::new(12.0, -3.0, 5.0);
        let s = DipoleSource::new(m, Vector3::new(0.01, -0.02, 0.03)).unwrap();
        let p = Vector3::new(0.09, 0.04, -0.05);
        let psi = |q: &Vector3<f64>| {
            let d = q - s.position;
            m.dot(&d) / (4.0 * PI * d.norm().powi(3))
        };
        let h = 1e-5;
        let grad_psi = |q: &Vector3<f64>| {
            let mut g = Vector3::zeros();
            for j in 0..3 {
                let mut e = Vector3::zeros();
                e[j] = h;
                g[j] = (psi(&(q + e)) - psi(&(q - e))) / (2.0 * h);
            }
            g
        };
        let f = dipole_field(&s, &p).unwrap();
        assert_relative_eq!(f.b, grad_psi(&p) * -MU0, max_relative = 1e-7);
        for j in 0..3 {
            let mut e = Vector3::zeros();
            e[j] = 1e-4;
            let col = (grad_psi(&(p + e)) - grad_psi(&(p - e))) * (-MU0 / 2e-4);
            for i in 0..3 {
                assert_relative_eq!(f.gradient[(i, j)], col[i], max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn identity_calibration_matches_nominal() {
        let s = DipoleSource::new(Vector3::new(-200.0, 0.0, 0.0), Vector3::new(0.23, 0.0, 0.0)).unwrap();
        let p = Vector3::new(0.15, 0.01, 0.0);
        let a = dipole_field(&s, &p).unwrap();
        let b = calibrated_field(&s, &FieldCalibration::identity(), &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn calibrated_field_at_demonstrator_tip() {
        let m = magnet_moment_from_geometry(0.0762, 0.0, 0.0381, N52_REMANENCE).unwrap();
        let s = DipoleSource::new(Vector3::new(-m, 0.0, 0.0), Vector3::new(0.23, 0.0, 0.0)).unwrap();
        let cal = FieldCalibration::new(4.03).unwrap();
        let tip = Vector3::new(0.15, 0.0, 0.0);
        let f = calibrated_field(&s, &cal, &tip).unwrap();

        // Cross-check: nominal field of a source moved to K_B·p_e, times K_B.
        let moved = DipoleSource::new(s.moment, s.position * 4.03).unwrap();
        let reference = dipole_field(&moved, &tip).unwrap();
        assert_relative_eq!(f.b, reference.b * 4.03, max_relative = 1e-14);
        assert_relative_eq!(f.gradient, reference.gradient * 4.03, max_relative = 1e-14);

        // Tabulated value: on-axis, 2·10⁻⁷·K_B·m/d³ along −x with d = 0.9269 − 0.15.
        let d = 0.23 * 4.03 - 0.15;
        let bx = -2e-7 * 4.03 * m / (d * d * d);
        assert_relative_eq!(f.b.x, bx, max_relative = 1e-12);
        assert_relative_eq!(f.b.x, -3.446058e-4, max_relative = 1e-6);
    }

    #[test]
    fn calibrated_zero_moment() {
        let s = source_x(0.0);
        let f = calibrated_field(&s, &FieldCalibration::new(4.03).unwrap(), &Vector3::new(0.15, 0.0, 0.0)).unwrap();
        assert_eq!(f.b, Vector3::zeros());
    }

    #[test]
    fn calibration_rejects_nonpositive() {
        assert!(FieldCalibration::new(0.0).is_err());
        assert!(FieldCalibration::new(-1.0).is_err());
        assert!(FieldCalibration::new(f64::NAN).is_err());
    }

    #[test]
    fn ring_reference_conventions() {
        let ring = |angle| RingMagnet {
            moment_magnitude: 1.0,
            angle,
            axial_offset: 0.0,
        };
        let m0 = ring_dipole_moment(&ring(0.0), &Vector3::x()).unwrap();
        assert_relative_eq!(m0, Vector3::z(), epsilon = 1e-15);
        let m90 = ring_dipole_moment(&ring(FRAC_PI_2), &Vector3::x()).unwrap();
        assert_relative_eq!(m90, -Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn ring_moment_on_tilted_tangent() {
        let n = Vector3::new(1.0, 0.1, 0.0).normalize();
        let ring = RingMagnet {
            moment_magnitude: 5.44e-3,
            angle: PI / 3.0,
            axial_offset: 0.0,
        };
        let m = ring_dipole_moment(&ring, &n).unwrap();

        // Oracle: Rodrigues rotation about e₁ by θ, then about e₁×n by acos(e₁·n).
        let rodrigues = |v: Vector3<f64>, axis: Vector3<f64>, ang: f64| {
            let k = axis.normalize();
            v * ang.cos() + k.cross(&v) * ang.sin() + k * k.dot(&v) * (1.0 - ang.cos())
        };
        let base = rodrigues(Vector3::z(), Vector3::x(), PI / 3.0);
        let expected = rodrigues(base, Vector3::x().cross(&n), n.x.acos()) * 5.44e-3;
        assert_relative_eq!(m, expected, epsilon = 1e-15);
        assert!(m.dot(&n).abs() <= 1e-9 * m.norm());
        assert_relative_eq!(m.norm(), 5.44e-3, max_relative = 1e-12);
    }

    #[test]
    fn ring_rejects_non_unit_tangent() {
        let ring = RingMagnet {
            moment_magnitude: 1.0,
            angle: 0.0,
            axial_offset: 0.0,
        };
        assert!(matches!(
            ring_dipole_moment(&ring, &Vector3::new(1.1, 0.0, 0.0)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn moment_from_geometry() {
        let tip = magnet_moment_from_geometry(4e-3, 2e-3, 0.5e-3, 1.45).unwrap();
        let v = PI * (2e-3f64.powi(2) - 1e-3f64.powi(2)) * 0.5e-3;
        assert_relative_eq!(tip, 1.45 * v / MU0, max_relative = 1e-14);
        assert_relative_eq!(tip, 5.4375e-3, max_relative = 1e-12);

        let ext = magnet_moment_from_geometry(0.0762, 0.0, 0.0381, 1.45).unwrap();
        assert_relative_eq!(ext, 200.485486125, max_relative = 1e-10);

        assert_eq!(magnet_moment_from_geometry(4e-3, 2e-3, 1e-3, 0.0).unwrap(), 0.0);
        assert!(magnet_moment_from_geometry(2e-3, 2e-3, 1e-3, 1.45).is_err());
        assert!(magnet_moment_from_geometry(4e-3, 2e-3, 0.0, 1.45).is_err());
    }

    fn demo_source() -> DipoleSource {
        DipoleSource::new(Vector3::new(-200.0, 0.0, 0.0), Vector3::new(0.23, 0.0, 0.0)).unwrap()
    }

    #[test]
    fn antiparallel_pair_cancels() {
        let pair = RingPairConfig::new(5.44e-3, 5.44e-3, 0.0, 0.3 + PI, 0.3).unwrap();
        let pose = TipPose::straight(&Vector3::zeros(), 0.15);
        let w = tip_wrench(&pair, &pose, &demo_source(), &FieldCalibration::identity()).unwrap();
        assert!(w.force.norm() < 1e-14, "{:?}", w.force);
        assert!(w.torque.norm() < 1e-14, "{:?}", w.torque);
    }

    #[test]
    fn uniform_field_exerts_pure_torque() {
        let pair = RingPairConfig::new(1e-3, 2e-3, 0.004, 0.4, -1.1).unwrap();
        let pose = TipPose::straight(&Vector3::zeros(), 0.15);
        let field = UniformField {
            b: Vector3::new(-0.01, 0.002, 0.003),
        };
        let w = tip_wrench_in_field(&pair, &pose, &field).unwrap();
        let m_sum = ring_dipole_moment(&pair.distal, &pose.tangent).unwrap()
            + ring_dipole_moment(&pair.proximal, &pose.tangent).unwrap();
        assert_eq!(w.force, Vector3::zeros());
        assert_relative_eq!(w.torque, -skew(&field.b) * m_sum, epsilon = 1e-20);
    }

    #[test]
    fn coincident_pair_equals_doubled_single_magnet() {
        let theta = 0.7;
        let pair = RingPairConfig::new(5.44e-3, 5.44e-3, 0.0, theta, theta).unwrap();
        let single = RingPairConfig::new(2.0 * 5.44e-3, 0.0, 0.0, theta, 0.0).unwrap();
        let pose = TipPose {
            position: Vector3::new(0.149, 0.004, -0.006),
            tangent: Vector3::new(1.0, 0.05, -0.08).normalize(),
        };
        let cal = FieldCalibration::new(1.3).unwrap();
        let a = tip_wrench(&pair, &pose, &demo_source(), &cal).unwrap();
        let b = tip_wrench(&single, &pose, &demo_source(), &cal).unwrap();
        assert_relative_eq!(a.force, b.force, max_relative = 1e-12);
        assert_relative_eq!(a.torque, b.torque, max_relative = 1e-12);
    }

    #[test]
    fn separation_places_proximal_magnet_behind_tip() {
        let pair = RingPairConfig::new(0.0, 1e-3, 0.01, 0.0, 0.0).unwrap();
        let pose = TipPose::straight(&Vector3::zeros(), 0.15);
        let src = demo_source();
        let w = tip_wrench(&pair, &pose, &src, &FieldCalibration::identity()).unwrap();
        let s = dipole_field(&src, &Vector3::new(0.14, 0.0, 0.0)).unwrap();
        let m = Vector3::new(0.0, 0.0, 1e-3);
        let f = s.gradient.transpose() * m;
        assert_relative_eq!(w.force, f, max_relative = 1e-12);
        assert_relative_eq!(w.torque, m.cross(&s.b) + Vector3::x().cross(&f) * 0.01, max_relative = 1e-12);
    }
}
