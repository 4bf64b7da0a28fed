//! Reachable-workspace analysis: bi-planar merge, ellipse fitting and
//! deflection statistics.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default allowed disagreement between the two views' x coordinate, m.
pub const DEFAULT_X_TOLERANCE: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraPlane {
    /// x–y plane.
    Top,
    /// x–z plane.
    Side,
}

/// 2D tip track from one camera; `points[k] = (x, y)` for the top view and
/// `(x, z)` for the side view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarTrack {
    pub plane: CameraPlane,
    pub points: Vec<Vector2<f64>>,
    pub indices: Vec<u64>,
}

impl PlanarTrack {
    pub fn new(plane: CameraPlane, points: Vec<Vector2<f64>>, indices: Vec<u64>) -> Result<Self> {
        if points.len() != indices.len() {
            return Err(Error::input("track points and indices differ in length"));
        }
        if !points.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::input("track points must be finite"));
        }
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("track indices must be strictly increasing"));
        }
        Ok(Self { plane, points, indices })
    }

    /// Track with indices `0..n`.
    pub fn sequential(plane: CameraPlane, points: Vec<Vector2<f64>>) -> Result<Self> {
        let indices = (0..points.len() as u64).collect();
        Self::new(plane, points, indices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergedPoint {
    pub index: u64,
    pub position: Vector3<f64>,
    /// |x_top − x_side|, m.
    pub x_disagreement: f64,
    /// Disagreement exceeded the tolerance.
    pub flagged: bool,
}

/// Combine index-aligned top and side tracks into 3D points: y from the
/// top view, z from the side view, x averaged.
pub fn merge_biplanar(top: &PlanarTrack, side: &PlanarTrack, x_tolerance: f64) -> Result<Vec<MergedPoint>> {
    if top.plane != CameraPlane::Top || side.plane != CameraPlane::Side {
        return Err(Error::input("merge expects a top track and a side track"));
    }
    if top.points.len() != side.points.len() {
        return Err(Error::input(format!(
            "top track has {} points, side track {}",
            top.points.len(),
            side.points.len()
        )));
    }
    if top.indices != side.indices {
        return Err(Error::input("top and side tracks are not index-aligned"));
    }
    Ok(top
        .points
        .iter()
        .zip(&side.points)
        .zip(&top.indices)
        .map(|((t, s), &index)| {
            let dx = (t.x - s.x).abs();
            MergedPoint {
                index,
                position: Vector3::new(0.5 * (t.x + s.x), t.y, s.y),
                x_disagreement: dx,
                flagged: dx > x_tolerance,
            }
        })
        .collect())
}

/// y–z coordinates of 3D points.
pub fn project_yz(points: &[Vector3<f64>]) -> Vec<Vector2<f64>> {
    points.iter().map(|p| Vector2::new(p.y, p.z)).collect()
}

// ── Ellipse ────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: Vector2<f64>,
    /// Semi-major axis `a`.
    pub semi_major: f64,
    /// Semi-minor axis `b ≤ a`.
    pub semi_minor: f64,
    /// Angle of the major axis from the first coordinate axis, rad in (−π/2, π/2].
    pub orientation: f64,
}

impl Ellipse {
    pub fn new(center: Vector2<f64>, semi_major: f64, semi_minor: f64, orientation: f64) -> Result<Self> {
        if !(semi_major >= semi_minor && semi_minor > 0.0 && semi_major.is_finite()) {
            return Err(Error::contract("ellipse needs a >= b > 0"));
        }
        Ok(Self {
            center,
            semi_major,
            semi_minor,
            orientation: normalize_orientation(orientation),
        })
    }

    fn rotation(&self) -> Matrix2<f64> {
        let (s, c) = self.orientation.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    pub fn point_at(&self, t: f64) -> Vector2<f64> {
        self.center + self.rotation() * Vector2::new(self.semi_major * t.cos(), self.semi_minor * t.sin())
    }

    /// Evenly spaced (in parameter) boundary samples.
    pub fn sample(&self, n: usize) -> Vec<Vector2<f64>> {
        (0..n)
            .map(|k| self.point_at(std::f64::consts::TAU * k as f64 / n as f64))
            .collect()
    }

    /// Orthogonal distance from `p` to the boundary and the closest boundary point.
    pub fn closest_point(&self, p: &Vector2<f64>) -> (f64, Vector2<f64>) {
        let rot = self.rotation();
        let local = rot.transpose() * (p - self.center);
        let (sx, sy) = (local.x.signum(), local.y.signum());
        let (d, q) = closest_point_first_quadrant(self.semi_major, self.semi_minor, local.x.abs(), local.y.abs());
        let q = Vector2::new(sx * q.x, sy * q.y);
        (d, self.center + rot * q)
    }

    pub fn distance(&self, p: &Vector2<f64>) -> f64 {
        self.closest_point(p).0
    }
}

fn normalize_orientation(mut a: f64) -> f64 {
    use std::f64::consts::PI;
    a = a.rem_euclid(PI);
    if a > 0.5 * PI {
        a -= PI;
    }
    a
}

/// Root of the nearest-point equation by bisection; converges to machine
/// precision.
fn bisect_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// Nearest point on the axis-aligned ellipse `(x/e0)² + (y/e1)² = 1`,
/// `e0 ≥ e1`, for a query with `y0, y1 ≥ 0`.
fn closest_point_first_quadrant(e0: f64, e1: f64, y0: f64, y1: f64) -> (f64, Vector2<f64>) {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1).powi(2);
                let sbar = bisect_root(r0, z0, z1, g);
                let x0 = r0 * y0 / (sbar + r0);
                let x1 = y1 / (sbar + 1.0);
                let d = (x0 - y0).hypot(x1 - y1);
                (d, Vector2::new(x0, x1))
            } else {
                (0.0, Vector2::new(y0, y1))
            }
        } else {
            ((y1 - e1).abs(), Vector2::new(0.0, e1))
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            ((x0 - y0).hypot(x1), Vector2::new(x0, x1))
        } else {
            ((y0 - e0).abs(), Vector2::new(e0, 0.0))
        }
    }
}

/// Fitted ellipse with the RMS orthogonal distance of the fitted points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseFit {
    pub ellipse: Ellipse,
    pub rms_distance: f64,
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// RMS orthogonal distance of `points` to `ellipse`.
pub fn rms_distance(ellipse: &Ellipse, points: &[Vector2<f64>]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let sq: Vec<f64> = points.par_iter().map(|p| ellipse.distance(p).powi(2)).collect();
    (pairwise_sum(&sq) / points.len() as f64).sqrt()
}

/// Direct least-squares ellipse fit (ellipse-specific constraint
/// `4AC − B² = 1`), on centred and scaled coordinates.
pub fn fit_ellipse(points: &[Vector2<f64>]) -> Result<EllipseFit> {
    if points.len() < 6 {
        return Err(Error::EllipseFit(format!("need at least 6 points, got {}", points.len())));
    }
    if !points.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
        return Err(Error::input("ellipse points must be finite"));
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vector2::zeros(), |a, p| a + p) / n;
    let spread = (points.iter().map(|p| (p - mean).norm_squared()).sum::<f64>() / n).sqrt();
    if !(spread > 0.0) {
        return Err(Error::EllipseFit("points are coincident".into()));
    }
    let scale = 1.0 / spread;
    let local: Vec<Vector2<f64>> = points.iter().map(|p| (p - mean) * scale).collect();

    let mut s1 = Matrix3::zeros();
    let mut s2 = Matrix3::zeros();
    let mut s3 = Matrix3::zeros();
    for p in &local {
        let d1 = Vector3::new(p.x * p.x, p.x * p.y, p.y * p.y);
        let d2 = Vector3::new(p.x, p.y, 1.0);
        s1 += d1 * d1.transpose();
        s2 += d1 * d2.transpose();
        s3 += d2 * d2.transpose();
    }
    // Collinear input makes the linear scatter matrix singular.
    let s3_sym = s3.symmetric_eigenvalues();
    if s3_sym.min() <= 1e-12 * s3_sym.max() {
        return Err(Error::EllipseFit("points are collinear".into()));
    }
    let s3_inv = s3
        .try_inverse()
        .ok_or_else(|| Error::EllipseFit("singular scatter matrix".into()))?;
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;
    // Premultiply by the inverse of the constraint matrix [[0,0,2],[0,-1,0],[2,0,0]].
    let reduced = Matrix3::from_rows(&[m.row(2) * 0.5, -m.row(1), m.row(0) * 0.5]);

    let mut best: Option<(f64, Vector3<f64>)> = None;
    for ev in reduced.complex_eigenvalues().iter() {
        if ev.im.abs() > 1e-9 * (1.0 + ev.re.abs()) {
            continue;
        }
        let lambda = ev.re;
        let shifted = reduced - Matrix3::identity() * lambda;
        let svd = shifted.svd(false, true);
        let v_t = match svd.v_t {
            Some(v) => v,
            None => continue,
        };
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("3 singular values");
        let a1: Vector3<f64> = v_t.row(imin).transpose();
        let cond = 4.0 * a1[0] * a1[2] - a1[1] * a1[1];
        if cond > 0.0 && best.map_or(true, |(l, _)| lambda < l) {
            best = Some((lambda, a1));
        }
    }
    let (_, a1) = best.ok_or_else(|| Error::EllipseFit("no ellipse-constrained solution; data fit a non-ellipse conic".into()))?;
    let a2 = t * a1;
    let conic = [a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]];
    let local_ellipse = conic_to_ellipse(&conic)?;

    let ellipse = Ellipse::new(
        mean + local_ellipse.center / scale,
        local_ellipse.semi_major / scale,
        local_ellipse.semi_minor / scale,
        local_ellipse.orientation,
    )?;
    Ok(EllipseFit {
        ellipse,
        rms_distance: rms_distance(&ellipse, points),
    })
}

/// Geometric parameters of `A x² + B xy + C y² + D x + E y + F = 0`.
fn conic_to_ellipse(c: &[f64; 6]) -> Result<Ellipse> {
    let [a, b, cc, d, e, f] = *c;
    if b * b - 4.0 * a * cc >= 0.0 {
        return Err(Error::EllipseFit("fitted conic is not an ellipse".into()));
    }
    let lin = Matrix2::new(2.0 * a, b, b, 2.0 * cc);
    let center = lin
        .try_inverse()
        .ok_or_else(|| Error::EllipseFit("degenerate conic".into()))?
        * Vector2::new(-d, -e);
    let f0 = f + 0.5 * (d * center.x + e * center.y);
    let q = Matrix2::new(a, 0.5 * b, 0.5 * b, cc);
    let eig = q.symmetric_eigen();
    let (l0, l1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let ax0 = -f0 / l0;
    let ax1 = -f0 / l1;
    if !(ax0 > 0.0 && ax1 > 0.0) {
        return Err(Error::EllipseFit("imaginary or degenerate ellipse".into()));
    }
    let (major_sq, minor_sq, dir) = if ax0 >= ax1 {
        (ax0, ax1, eig.eigenvectors.column(0).into_owned())
    } else {
        (ax1, ax0, eig.eigenvectors.column(1).into_owned())
    };
    Ellipse::new(center, major_sq.sqrt(), minor_sq.sqrt(), dir.y.atan2(dir.x))
}

// ── Statistics ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceStats {
    /// max |Δy| from the straight tip, m.
    pub max_deflection_y: f64,
    /// max |Δz| from the straight tip, m.
    pub max_deflection_z: f64,
    /// Mean |p − straight tip|, m.
    pub mean_deflection: f64,
}

pub fn workspace_stats(points: &[Vector3<f64>], straight_tip: &Vector3<f64>) -> Result<WorkspaceStats> {
    if points.is_empty() {
        return Err(Error::input("workspace statistics need at least one point"));
    }
    let mut max_y: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    let mut norms = Vec::with_capacity(points.len());
    for p in points {
        let d = p - straight_tip;
        max_y = max_y.max(d.y.abs());
        max_z = max_z.max(d.z.abs());
        norms.push(d.norm());
    }
    Ok(WorkspaceStats {
        max_deflection_y: max_y,
        max_deflection_z: max_z,
        mean_deflection: pairwise_sum(&norms) / points.len() as f64,
    })
}
