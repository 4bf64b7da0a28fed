//! Small-deflection cantilever mechanics.
//!
//! The robot is clamped at `base_position` with its unloaded tangent along
//! `e₁` and loaded by a force `f` and torque `τ` at the tip. The bending
//! moment is `M(s) = τ + (L − s) e₁ × f` and the curvature `κ = M / (K_E·E·I)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric and elastic parameters of the robot body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Length `L`, m.
    pub length: f64,
    /// Nominal elastic modulus `E`, Pa.
    pub elastic_modulus: f64,
    /// Second moment of area `I`, m⁴.
    pub section_moment: f64,
    /// Clamped base `p₀`, m.
    pub base_position: Vector3<f64>,
    /// Dimensionless `K_E` applied to `E`.
    pub stiffness_scale: f64,
}

impl RobotParams {
    pub fn new(
        length: f64,
        elastic_modulus: f64,
        section_moment: f64,
        base_position: Vector3<f64>,
        stiffness_scale: f64,
    ) -> Result<Self> {
        let p = Self {
            length,
            elastic_modulus,
            section_moment,
            base_position,
            stiffness_scale,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.length) {
            return Err(Error::contract(format!("length must be positive, got {}", self.length)));
        }
        if !positive(self.elastic_modulus) {
            return Err(Error::contract("elastic modulus must be positive"));
        }
        if !positive(self.section_moment) {
            return Err(Error::contract("section moment must be positive"));
        }
        if !positive(self.stiffness_scale) {
            return Err(Error::contract("stiffness scale K_E must be positive"));
        }
        if !self.base_position.iter().all(|c| c.is_finite()) {
            return Err(Error::contract("base position must be finite"));
        }
        Ok(())
    }

    /// `K_E·E·I`, the only bending stiffness used anywhere.
    pub fn bending_stiffness(&self) -> f64 {
        self.stiffness_scale * self.elastic_modulus * self.section_moment
    }

    /// Tip position of the unloaded (straight) robot.
    pub fn straight_tip(&self) -> Vector3<f64> {
        self.base_position + Vector3::x() * self.length
    }

    pub fn with_stiffness_scale(&self, k_e: f64) -> Self {
        Self {
            stiffness_scale: k_e,
            ..*self
        }
    }
}

/// Force/torque applied at the tip.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    /// N.
    pub force: Vector3<f64>,
    /// N·m.
    pub torque: Vector3<f64>,
}

impl Wrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|c| c.is_finite())
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench {
            force: self.force + rhs.force,
            torque: self.torque + rhs.torque,
        }
    }
}

impl std::ops::Mul<f64> for Wrench {
    type Output = Wrench;
    fn mul(self, s: f64) -> Wrench {
        Wrench {
            force: self.force * s,
            torque: self.torque * s,
        }
    }
}

/// Tip position and unit tangent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipPose {
    pub position: Vector3<f64>,
    pub tangent: Vector3<f64>,
}

impl TipPose {
    pub fn straight(base: &Vector3<f64>, length: f64) -> Self {
        Self {
            position: base + Vector3::x() * length,
            tangent: Vector3::x(),
        }
    }
}

/// Which force coefficient the tip-position formula uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamFormulation {
    /// `L³/3` force term, from integrating the curvature twice.
    #[default]
    Corrected,
    /// `L³/6` force term as typeset in the original model, kept for
    /// reproducing calibration runs made with it.
    PaperLiteral,
}

impl BeamFormulation {
    fn force_coefficient(self) -> f64 {
        match self {
            BeamFormulation::Corrected => 1.0 / 3.0,
            BeamFormulation::PaperLiteral => 1.0 / 6.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BeamFormulation::Corrected => "corrected",
            BeamFormulation::PaperLiteral => "paper_literal",
        }
    }
}

impl fmt::Display for BeamFormulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BeamFormulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(BeamFormulation::Corrected),
            "paper_literal" => Ok(BeamFormulation::PaperLiteral),
            other => Err(Error::input(format!(
                "unknown beam mode '{other}' (expected 'corrected' or 'paper_literal')"
            ))),
        }
    }
}

/// Tip pose of the cantilever under a tip wrench.
///
/// The tangent is renormalised; the linearised slope alone is not unit length.
pub fn tip_pose_from_wrench(params: &RobotParams, w: &Wrench, mode: BeamFormulation) -> Result<TipPose> {
    let k = params.bending_stiffness();
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::contract("bending stiffness must be positive"));
    }
    let l = params.length;
    let e1 = Vector3::x();
    let f_perp = e1.cross(&w.force).cross(&e1);

    let position = params.base_position
        + e1 * l
        + (w.torque.cross(&e1) * (0.5 * l * l) + f_perp * (mode.force_coefficient() * l * l * l)) / k;

    let slope = (w.torque + e1.cross(&w.force) * (0.5 * l)).cross(&e1) * (l / k);
    let tangent = (e1 + slope).normalize();

    Ok(TipPose { position, tangent })
}

/// Centreline sampled at `n_samples` equally spaced arclengths `0..=L`.
///
/// Integrates `t(s) = e₁ + ∫κ×e₁` and `p(s) = p₀ + ∫t` with the composite
/// trapezoid rule.
pub fn centerline(params: &RobotParams, w: &Wrench, n_samples: usize) -> Result<Vec<Vector3<f64>>> {
    if n_samples < 2 {
        return Err(Error::contract("centerline needs at least 2 samples"));
    }
    params.validate()?;
    let k = params.bending_stiffness();
    let l = params.length;
    let e1 = Vector3::x();
    let h = l / (n_samples - 1) as f64;
    let e1xf = e1.cross(&w.force);
    let dtds = |s: f64| ((w.torque + e1xf * (l - s)) / k).cross(&e1);

    let mut points = Vec::with_capacity(n_samples);
    let mut p = params.base_position;
    let mut t = e1;
    let mut prev_rate = dtds(0.0);
    points.push(p);
    for i in 1..n_samples {
        let s = i as f64 * h;
        let rate = dtds(s);
        let t_next = t + (prev_rate + rate) * (0.5 * h);
        p += (t + t_next) * (0.5 * h);
        points.push(p);
        t = t_next;
        prev_rate = rate;
    }
    Ok(points)
}

/// Second moment of area `π/64·(OD⁴ − ID⁴)` of a circular tube.
pub fn section_moment_tube(outer_diameter: f64, inner_diameter: f64) -> Result<f64> {
    if !(inner_diameter >= 0.0 && outer_diameter > inner_diameter && outer_diameter.is_finite()) {
        return Err(Error::contract(format!(
            "tube requires OD > ID >= 0, got OD {outer_diameter}, ID {inner_diameter}"
        )));
    }
    Ok(std::f64::consts::PI / 64.0 * (outer_diameter.powi(4) - inner_diameter.powi(4)))
}
