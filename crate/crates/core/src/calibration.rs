//! Minimax fit of `(K_E, K_B)` to tracked tip positions, and fit statistics.

use log::debug;
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::TipPose;
use crate::equilibrium::{solve_tip_pose, MagneticRobot, SolverSettings};
use crate::error::{Error, Result};

/// A tracked tip position, possibly seen from a single camera plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TipMeasurement {
    /// Top view: x and y known.
    Top { x: f64, y: f64 },
    /// Side view: x and z known.
    Side { x: f64, z: f64 },
    Spatial(Vector3<f64>),
}

impl TipMeasurement {
    /// Which of x, y, z were observed.
    pub fn mask(&self) -> [bool; 3] {
        match self {
            TipMeasurement::Top { .. } => [true, true, false],
            TipMeasurement::Side { .. } => [true, false, true],
            TipMeasurement::Spatial(_) => [true; 3],
        }
    }

    /// Observed coordinates with unobserved ones set to zero.
    pub fn observed(&self) -> Vector3<f64> {
        match *self {
            TipMeasurement::Top { x, y } => Vector3::new(x, y, 0.0),
            TipMeasurement::Side { x, z } => Vector3::new(x, 0.0, z),
            TipMeasurement::Spatial(p) => p,
        }
    }

    /// Projection of `p` onto the measurement plane (unobserved axes zeroed).
    pub fn project(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let m = self.mask();
        Vector3::new(
            if m[0] { p.x } else { 0.0 },
            if m[1] { p.y } else { 0.0 },
            if m[2] { p.z } else { 0.0 },
        )
    }

    /// In-plane Euclidean distance between this measurement and `p`.
    pub fn distance_to(&self, p: &Vector3<f64>) -> f64 {
        (self.observed() - self.project(p)).norm()
    }

    fn is_finite(&self) -> bool {
        self.observed().iter().all(|c| c.is_finite())
    }
}

/// One tracked configuration: measured magnet angles and tip position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// Measured θ̂₁, rad.
    pub theta1: f64,
    /// Measured θ̂₂, rad.
    pub theta2: f64,
    /// Tip position in the robot base frame, m.
    pub tip: TipMeasurement,
}

impl ExperimentRecord {
    pub fn new(theta1: f64, theta2: f64, tip: TipMeasurement) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite()) {
            return Err(Error::input("record angles must be finite"));
        }
        if !tip.is_finite() {
            return Err(Error::input("record tip coordinates must be finite"));
        }
        Ok(Self { theta1, theta2, tip })
    }
}

/// Error statistics of a set of predictions, all in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    /// Population standard deviation of the per-record errors.
    pub std_error: f64,
    /// Coefficient of determination over the stacked observed coordinates,
    /// each coordinate centred on its own mean. NaN when the measurements
    /// have no spread but the predictions miss them.
    pub r_squared: f64,
}

/// Per-record in-plane errors.
pub fn record_errors(records: &[ExperimentRecord], predictions: &[TipPose]) -> Result<Vec<f64>> {
    if records.len() != predictions.len() {
        return Err(Error::input(format!(
            "{} records but {} predictions",
            records.len(),
            predictions.len()
        )));
    }
    Ok(records
        .iter()
        .zip(predictions)
        .map(|(r, p)| r.tip.distance_to(&p.position))
        .collect())
}

pub fn evaluate_metrics(records: &[ExperimentRecord], predictions: &[TipPose]) -> Result<FitMetrics> {
    let errors = record_errors(records, predictions)?;
    if errors.len() < 2 {
        return Err(Error::input("metrics need at least 2 records"));
    }
    let n = errors.len() as f64;
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    let mean_abs_error = errors.iter().sum::<f64>() / n;
    let std_error = (errors.iter().map(|e| (e - mean_abs_error).powi(2)).sum::<f64>() / n).sqrt();

    // Deflection components relative to any common baseline share the same
    // per-axis centring, so the baseline drops out of both sums.
    let mut sums = [0.0; 3];
    let mut counts = [0usize; 3];
    for r in records {
        let obs = r.tip.observed();
        for (axis, seen) in r.tip.mask().iter().enumerate() {
            if *seen {
                sums[axis] += obs[axis];
                counts[axis] += 1;
            }
        }
    }
    let means: [f64; 3] = std::array::from_fn(|i| if counts[i] > 0 { sums[i] / counts[i] as f64 } else { 0.0 });
    let mut ss_tot = 0.0;
    let mut ss_res = 0.0;
    for (r, p) in records.iter().zip(predictions) {
        let obs = r.tip.observed();
        for (axis, seen) in r.tip.mask().iter().enumerate() {
            if *seen {
                ss_tot += (obs[axis] - means[axis]).powi(2);
                ss_res += (obs[axis] - p.position[axis]).powi(2);
            }
        }
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NAN
    };

    Ok(FitMetrics {
        max_abs_error,
        mean_abs_error,
        std_error,
        r_squared,
    })
}

// ── Grid search ────────────────────────────────────────────────────────────

/// Axes of the `(K_E, K_B)` search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationGrid {
    pub ke_values: Vec<f64>,
    pub kb_values: Vec<f64>,
}

/// Default number of samples per axis.
pub const DEFAULT_GRID_POINTS: usize = 25;
pub const DEFAULT_KE_RANGE: (f64, f64) = (0.009, 0.018);
pub const DEFAULT_KB_RANGE: (f64, f64) = (3.5, 4.5);

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
        }
    }
}

impl CalibrationGrid {
    pub fn new(ke_values: Vec<f64>, kb_values: Vec<f64>) -> Result<Self> {
        let g = Self { ke_values, kb_values };
        g.validate()?;
        Ok(g)
    }

    pub fn from_ranges(ke: (f64, f64, usize), kb: (f64, f64, usize)) -> Result<Self> {
        Self::new(linspace(ke.0, ke.1, ke.2), linspace(kb.0, kb.1, kb.2))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("K_E", &self.ke_values), ("K_B", &self.kb_values)] {
            if axis.is_empty() {
                return Err(Error::input(format!("{name} axis is empty")));
            }
            if !axis.iter().all(|v| v.is_finite() && *v > 0.0) {
                return Err(Error::input(format!("{name} values must be positive and finite")));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::input(format!("{name} values must be strictly increasing")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ke_values.len() * self.kb_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        Self {
            ke_values: linspace(DEFAULT_KE_RANGE.0, DEFAULT_KE_RANGE.1, DEFAULT_GRID_POINTS),
            kb_values: linspace(DEFAULT_KB_RANGE.0, DEFAULT_KB_RANGE.1, DEFAULT_GRID_POINTS),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub ke_star: f64,
    pub kb_star: f64,
    pub ke_index: usize,
    pub kb_index: usize,
    pub grid: CalibrationGrid,
    /// Max in-plane error per cell, m; row-major with `K_E` rows and `K_B`
    /// columns. Infeasible cells hold +∞.
    pub error_surface: Vec<f64>,
    pub metrics_at_optimum: FitMetrics,
    pub predictions_at_optimum: Vec<TipPose>,
}

impl CalibrationResult {
    pub fn cell(&self, ke_index: usize, kb_index: usize) -> f64 {
        self.error_surface[ke_index * self.grid.kb_values.len() + kb_index]
    }
}

/// Forward-model predictions for every record, each solved from the
/// settings' initial tip. `None` if any solve fails or does not converge.
pub fn predict_records(
    robot: &MagneticRobot,
    records: &[ExperimentRecord],
    settings: &SolverSettings,
) -> Option<Vec<TipPose>> {
    records
        .iter()
        .map(|r| match solve_tip_pose(&robot.with_angles(r.theta1, r.theta2), settings) {
            Ok(res) if res.converged => Some(res.tip),
            Ok(_) => None,
            Err(e) => {
                debug!("forward solve failed at ({}, {}): {e}", r.theta1, r.theta2);
                None
            }
        })
        .collect()
}

fn cell_score(robot: &MagneticRobot, records: &[ExperimentRecord], settings: &SolverSettings) -> f64 {
    let mut worst: f64 = 0.0;
    for r in records {
        match solve_tip_pose(&robot.with_angles(r.theta1, r.theta2), settings) {
            Ok(res) if res.converged => worst = worst.max(r.tip.distance_to(&res.tip.position)),
            _ => return f64::INFINITY,
        }
    }
    worst
}

/// Exhaustive search for the `(K_E, K_B)` cell minimising the maximum
/// in-plane tip error. Ties go to the smallest `(K_E, K_B)`.
pub fn grid_search_calibrate(
    records: &[ExperimentRecord],
    robot: &MagneticRobot,
    grid: &CalibrationGrid,
    settings: &SolverSettings,
) -> Result<CalibrationResult> {
    if records.is_empty() {
        return Err(Error::input("calibration needs at least one record"));
    }
    grid.validate()?;
    settings.validate()?;
    let n_kb = grid.kb_values.len();

    let surface: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|cell| {
            let ke = grid.ke_values[cell / n_kb];
            let kb = grid.kb_values[cell % n_kb];
            match robot.with_scales(ke, kb) {
                Ok(r) => cell_score(&r, records, settings),
                Err(_) => f64::INFINITY,
            }
        })
        .collect();

    let best = surface
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Calibration("every grid cell was infeasible".into()))?;

    let (ke_index, kb_index) = (best / n_kb, best % n_kb);
    let ke_star = grid.ke_values[ke_index];
    let kb_star = grid.kb_values[kb_index];
    let optimum = robot.with_scales(ke_star, kb_star)?;
    let predictions = predict_records(&optimum, records, settings)
        .ok_or_else(|| Error::Calibration("optimum cell failed to re-solve".into()))?;
    let metrics_at_optimum = if records.len() >= 2 {
        evaluate_metrics(records, &predictions)?
    } else {
        let e = records[0].tip.distance_to(&predictions[0].position);
        FitMetrics {
            max_abs_error: e,
            mean_abs_error: e,
            std_error: 0.0,
            r_squared: f64::NAN,
        }
    };

    Ok(CalibrationResult {
        ke_star,
        kb_star,
        ke_index,
        kb_index,
        grid: grid.clone(),
        error_surface: surface,
        metrics_at_optimum,
        predictions_at_optimum: predictions,
    })
}

// ── Notch transform ────────────────────────────────────────────────────────

/// Linear map from notch position to magnet rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotchTransform {
    /// rad/m.
    pub slope: f64,
    /// Notch position of zero rotation, m.
    pub offset: f64,
}

impl NotchTransform {
    /// Build from the usual lab units, degrees per millimetre and millimetres.
    pub fn from_deg_per_mm(slope_deg_per_mm: f64, offset_mm: f64) -> Self {
        Self {
            slope: slope_deg_per_mm.to_radians() * 1e3,
            offset: offset_mm * 1e-3,
        }
    }
}

pub fn notch_to_angle(notch_position: f64, transform: &NotchTransform) -> f64 {
    transform.slope * (notch_position - transform.offset)
}
