//! JSON run reports. Field names carry their units; values are in mm and
//! degrees like the CSV files.

use serde::{Deserialize, Serialize};

use crate::beam::BeamFormulation;
use crate::calibration::{CalibrationResult, ExperimentRecord, FitMetrics};
use crate::config::RobotConfigFile;
use crate::equilibrium::EquilibriumResult;
use crate::io::SweepRow;
use crate::workspace::{Ellipse, EllipseFit, WorkspaceStats};
use crate::TipPose;

/// Definition of `r_squared` embedded in every report that carries one.
pub const R_SQUARED_DEFINITION: &str =
    "1 - SS_res/SS_tot over the stacked observed tip coordinates, each component taken about its own mean";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

impl Default for Software {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Everything that determined a run, minus timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub config_source: String,
    pub config: RobotConfigFile,
    pub ke: f64,
    pub kb: f64,
    pub beam_mode: BeamFormulation,
    /// Subcommand-specific arguments, as given.
    pub arguments: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport<T> {
    pub software: Software,
    pub command: String,
    pub inputs: Inputs,
    #[serde(flatten)]
    pub results: T,
    pub wall_time_s: f64,
}

fn mm3(v: &nalgebra::Vector3<f64>) -> [f64; 3] {
    [v.x * 1e3, v.y * 1e3, v.z * 1e3]
}

// ── simulate ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResults {
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    pub tip_position_mm: [f64; 3],
    pub tip_tangent: [f64; 3],
    pub deflection_mm: f64,
    pub iterations: usize,
    pub residual_mm: f64,
    pub converged: bool,
}

impl SimulateResults {
    pub fn new(theta1: f64, theta2: f64, result: &EquilibriumResult, straight_tip: &nalgebra::Vector3<f64>) -> Self {
        let t = result.tip.tangent;
        Self {
            theta1_deg: theta1.to_degrees(),
            theta2_deg: theta2.to_degrees(),
            tip_position_mm: mm3(&result.tip.position),
            tip_tangent: [t.x, t.y, t.z],
            deflection_mm: (result.tip.position - straight_tip).norm() * 1e3,
            iterations: result.iterations,
            residual_mm: result.residual * 1e3,
            converged: result.converged,
        }
    }
}

// ── sweep ──────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResults {
    pub points: Vec<SweepRow>,
    pub converged_count: usize,
    pub failed_count: usize,
    /// Largest distance from the straight tip among converged points.
    pub max_deflection_mm: Option<f64>,
}

impl SweepResults {
    pub fn new(points: Vec<SweepRow>, straight_tip: &nalgebra::Vector3<f64>) -> Self {
        let s = straight_tip * 1e3;
        let max = points
            .iter()
            .filter(|p| p.converged)
            .filter_map(|p| Some(nalgebra::Vector3::new(p.x_mm?, p.y_mm?, p.z_mm?)))
            .map(|p| (p - s).norm())
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
        let converged_count = points.iter().filter(|p| p.converged).count();
        Self {
            failed_count: points.len() - converged_count,
            converged_count,
            max_deflection_mm: max,
            points,
        }
    }
}

// ── calibrate / validate ───────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub max_abs_error_mm: f64,
    pub mean_abs_error_mm: f64,
    pub std_error_mm: f64,
    /// `null` when undefined (constant observations with nonzero residual).
    pub r_squared: Option<f64>,
    pub r_squared_definition: String,
}

impl From<&FitMetrics> for MetricsReport {
    fn from(m: &FitMetrics) -> Self {
        Self {
            max_abs_error_mm: m.max_abs_error * 1e3,
            mean_abs_error_mm: m.mean_abs_error * 1e3,
            std_error_mm: m.std_error * 1e3,
            r_squared: m.r_squared.is_finite().then_some(m.r_squared),
            r_squared_definition: R_SQUARED_DEFINITION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub ke_values: Vec<f64>,
    pub kb_values: Vec<f64>,
    /// Row-major, one row per `ke` value; `null` marks infeasible cells.
    pub surface_mm: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub ke_star: f64,
    pub kb_star: f64,
    pub ke_index: usize,
    pub kb_index: usize,
    pub metrics: MetricsReport,
    pub grid: GridReport,
}

impl From<&CalibrationResult> for CalibrationReport {
    fn from(r: &CalibrationResult) -> Self {
        Self {
            ke_star: r.ke_star,
            kb_star: r.kb_star,
            ke_index: r.ke_index,
            kb_index: r.kb_index,
            metrics: (&r.metrics_at_optimum).into(),
            grid: GridReport {
                ke_values: r.grid.ke_values.clone(),
                kb_values: r.grid.kb_values.clone(),
                surface_mm: r
                    .error_surface
                    .iter()
                    .map(|v| v.is_finite().then_some(v * 1e3))
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordComparison {
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    /// Unobserved components are `null`.
    pub measured_mm: [Option<f64>; 3],
    pub predicted_mm: [f64; 3],
    pub error_mm: f64,
}

impl RecordComparison {
    pub fn new(record: &ExperimentRecord, predicted: &TipPose) -> Self {
        let o = record.tip.observed() * 1e3;
        let m = record.tip.mask();
        Self {
            theta1_deg: record.theta1.to_degrees(),
            theta2_deg: record.theta2.to_degrees(),
            measured_mm: [m[0].then_some(o.x), m[1].then_some(o.y), m[2].then_some(o.z)],
            predicted_mm: mm3(&predicted.position),
            error_mm: record.tip.distance_to(&predicted.position) * 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records: Vec<RecordComparison>,
    pub metrics: MetricsReport,
}

// ── workspace ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseReport {
    pub center_y_mm: f64,
    pub center_z_mm: f64,
    pub semi_major_mm: f64,
    pub semi_minor_mm: f64,
    pub orientation_deg: f64,
}

impl From<&Ellipse> for EllipseReport {
    fn from(e: &Ellipse) -> Self {
        Self {
            center_y_mm: e.center.x * 1e3,
            center_z_mm: e.center.y * 1e3,
            semi_major_mm: e.semi_major * 1e3,
            semi_minor_mm: e.semi_minor * 1e3,
            orientation_deg: e.orientation.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceReport {
    /// `schedule` for model-generated points, `biplanar` for merged tracks.
    pub source: String,
    pub points_mm: Vec<[f64; 3]>,
    /// Frame indices whose two views disagreed on x beyond tolerance.
    pub flagged_indices: Vec<u64>,
    /// Schedule entries whose solve failed.
    pub failed_points: usize,
    pub ellipse: EllipseReport,
    pub rms_distance_mm: f64,
    pub max_deflection_y_mm: f64,
    pub max_deflection_z_mm: f64,
    pub mean_deflection_mm: f64,
}

impl WorkspaceReport {
    pub fn new(
        source: &str,
        points: &[nalgebra::Vector3<f64>],
        flagged_indices: Vec<u64>,
        failed_points: usize,
        fit: &EllipseFit,
        stats: &WorkspaceStats,
    ) -> Self {
        Self {
            source: source.to_string(),
            points_mm: points.iter().map(mm3).collect(),
            flagged_indices,
            failed_points,
            ellipse: (&fit.ellipse).into(),
            rms_distance_mm: fit.rms_distance * 1e3,
            max_deflection_y_mm: stats.max_deflection_y * 1e3,
            max_deflection_z_mm: stats.max_deflection_z * 1e3,
            mean_deflection_mm: stats.mean_deflection * 1e3,
        }
    }
}
