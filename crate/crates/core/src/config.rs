//! JSON robot configuration, in lab units (mm, MPa, T), converted to SI on load.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beam::{section_moment_tube, BeamFormulation, RobotParams};
use crate::equilibrium::{MagneticRobot, SolverSettings};
use crate::geomag::{magnet_moment_from_geometry, DipoleSource, FieldCalibration, RingPairConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    pub length_mm: f64,
    pub elastic_modulus_mpa: f64,
    pub tube_od_mm: f64,
    pub tube_id_mm: f64,
    pub ke: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TipMagnetSection {
    pub od_mm: f64,
    pub id_mm: f64,
    pub length_mm: f64,
    pub remanence_t: f64,
    pub separation_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalMagnetSection {
    pub diameter_mm: f64,
    pub length_mm: f64,
    pub remanence_t: f64,
    pub position_mm: [f64; 3],
    /// Normalised on load.
    pub moment_direction: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tolerance_mm: f64,
    pub max_iterations: usize,
    pub relaxation: f64,
}

/// On-disk robot description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfigFile {
    pub robot: RobotSection,
    pub tip_magnets: TipMagnetSection,
    pub external_magnet: ExternalMagnetSection,
    pub solver: SolverSection,
    pub beam_mode: BeamFormulation,
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            field,
            message: format!("must be positive, got {v}"),
        })
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            field,
            message: format!("must be non-negative, got {v}"),
        })
    }
}

impl RobotConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parse and validate; `origin` only labels diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut cfg: RobotConfigFile = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        let d = Vector3::from(cfg.external_magnet.moment_direction).normalize();
        cfg.external_magnet.moment_direction = [d.x, d.y, d.z];
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.robot;
        positive("robot.length_mm", r.length_mm)?;
        positive("robot.elastic_modulus_mpa", r.elastic_modulus_mpa)?;
        positive("robot.tube_od_mm", r.tube_od_mm)?;
        non_negative("robot.tube_id_mm", r.tube_id_mm)?;
        if r.tube_id_mm >= r.tube_od_mm {
            return Err(ConfigError::Invalid {
                field: "robot.tube_id_mm",
                message: "must be smaller than tube_od_mm".into(),
            });
        }
        positive("robot.ke", r.ke)?;

        let t = &self.tip_magnets;
        positive("tip_magnets.od_mm", t.od_mm)?;
        non_negative("tip_magnets.id_mm", t.id_mm)?;
        if t.id_mm >= t.od_mm {
            return Err(ConfigError::Invalid {
                field: "tip_magnets.id_mm",
                message: "must be smaller than od_mm".into(),
            });
        }
        positive("tip_magnets.length_mm", t.length_mm)?;
        non_negative("tip_magnets.remanence_t", t.remanence_t)?;
        non_negative("tip_magnets.separation_mm", t.separation_mm)?;

        let e = &self.external_magnet;
        positive("external_magnet.diameter_mm", e.diameter_mm)?;
        positive("external_magnet.length_mm", e.length_mm)?;
        non_negative("external_magnet.remanence_t", e.remanence_t)?;
        if !e.position_mm.iter().all(|c| c.is_finite()) {
            return Err(ConfigError::Invalid {
                field: "external_magnet.position_mm",
                message: "must be finite".into(),
            });
        }
        let dir = Vector3::from(e.moment_direction);
        if !(dir.iter().all(|c| c.is_finite()) && dir.norm() > 0.0) {
            return Err(ConfigError::Invalid {
                field: "external_magnet.moment_direction",
                message: "must be a finite nonzero vector".into(),
            });
        }

        let s = &self.solver;
        positive("solver.tolerance_mm", s.tolerance_mm)?;
        if s.max_iterations == 0 {
            return Err(ConfigError::Invalid {
                field: "solver.max_iterations",
                message: "must be at least 1".into(),
            });
        }
        if !(s.relaxation > 0.0 && s.relaxation <= 1.0) {
            return Err(ConfigError::Invalid {
                field: "solver.relaxation",
                message: format!("must lie in (0, 1], got {}", s.relaxation),
            });
        }
        Ok(())
    }

    pub fn robot_params(&self) -> Result<RobotParams, ConfigError> {
        let r = &self.robot;
        let invalid = |e: crate::Error| ConfigError::Invalid {
            field: "robot",
            message: e.to_string(),
        };
        let i = section_moment_tube(r.tube_od_mm * 1e-3, r.tube_id_mm * 1e-3).map_err(invalid)?;
        RobotParams::new(r.length_mm * 1e-3, r.elastic_modulus_mpa * 1e6, i, Vector3::zeros(), r.ke).map_err(invalid)
    }

    /// Forward model with the given field calibration and, optionally,
    /// overridden `K_E` and beam mode. Magnet angles start at zero.
    pub fn build_robot(
        &self,
        k_b: f64,
        ke_override: Option<f64>,
        mode_override: Option<BeamFormulation>,
    ) -> Result<MagneticRobot, ConfigError> {
        let mut params = self.robot_params()?;
        if let Some(ke) = ke_override {
            positive("ke", ke)?;
            params.stiffness_scale = ke;
        }
        let t = &self.tip_magnets;
        let tip_moment = magnet_moment_from_geometry(t.od_mm * 1e-3, t.id_mm * 1e-3, t.length_mm * 1e-3, t.remanence_t)
            .map_err(|e| ConfigError::Invalid {
                field: "tip_magnets",
                message: e.to_string(),
            })?;
        let pair = RingPairConfig::new(tip_moment, tip_moment, t.separation_mm * 1e-3, 0.0, 0.0).map_err(|e| {
            ConfigError::Invalid {
                field: "tip_magnets",
                message: e.to_string(),
            }
        })?;

        let e = &self.external_magnet;
        let ext_moment = magnet_moment_from_geometry(e.diameter_mm * 1e-3, 0.0, e.length_mm * 1e-3, e.remanence_t)
            .map_err(|err| ConfigError::Invalid {
                field: "external_magnet",
                message: err.to_string(),
            })?;
        let dir = Vector3::from(e.moment_direction).normalize();
        let source = DipoleSource::new(dir * ext_moment, Vector3::from(e.position_mm) * 1e-3).map_err(|err| {
            ConfigError::Invalid {
                field: "external_magnet",
                message: err.to_string(),
            }
        })?;
        let calibration = FieldCalibration::new(k_b).map_err(|err| ConfigError::Invalid {
            field: "kb",
            message: err.to_string(),
        })?;

        Ok(MagneticRobot {
            params,
            pair,
            source,
            calibration,
            mode: mode_override.unwrap_or(self.beam_mode),
        })
    }

    pub fn solver_settings(&self, params: &RobotParams) -> SolverSettings {
        SolverSettings {
            position_tolerance: self.solver.tolerance_mm * 1e-3,
            max_iterations: self.solver.max_iterations,
            relaxation: self.solver.relaxation,
            initial_tip: params.straight_tip(),
        }
    }
}

/// The benchtop demonstrator: 150 mm PTFE tube, two 4/2/0.5 mm N52 rings
/// at zero separation, and a 76.2 × 38.1 mm N52 cylinder 80 mm past the tip
/// with its moment pointing back along −x.
pub const PAPER_DEMONSTRATOR_JSON: &str = include_str!("../data/paper-demonstrator.json");

pub fn paper_demonstrator() -> RobotConfigFile {
    RobotConfigFile::parse(PAPER_DEMONSTRATOR_JSON, "paper-demonstrator.json").expect("bundled config is valid")
}
