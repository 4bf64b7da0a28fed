//! Simulation, calibration and workspace analysis for magnetic continuum
//! robots whose tip carries two independently rotatable, diametrically
//! magnetised ring magnets.
//!
//! The pieces, bottom-up:
//!
//! - [`geomag`]: point-dipole field and gradient, ring-magnet moments, tip wrench.
//! - [`beam`]: small-deflection cantilever mapping a tip wrench to a tip pose.
//! - [`equilibrium`]: fixed-point solve of the coupled model, sweeps, inversion.
//! - [`calibration`]: minimax `(K_E, K_B)` grid search and fit metrics.
//! - [`workspace`]: bi-planar merge, ellipse fitting, deflection statistics.
//! - [`config`], [`io`], [`report`], [`svg`], [`cli`]: file formats and the
//!   `magbeam` command-line front end.
//!
//! Everything inside the numerical core is SI; millimetres and degrees only
//! appear at the file/CLI boundary.

pub mod beam;
pub mod calibration;
pub mod cli;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod geomag;
pub mod io;
pub mod report;
mod simplex;
pub mod svg;
pub mod workspace;

pub use beam::{BeamFormulation, RobotParams, TipPose, Wrench};
pub use calibration::{CalibrationGrid, CalibrationResult, ExperimentRecord, FitMetrics, TipMeasurement};
pub use equilibrium::{EquilibriumResult, MagneticRobot, SolverSettings};
pub use error::{Error, Result};
pub use geomag::{DipoleSource, FieldCalibration, FieldSample, RingMagnet, RingPairConfig};
pub use workspace::{Ellipse, EllipseFit, PlanarTrack, WorkspaceStats};
