//! CSV readers and writers. Files use millimetres and degrees; everything
//! returned or accepted here is SI.
//!
//! Lines starting with `#` are comments.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::calibration::{notch_to_angle, CalibrationResult, ExperimentRecord, NotchTransform, TipMeasurement};
use crate::equilibrium::SweepPoint;
use crate::error::{Error, Result};
use crate::workspace::{CameraPlane, PlanarTrack};

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(r)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))
}

fn csv_err(context: &str, e: csv::Error) -> Error {
    let at = e.position().map(|p| format!(" (line {})", p.line())).unwrap_or_default();
    Error::input(format!("{context}{at}: {e}"))
}

fn deg(v: f64) -> f64 {
    v.to_radians()
}

fn mm(v: f64) -> f64 {
    v * 1e-3
}

// ── Experiment records ─────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
struct ExperimentRow {
    theta1_deg: Option<f64>,
    theta2_deg: Option<f64>,
    x_mm: Option<f64>,
    y_mm: Option<f64>,
    z_mm: Option<f64>,
    #[serde(default)]
    notch_mm: Option<f64>,
}

/// Parse `theta1_deg,theta2_deg,x_mm,y_mm,z_mm[,notch_mm]`.
///
/// An empty `z_mm` makes a top-view record, an empty `y_mm` a side-view
/// one. Missing `theta2_deg` is taken as 0. With `notch` given, `notch_mm`
/// replaces `theta1_deg`.
pub fn read_experiment_csv<R: Read>(input: R, notch: Option<&NotchTransform>) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = reader(input);
    let mut out = Vec::new();
    for (k, row) in rdr.deserialize::<ExperimentRow>().enumerate() {
        let row = row.map_err(|e| csv_err("experiment CSV", e))?;
        let line = k + 2;
        let theta1 = match (notch, row.notch_mm, row.theta1_deg) {
            (Some(t), Some(n), _) => notch_to_angle(mm(n), t),
            (Some(_), None, _) => return Err(Error::input(format!("row {line}: notch transform given but notch_mm is empty"))),
            (None, _, Some(t)) => deg(t),
            (None, _, None) => return Err(Error::input(format!("row {line}: theta1_deg is empty"))),
        };
        let theta2 = row.theta2_deg.map(deg).unwrap_or(0.0);
        let x = row.x_mm.ok_or_else(|| Error::input(format!("row {line}: x_mm is required")))?;
        let tip = match (row.y_mm, row.z_mm) {
            (Some(y), Some(z)) => TipMeasurement::Spatial(Vector3::new(mm(x), mm(y), mm(z))),
            (Some(y), None) => TipMeasurement::Top { x: mm(x), y: mm(y) },
            (None, Some(z)) => TipMeasurement::Side { x: mm(x), z: mm(z) },
            (None, None) => return Err(Error::input(format!("row {line}: need y_mm or z_mm"))),
        };
        out.push(ExperimentRecord::new(theta1, theta2, tip).map_err(|e| Error::input(format!("row {line}: {e}")))?);
    }
    if out.is_empty() {
        return Err(Error::input("experiment CSV contains no records"));
    }
    Ok(out)
}

pub fn read_experiment_file(path: &Path, notch: Option<&NotchTransform>) -> Result<Vec<ExperimentRecord>> {
    read_experiment_csv(open(path)?, notch).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct ExperimentOutRow {
    theta1_deg: f64,
    theta2_deg: f64,
    x_mm: f64,
    y_mm: Option<f64>,
    z_mm: Option<f64>,
}

pub fn write_experiment_csv<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        let o = r.tip.observed() * 1e3;
        let m = r.tip.mask();
        w.serialize(ExperimentOutRow {
            theta1_deg: r.theta1.to_degrees(),
            theta2_deg: r.theta2.to_degrees(),
            x_mm: o.x,
            y_mm: m[1].then_some(o.y),
            z_mm: m[2].then_some(o.z),
        })
        .map_err(|e| csv_err("writing experiment CSV", e))?;
    }
    w.flush().map_err(|e| Error::input(e.to_string()))
}

// ── Sweeps and schedules ───────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    pub x_mm: Option<f64>,
    pub y_mm: Option<f64>,
    pub z_mm: Option<f64>,
    pub converged: bool,
}

impl SweepRow {
    pub fn from_point(p: &SweepPoint) -> Self {
        let tip = p.outcome.as_ref().ok().map(|r| r.tip.position * 1e3);
        Self {
            theta1_deg: p.theta1.to_degrees(),
            theta2_deg: p.theta2.to_degrees(),
            x_mm: tip.map(|t| t.x),
            y_mm: tip.map(|t| t.y),
            z_mm: tip.map(|t| t.z),
            converged: p.converged().is_some(),
        }
    }
}

/// `theta1_deg,theta2_deg,x_mm,y_mm,z_mm,converged`; failed solves leave
/// the coordinates empty.
pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(SweepRow::from_point(p)).map_err(|e| csv_err("writing sweep CSV", e))?;
    }
    w.flush().map_err(|e| Error::input(e.to_string()))
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| csv_err("sweep CSV", e)))
        .collect()
}

#[derive(Debug, Deserialize, Serialize)]
struct ScheduleRow {
    theta1_deg: f64,
    theta2_deg: f64,
}

/// Zipped `(θ₁, θ₂)` schedule from `theta1_deg,theta2_deg` rows, in rad.
pub fn read_schedule_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    let pairs: Vec<(f64, f64)> = reader(input)
        .deserialize::<ScheduleRow>()
        .map(|r| r.map(|r| (deg(r.theta1_deg), deg(r.theta2_deg))).map_err(|e| csv_err("schedule CSV", e)))
        .collect::<Result<_>>()?;
    if pairs.is_empty() {
        return Err(Error::input("schedule CSV contains no rows"));
    }
    Ok(pairs)
}

pub fn read_schedule_file(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_schedule_csv(open(path)?).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

pub fn write_schedule_csv<W: Write>(out: W, pairs: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for &(a, b) in pairs {
        w.serialize(ScheduleRow {
            theta1_deg: a.to_degrees(),
            theta2_deg: b.to_degrees(),
        })
        .map_err(|e| csv_err("writing schedule CSV", e))?;
    }
    w.flush().map_err(|e| Error::input(e.to_string()))
}

// ── Planar tracks ──────────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
struct TrackRow {
    index: u64,
    x_mm: f64,
    #[serde(default)]
    y_mm: Option<f64>,
    #[serde(default)]
    z_mm: Option<f64>,
}

/// Top tracks use `index,x_mm,y_mm`; side tracks `index,x_mm,z_mm`.
pub fn read_track_csv<R: Read>(input: R, plane: CameraPlane) -> Result<PlanarTrack> {
    let mut points = Vec::new();
    let mut indices = Vec::new();
    for row in reader(input).deserialize::<TrackRow>() {
        let row = row.map_err(|e| csv_err("track CSV", e))?;
        let second = match plane {
            CameraPlane::Top => row.y_mm,
            CameraPlane::Side => row.z_mm,
        }
        .ok_or_else(|| Error::input(format!("track row {}: missing {} coordinate", row.index, match plane {
            CameraPlane::Top => "y_mm",
            CameraPlane::Side => "z_mm",
        })))?;
        points.push(Vector2::new(mm(row.x_mm), mm(second)));
        indices.push(row.index);
    }
    if points.is_empty() {
        return Err(Error::input("track CSV contains no rows"));
    }
    PlanarTrack::new(plane, points, indices)
}

pub fn read_track_file(path: &Path, plane: CameraPlane) -> Result<PlanarTrack> {
    read_track_csv(open(path)?, plane).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

pub fn write_track_csv<W: Write>(out: W, track: &PlanarTrack) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let second = match track.plane {
        CameraPlane::Top => "y_mm",
        CameraPlane::Side => "z_mm",
    };
    w.write_record(["index", "x_mm", second]).map_err(|e| csv_err("writing track CSV", e))?;
    for (i, p) in track.indices.iter().zip(&track.points) {
        w.write_record([i.to_string(), (p.x * 1e3).to_string(), (p.y * 1e3).to_string()])
            .map_err(|e| csv_err("writing track CSV", e))?;
    }
    w.flush().map_err(|e| Error::input(e.to_string()))
}

// ── Calibration surface ────────────────────────────────────────────────────

/// `ke,kb,max_error_mm` rows; infeasible cells are written as `inf`.
pub fn write_surface_csv<W: Write>(out: W, result: &CalibrationResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ke", "kb", "max_error_mm"]).map_err(|e| csv_err("writing surface CSV", e))?;
    for (i, ke) in result.grid.ke_values.iter().enumerate() {
        for (j, kb) in result.grid.kb_values.iter().enumerate() {
            w.write_record([ke.to_string(), kb.to_string(), (result.cell(i, j) * 1e3).to_string()])
                .map_err(|e| csv_err("writing surface CSV", e))?;
        }
    }
    w.flush().map_err(|e| Error::input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn planar_and_spatial_rows() {
        let text = "theta1_deg,theta2_deg,x_mm,y_mm,z_mm\n# comment\n12,0,149.5,-3.2,\n24,,149.0,,4.0\n36,10,148,1,2\n";
        let recs = read_experiment_csv(text.as_bytes(), None).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(matches!(recs[0].tip, TipMeasurement::Top { .. }));
        assert_relative_eq!(recs[0].theta1, 12f64.to_radians());
        assert_relative_eq!(recs[0].tip.observed().y, -3.2e-3, max_relative = 1e-12);
        assert!(matches!(recs[1].tip, TipMeasurement::Side { .. }));
        assert_eq!(recs[1].theta2, 0.0);
        assert!(matches!(recs[2].tip, TipMeasurement::Spatial(_)));
    }

    #[test]
    fn notch_column_replaces_theta1() {
        let text = "theta1_deg,theta2_deg,x_mm,y_mm,z_mm,notch_mm\n,0,150,0,,4\n";
        let t = NotchTransform::from_deg_per_mm(8.2, 3.0);
        let recs = read_experiment_csv(text.as_bytes(), Some(&t)).unwrap();
        assert_relative_eq!(recs[0].theta1.to_degrees(), 8.2, max_relative = 1e-12);
        assert!(read_experiment_csv(text.as_bytes(), None).is_err());
    }

    #[test]
    fn empty_and_malformed() {
        assert!(read_experiment_csv("theta1_deg,theta2_deg,x_mm,y_mm,z_mm\n".as_bytes(), None).is_err());
        assert!(read_experiment_csv("".as_bytes(), None).is_err());
        assert!(read_experiment_csv("theta1_deg,theta2_deg,x_mm,y_mm,z_mm\nabc,0,1,2,3\n".as_bytes(), None).is_err());
        assert!(read_experiment_csv("theta1_deg,theta2_deg,x_mm,y_mm,z_mm\n0,0,1,,\n".as_bytes(), None).is_err());
    }

    #[test]
    fn tracks() {
        let top = read_track_csv("index,x_mm,y_mm\n0,150,1\n1,149,2\n".as_bytes(), CameraPlane::Top).unwrap();
        assert_eq!(top.indices, vec![0, 1]);
        assert_relative_eq!(top.points[1].y, 2e-3, max_relative = 1e-12);
        assert!(read_track_csv("index,x_mm,y_mm\n0,150,1\n".as_bytes(), CameraPlane::Side).is_err());
        assert!(read_track_csv("index,x_mm,y_mm\n1,150,1\n0,149,2\n".as_bytes(), CameraPlane::Top).is_err());
    }
}
