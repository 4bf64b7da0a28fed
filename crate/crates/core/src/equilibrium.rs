//! Steady-state tip pose under magnetic load, sweeps over magnet rotations,
//! and numerical inversion of the rotation → position map.
//!
//! The equilibrium is the fixed point of
//! `g(p, n) = beam(tip_wrench(p, n))`, iterated with under-relaxation
//! `p ← (1 − λ) p + λ g(p)`. The tangent fed into the wrench at step `k` is
//! the (normalised) beam tangent from step `k − 1`.

use std::f64::consts::TAU;

use log::{debug, warn};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{tip_pose_from_wrench, BeamFormulation, RobotParams, TipPose, Wrench};
use crate::error::{Error, Result};
use crate::geomag::{tip_wrench_in_field, CalibratedDipole, DipoleSource, FieldCalibration, RingPairConfig};
use crate::simplex::{self, SimplexOptions};

/// Everything needed to evaluate the forward model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticRobot {
    pub params: RobotParams,
    pub pair: RingPairConfig,
    pub source: DipoleSource,
    pub calibration: FieldCalibration,
    pub mode: BeamFormulation,
}

impl MagneticRobot {
    pub fn field(&self) -> CalibratedDipole {
        CalibratedDipole {
            source: self.source,
            calibration: self.calibration,
        }
    }

    pub fn with_angles(&self, theta1: f64, theta2: f64) -> Self {
        Self {
            pair: self.pair.with_angles(theta1, theta2),
            ..*self
        }
    }

    /// Copy with `(K_E, K_B)` replaced.
    pub fn with_scales(&self, k_e: f64, k_b: f64) -> Result<Self> {
        let params = self.params.with_stiffness_scale(k_e);
        params.validate()?;
        Ok(Self {
            params,
            calibration: FieldCalibration::new(k_b)?,
            ..*self
        })
    }

    pub fn with_mode(&self, mode: BeamFormulation) -> Self {
        Self { mode, ..*self }
    }

    /// One application of the unrelaxed map `g`.
    pub fn forward_step(&self, pose: &TipPose) -> Result<(TipPose, Wrench)> {
        let w = tip_wrench_in_field(&self.pair, pose, &self.field())?;
        let next = tip_pose_from_wrench(&self.params, &w, self.mode)?;
        Ok((next, w))
    }
}

/// Fixed-point iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Stop when successive iterates are closer than this, m.
    pub position_tolerance: f64,
    pub max_iterations: usize,
    /// Under-relaxation factor λ ∈ (0, 1].
    pub relaxation: f64,
    /// Starting tip position `p⁽⁰⁾`, m.
    pub initial_tip: Vector3<f64>,
}

impl SolverSettings {
    /// 1 µm tolerance, 1000 iterations, λ = 0.5, starting from the straight tip.
    pub fn for_params(params: &RobotParams) -> Self {
        Self {
            position_tolerance: 1e-6,
            max_iterations: 1000,
            relaxation: 0.5,
            initial_tip: params.straight_tip(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.position_tolerance > 0.0 && self.position_tolerance.is_finite()) {
            return Err(Error::contract("position tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::contract("max_iterations must be at least 1"));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::contract(format!("relaxation must lie in (0, 1], got {}", self.relaxation)));
        }
        if !self.initial_tip.iter().all(|c| c.is_finite()) {
            return Err(Error::contract("initial tip must be finite"));
        }
        Ok(())
    }

    fn seed(&self) -> TipPose {
        TipPose {
            position: self.initial_tip,
            tangent: Vector3::x(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub tip: TipPose,
    /// Wrench evaluated on the last iteration.
    pub wrench: Wrench,
    pub iterations: usize,
    /// Length of the last relaxed step, m.
    pub residual: f64,
    pub converged: bool,
}

/// Steady-state tip pose for the rotations stored in `robot.pair`.
pub fn solve_tip_pose(robot: &MagneticRobot, settings: &SolverSettings) -> Result<EquilibriumResult> {
    solve_from(robot, settings, settings.seed())
}

/// As [`solve_tip_pose`], but starting from an arbitrary pose.
pub fn solve_from(robot: &MagneticRobot, settings: &SolverSettings, seed: TipPose) -> Result<EquilibriumResult> {
    settings.validate()?;
    robot.params.validate()?;
    let lambda = settings.relaxation;
    let blowup = 10.0 * robot.params.length;

    let mut pose = seed;
    let mut wrench = Wrench::zero();
    let mut residual = f64::INFINITY;
    for k in 1..=settings.max_iterations {
        let (target, w) = robot.forward_step(&pose)?;
        let next = pose.position * (1.0 - lambda) + target.position * lambda;
        residual = (next - pose.position).norm();
        if !residual.is_finite() || residual > blowup || !target.tangent.iter().all(|c| c.is_finite()) {
            return Err(Error::Divergence { iterations: k, residual });
        }
        pose = TipPose {
            position: next,
            tangent: target.tangent,
        };
        wrench = w;
        if residual <= settings.position_tolerance {
            return Ok(EquilibriumResult {
                tip: pose,
                wrench,
                iterations: k,
                residual,
                converged: true,
            });
        }
    }
    debug!("equilibrium not converged after {} iterations (residual {residual:e})", settings.max_iterations);
    Ok(EquilibriumResult {
        tip: pose,
        wrench,
        iterations: settings.max_iterations,
        residual,
        converged: false,
    })
}

/// Relaxed step length that one more iteration would take from `pose`.
pub fn fixed_point_residual(robot: &MagneticRobot, pose: &TipPose, relaxation: f64) -> Result<f64> {
    let (target, _) = robot.forward_step(pose)?;
    Ok(relaxation * (target.position - pose.position).norm())
}

// ── Sweeps ─────────────────────────────────────────────────────────────────

/// How two angle lists are combined into rotation pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AnglePairing {
    /// Every θ₁ with every θ₂, θ₁ in the outer loop.
    #[default]
    Cartesian,
    /// Element-wise pairs of equal-length lists.
    Zipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    pub pairing: AnglePairing,
    /// Evaluate points concurrently. Disables warm-starting so that every
    /// point is seeded from `initial_tip`.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub theta1: f64,
    pub theta2: f64,
    pub outcome: Result<EquilibriumResult>,
}

impl SweepPoint {
    pub fn converged(&self) -> Option<&EquilibriumResult> {
        self.outcome.as_ref().ok().filter(|r| r.converged)
    }
}

/// Expand the two angle lists into the rotation pairs a sweep visits.
pub fn angle_pairs(theta1: &[f64], theta2: &[f64], pairing: AnglePairing) -> Result<Vec<(f64, f64)>> {
    if theta1.is_empty() || theta2.is_empty() {
        return Err(Error::input("sweep angle lists must be nonempty"));
    }
    match pairing {
        AnglePairing::Cartesian => Ok(theta1
            .iter()
            .flat_map(|&a| theta2.iter().map(move |&b| (a, b)))
            .collect()),
        AnglePairing::Zipped => {
            if theta1.len() != theta2.len() {
                return Err(Error::input(format!(
                    "zipped sweep needs equal-length lists, got {} and {}",
                    theta1.len(),
                    theta2.len()
                )));
            }
            Ok(theta1.iter().copied().zip(theta2.iter().copied()).collect())
        }
    }
}

/// Solve at every rotation pair; failures are recorded per point.
pub fn sweep(
    robot: &MagneticRobot,
    settings: &SolverSettings,
    theta1: &[f64],
    theta2: &[f64],
    opts: SweepOptions,
) -> Result<Vec<SweepPoint>> {
    settings.validate()?;
    let pairs = angle_pairs(theta1, theta2, opts.pairing)?;
    sweep_pairs(robot, settings, &pairs, opts.parallel)
}

/// Sweep over an explicit list of `(θ₁, θ₂)` pairs.
pub fn sweep_pairs(
    robot: &MagneticRobot,
    settings: &SolverSettings,
    pairs: &[(f64, f64)],
    parallel: bool,
) -> Result<Vec<SweepPoint>> {
    settings.validate()?;
    if pairs.is_empty() {
        return Err(Error::input("sweep needs at least one rotation pair"));
    }
    if parallel {
        return Ok(pairs
            .par_iter()
            .map(|&(a, b)| SweepPoint {
                theta1: a,
                theta2: b,
                outcome: solve_tip_pose(&robot.with_angles(a, b), settings),
            })
            .collect());
    }

    let mut out = Vec::with_capacity(pairs.len());
    let mut warm: Option<TipPose> = None;
    for &(a, b) in pairs {
        let r = robot.with_angles(a, b);
        let mut outcome = match warm {
            Some(seed) => solve_from(&r, settings, seed),
            None => solve_tip_pose(&r, settings),
        };
        let failed = !matches!(&outcome, Ok(res) if res.converged);
        if failed && warm.is_some() {
            outcome = solve_tip_pose(&r, settings);
        }
        warm = match &outcome {
            Ok(res) if res.converged => Some(res.tip),
            _ => None,
        };
        if let Err(e) = &outcome {
            warn!("sweep point ({a:.4}, {b:.4}) rad failed: {e}");
        }
        out.push(SweepPoint {
            theta1: a,
            theta2: b,
            outcome,
        });
    }
    Ok(out)
}

// ── Inversion ──────────────────────────────────────────────────────────────

/// What the inverse solve should reach.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTarget {
    Position(Vector3<f64>),
    /// Position plus tangent; the tangent mismatch is weighted by `L`.
    Pose(TipPose),
}

impl InverseTarget {
    fn position(&self) -> Vector3<f64> {
        match self {
            InverseTarget::Position(p) => *p,
            InverseTarget::Pose(pose) => pose.position,
        }
    }

    fn error(&self, tip: &TipPose, length: f64) -> f64 {
        match self {
            InverseTarget::Position(p) => (tip.position - p).norm(),
            InverseTarget::Pose(pose) => {
                (tip.position - pose.position).norm() + length * (tip.tangent - pose.tangent).norm()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSettings {
    /// Seeds per angle axis over `[0, 2π)`.
    pub grid_size: usize,
    /// Simplex diameter at which refinement stops, rad.
    pub simplex_tolerance: f64,
    /// How many of the best grid seeds are refined.
    pub refine_seeds: usize,
    pub max_evaluations: usize,
}

impl Default for InverseSettings {
    fn default() -> Self {
        Self {
            grid_size: 24,
            simplex_tolerance: 1e-3,
            refine_seeds: 4,
            max_evaluations: 600,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseResult {
    /// Best rotation pair, wrapped into `[0, 2π)`.
    pub theta1: f64,
    pub theta2: f64,
    pub result: EquilibriumResult,
    pub error: f64,
    /// Target outside the sampled workspace or not reached within tolerance.
    pub nearest_achievable: bool,
    /// Distinct refined solutions that reach the target within tolerance.
    pub basins: usize,
    /// Forward solves that failed and were ignored.
    pub skipped: usize,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    q: [f64; 2],
    error: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn angular_distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let d = |x: f64, y: f64| {
        let r = (x - y).rem_euclid(TAU);
        r.min(TAU - r)
    };
    d(a[0], b[0]).hypot(d(a[1], b[1]))
}

/// Rotation pair whose equilibrium tip is closest to `target`.
///
/// A coarse grid over `[0, 2π)²` seeds a few simplex refinements. Among
/// candidates whose errors agree to within `10⁻³·position_tolerance` the
/// lexicographically smallest wrapped `(θ₁, θ₂)` wins.
pub fn invert_controls(
    robot: &MagneticRobot,
    target: InverseTarget,
    settings: &SolverSettings,
    inverse: &InverseSettings,
) -> Result<InverseResult> {
    settings.validate()?;
    if inverse.grid_size < 2 || inverse.refine_seeds == 0 {
        return Err(Error::contract("inverse grid needs >= 2 samples per axis and >= 1 refined seed"));
    }
    let tol = settings.position_tolerance;
    let tie = 1e-3 * tol;
    // Tighter inner solves keep the objective smooth at the scale of `tol`.
    let inner = SolverSettings {
        position_tolerance: tol * 1e-3,
        max_iterations: settings.max_iterations.max(1) * 2,
        ..*settings
    };
    let length = robot.params.length;
    let forward = |q: &[f64; 2]| -> Option<EquilibriumResult> {
        match solve_tip_pose(&robot.with_angles(q[0], q[1]), &inner) {
            Ok(r) if r.converged => Some(r),
            Ok(_) => None,
            Err(e) => {
                debug!("inverse: forward solve at ({:.4}, {:.4}) failed: {e}", q[0], q[1]);
                None
            }
        }
    };

    let n = inverse.grid_size;
    let step = TAU / n as f64;
    let grid: Vec<[f64; 2]> = (0..n)
        .flat_map(|i| (0..n).map(move |j| [i as f64 * step, j as f64 * step]))
        .collect();
    let samples: Vec<Option<EquilibriumResult>> = grid.par_iter().map(|q| forward(q)).collect();

    let mut skipped = samples.iter().filter(|s| s.is_none()).count();
    if skipped > 0 {
        warn!("inverse: skipped {skipped} of {} grid samples", grid.len());
    }
    let mut seeds: Vec<Candidate> = grid
        .iter()
        .zip(&samples)
        .filter_map(|(q, s)| s.as_ref().map(|r| Candidate { q: *q, error: target.error(&r.tip, length) }))
        .collect();
    if seeds.is_empty() {
        return Err(Error::Calibration("inverse: every grid sample failed".into()));
    }

    let inside = inside_sampled_workspace(
        &target.position(),
        samples.iter().flatten().map(|r| r.tip.position),
        tol,
    );

    seeds.sort_by(|a, b| a.error.total_cmp(&b.error).then(a.q[0].total_cmp(&b.q[0])).then(a.q[1].total_cmp(&b.q[1])));
    let mut candidates: Vec<Candidate> = Vec::new();
    let opts = SimplexOptions {
        x_tolerance: inverse.simplex_tolerance,
        f_tolerance: tie,
        max_evaluations: inverse.max_evaluations,
    };
    for seed in seeds.iter().take(inverse.refine_seeds) {
        candidates.push(*seed);
        if seed.error <= tie {
            continue;
        }
        let mut failures = 0usize;
        let refined = simplex::minimize(
            |q: &[f64; 2]| match forward(q) {
                Some(r) => target.error(&r.tip, length),
                None => {
                    failures += 1;
                    f64::INFINITY
                }
            },
            seed.q,
            0.5 * step,
            &opts,
        );
        skipped += failures;
        debug!(
            "simplex from ({:.3}, {:.3}): {} evaluations, converged = {}",
            seed.q[0], seed.q[1], refined.evaluations, refined.converged
        );
        if refined.value.is_finite() {
            candidates.push(Candidate {
                q: [wrap_angle(refined.x[0]), wrap_angle(refined.x[1])],
                error: refined.value,
            });
        }
    }

    let best_error = candidates.iter().map(|c| c.error).fold(f64::INFINITY, f64::min);
    let best = candidates
        .iter()
        .filter(|c| c.error <= best_error + tie)
        .min_by(|a, b| a.q[0].total_cmp(&b.q[0]).then(a.q[1].total_cmp(&b.q[1])))
        .copied()
        .expect("at least one candidate");

    let mut basins: Vec<[f64; 2]> = Vec::new();
    for c in candidates.iter().filter(|c| c.error <= tol) {
        if basins.iter().all(|b| angular_distance(b, &c.q) > 1e-2) {
            basins.push(c.q);
        }
    }

    let result = forward(&best.q).ok_or_else(|| Error::Calibration("inverse: best candidate failed to re-solve".into()))?;
    let error = target.error(&result.tip, length);
    Ok(InverseResult {
        theta1: best.q[0],
        theta2: best.q[1],
        result,
        error,
        nearest_achievable: !inside || error > tol,
        basins: basins.len(),
        skipped,
    })
}

/// Whether `p` falls inside the axis-aligned y–z ellipse (and x band) that
/// bounds a cloud of sampled tips.
fn inside_sampled_workspace(p: &Vector3<f64>, tips: impl Iterator<Item = Vector3<f64>>, slack: f64) -> bool {
    let tips: Vec<Vector3<f64>> = tips.collect();
    if tips.is_empty() {
        return false;
    }
    let lo = tips.iter().fold(Vector3::repeat(f64::INFINITY), |a, t| a.inf(t));
    let hi = tips.iter().fold(Vector3::repeat(f64::NEG_INFINITY), |a, t| a.sup(t));
    if p.x < lo.x - slack || p.x > hi.x + slack {
        return false;
    }
    let centre = (lo + hi) * 0.5;
    let a = (0.5 * (hi.y - lo.y)).max(slack);
    let b = (0.5 * (hi.z - lo.z)).max(slack);
    let radius = |q: &Vector3<f64>| (((q.y - centre.y) / a).powi(2) + ((q.z - centre.z) / b).powi(2)).sqrt();
    let scale = tips.iter().map(radius).fold(1.0, f64::max);
    radius(p) <= scale * (1.0 + 1e-9)
}
