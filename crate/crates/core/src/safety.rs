//! Forward collision prediction: footprint inflation against live scan
//! points, and a constant-command rollout that tests the footprint along the
//! predicted trajectory.

use crate::footprint::RobotFootprint;
use crate::geom::{Point2, Pose2D, Twist2D};
use crate::lidar::LaserScan;
use crate::sim::step;
use serde::{Deserialize, Serialize};

/// Which forward check classifies commands, chosen at episode start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SafetyMode {
    Fi,
    Mpc,
    /// No forward check; every command passes.
    Off,
}

/// Body rectangle grown by a fixed offset on all four sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflatedFootprint {
    pub base: RobotFootprint,
    pub offset: f64,
}

impl InflatedFootprint {
    pub fn new(base: RobotFootprint, offset: f64) -> Self {
        assert!(offset >= 0.0, "inflation offset must be nonnegative");
        Self { base, offset }
    }
}

impl Default for InflatedFootprint {
    fn default() -> Self {
        Self {
            base: RobotFootprint::default(),
            offset: 0.04,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcParams {
    pub horizon_steps: usize,
    pub step_dt: f64,
    /// Extra margin added to the footprint during the rollout.
    pub margin: f64,
}

impl Default for MpcParams {
    fn default() -> Self {
        Self {
            horizon_steps: 20,
            step_dt: 0.01, // 20 steps = 200 ms
            margin: 0.0,
        }
    }
}

/// Outcome of a forward check. `first_unsafe_step` is 0 for a violation at
/// the current pose (footprint inflation) and the 1-based rollout step for
/// the predictive check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub first_unsafe_step: Option<usize>,
    pub offending_point: Option<Point2>,
}

impl SafetyVerdict {
    pub fn safe() -> Self {
        Self {
            safe: true,
            first_unsafe_step: None,
            offending_point: None,
        }
    }

    pub fn unsafe_at(step: usize, point: Point2) -> Self {
        Self {
            safe: false,
            first_unsafe_step: Some(step),
            offending_point: Some(point),
        }
    }
}

/// Convert finite beams to robot-frame Cartesian points; max-range beams are
/// dropped.
pub fn scan_to_points(scan: &LaserScan) -> Vec<Point2> {
    let mut points = Vec::new();
    for i in 0..scan.count {
        let r = scan.ranges[i];
        if r < scan.range_max {
            let a = scan.beam_angle(i);
            points.push(Point2::new(r * a.cos(), r * a.sin()));
        }
    }
    points
}

/// Unsafe iff any point lies inside the inflated rectangle around the body.
/// The offending point is the first in beam order.
pub fn fi_check(points: &[Point2], footprint: &InflatedFootprint) -> SafetyVerdict {
    for &p in points {
        if footprint.base.contains_local(p, footprint.offset) {
            return SafetyVerdict::unsafe_at(0, p);
        }
    }
    SafetyVerdict::safe()
}

/// Robot-frame poses reached after steps `1..=horizon` of the constant
/// command, using the same integrator as the simulation.
pub fn rollout(cmd: Twist2D, horizon_steps: usize, step_dt: f64) -> Vec<Pose2D> {
    let mut poses = Vec::with_capacity(horizon_steps);
    let mut pose = Pose2D::new(0.0, 0.0, 0.0);
    for _ in 0..horizon_steps {
        pose = step(pose, cmd, step_dt);
        poses.push(pose);
    }
    poses
}

/// Roll the command forward and test every scan point against the footprint
/// at each predicted pose. Unsafe at the first violating step (1-based).
pub fn mpc_check(
    points: &[Point2],
    cmd: Twist2D,
    footprint: &RobotFootprint,
    params: &MpcParams,
) -> SafetyVerdict {
    let mut pose = Pose2D::new(0.0, 0.0, 0.0);
    for k in 1..=params.horizon_steps {
        pose = step(pose, cmd, params.step_dt);
        for &p in points {
            if footprint.contains_world(&pose, p, params.margin) {
                return SafetyVerdict::unsafe_at(k, p);
            }
        }
    }
    SafetyVerdict::safe()
}

/// Configured dispatcher feeding the controller's "dangerous" transition.
#[derive(Debug, Clone)]
pub struct ForwardSafety {
    pub mode: SafetyMode,
    pub inflated: InflatedFootprint,
    pub mpc: MpcParams,
}

impl ForwardSafety {
    pub fn new(mode: SafetyMode, footprint: RobotFootprint) -> Self {
        Self {
            mode,
            inflated: InflatedFootprint::new(footprint, 0.04),
            mpc: MpcParams::default(),
        }
    }

    pub fn check(&self, scan: &LaserScan, cmd: Twist2D) -> SafetyVerdict {
        match self.mode {
            SafetyMode::Off => SafetyVerdict::safe(),
            SafetyMode::Fi => fi_check(&scan_to_points(scan), &self.inflated),
            SafetyMode::Mpc => {
                mpc_check(&scan_to_points(scan), cmd, &self.inflated.base, &self.mpc)
            }
        }
    }
}
