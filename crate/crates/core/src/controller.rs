//! Five-state navigation controller: heading alignment, a pluggable drive
//! policy, and backtrack / slow-forward recovery behaviors.

use crate::costmap::{Costmap, RearRoi};
use crate::geom::{normalize_angle, Point2, Pose2D, Twist2D};
use crate::lidar::LaserScan;
use crate::planner::{heading_error, sample_lookahead, GlobalPath};
use crate::safety::{ForwardSafety, SafetyVerdict};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FsmState {
    Initial,
    Heading,
    Drive,
    Backtrack,
    Forward,
}

impl FsmState {
    pub const ALL: [FsmState; 5] = [
        FsmState::Initial,
        FsmState::Heading,
        FsmState::Drive,
        FsmState::Backtrack,
        FsmState::Forward,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FsmState::Initial => "initial",
            FsmState::Heading => "heading",
            FsmState::Drive => "drive",
            FsmState::Backtrack => "backtrack",
            FsmState::Forward => "forward",
        }
    }

    pub fn from_name(s: &str) -> Option<FsmState> {
        Self::ALL.iter().copied().find(|st| st.as_str() == s)
    }

    pub fn index(&self) -> usize {
        match self {
            FsmState::Initial => 0,
            FsmState::Heading => 1,
            FsmState::Drive => 2,
            FsmState::Backtrack => 3,
            FsmState::Forward => 4,
        }
    }
}

impl std::fmt::Display for FsmState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Path,
    NoPath,
    Aligned,
    NotAligned,
    Safe,
    Dangerous,
    Stuck,
    Recovered,
}

impl Trigger {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trigger::Path => "path",
            Trigger::NoPath => "no_path",
            Trigger::Aligned => "aligned",
            Trigger::NotAligned => "not_aligned",
            Trigger::Safe => "safe",
            Trigger::Dangerous => "dangerous",
            Trigger::Stuck => "stuck",
            Trigger::Recovered => "recovered",
        }
    }

    pub fn from_name(s: &str) -> Option<Trigger> {
        [
            Trigger::Path,
            Trigger::NoPath,
            Trigger::Aligned,
            Trigger::NotAligned,
            Trigger::Safe,
            Trigger::Dangerous,
            Trigger::Stuck,
            Trigger::Recovered,
        ]
        .iter()
        .copied()
        .find(|t| t.as_str() == s)
    }
}

/// The full labeled edge set, including self-loops.
pub const TRANSITION_TABLE: [(FsmState, Trigger, FsmState); 13] = [
    (FsmState::Initial, Trigger::NoPath, FsmState::Initial),
    (FsmState::Initial, Trigger::Path, FsmState::Heading),
    (FsmState::Heading, Trigger::NoPath, FsmState::Initial),
    (FsmState::Heading, Trigger::Aligned, FsmState::Drive),
    (FsmState::Drive, Trigger::Safe, FsmState::Drive),
    (FsmState::Drive, Trigger::NotAligned, FsmState::Heading),
    (FsmState::Drive, Trigger::Dangerous, FsmState::Backtrack),
    (FsmState::Backtrack, Trigger::Safe, FsmState::Backtrack),
    (FsmState::Backtrack, Trigger::Stuck, FsmState::Forward),
    (FsmState::Backtrack, Trigger::Recovered, FsmState::Heading),
    (FsmState::Forward, Trigger::Safe, FsmState::Forward),
    (FsmState::Forward, Trigger::Recovered, FsmState::Heading),
    (FsmState::Forward, Trigger::Stuck, FsmState::Backtrack),
];

/// Check one labeled edge against the table.
pub fn is_legal_transition(from: FsmState, trigger: Trigger, to: FsmState) -> bool {
    TRANSITION_TABLE
        .iter()
        .any(|&(f, tr, t)| f == from && tr == trigger && t == to)
}

/// A state change with its timestamp and trigger. Self-loops are not logged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEvent {
    pub t: f64,
    pub from: FsmState,
    pub to: FsmState,
    pub trigger: Trigger,
}

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("lookahead point coincides with the robot position")]
    DegenerateLookahead,
}

/// Drive policy contract: lidar plus a robot-frame lookahead point in, one
/// velocity command out. Implementations must be pure.
pub trait DrivePolicy {
    fn command(
        &self,
        scan: &LaserScan,
        lookahead_rel: Point2,
        v_max: f64,
        w_max: f64,
    ) -> Result<Twist2D, PolicyError>;
}

/// Geometric default policy: curvature toward the lookahead point, speed
/// scaled down by the nearest obstacle in the front cone.
#[derive(Debug, Clone, Copy)]
pub struct PurePursuit {
    /// Distance at which speed scaling starts, meters.
    pub d_slow: f64,
    /// Half-angle of the clearance cone, radians.
    pub cone_half_angle: f64,
}

impl Default for PurePursuit {
    fn default() -> Self {
        Self {
            d_slow: 1.0,
            cone_half_angle: PI / 4.0,
        }
    }
}

impl DrivePolicy for PurePursuit {
    fn command(
        &self,
        scan: &LaserScan,
        lookahead_rel: Point2,
        v_max: f64,
        w_max: f64,
    ) -> Result<Twist2D, PolicyError> {
        let d2 = lookahead_rel.x * lookahead_rel.x + lookahead_rel.y * lookahead_rel.y;
        if d2.sqrt() < 1e-6 {
            return Err(PolicyError::DegenerateLookahead);
        }
        let curvature = 2.0 * lookahead_rel.y / d2;
        let d_min = scan.min_range_in_cone(self.cone_half_angle);
        let v = v_max * (d_min / self.d_slow).min(1.0);
        let w = curvature * v;
        Ok(Twist2D::new(v, w).clamped(v_max, w_max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub v_max: f64,
    pub w_max: f64,
    /// Lookahead arclength along the global path, meters.
    pub lookahead: f64,
    /// Alignment band for leaving Drive ("not aligned" fires at or above).
    pub heading_tolerance: f64,
    /// Tighter band for entering Drive ("aligned" fires at or below).
    pub align_enter: f64,
    /// Proportional gain for rotate-in-place.
    pub k_theta: f64,
    /// How far back along the breadcrumb trail to aim when backtracking.
    pub backtrack_distance: f64,
    pub reverse_speed: f64,
    /// Rear-axis pointing tolerance before reversing, radians.
    pub rear_align_tolerance: f64,
    pub slow_forward_speed: f64,
    /// Euclidean arrival tolerance for the backtrack target.
    pub arrival_tolerance: f64,
    /// Displacement after which slow-forward counts as recovered.
    pub recover_distance: f64,
    /// Minimum spacing between recorded breadcrumb poses.
    pub breadcrumb_spacing: f64,
    pub loop_guard: bool,
    /// Backtrack entries within the guard radius that raise the flag.
    pub loop_guard_entries: usize,
    pub loop_guard_radius: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            v_max: 0.7,
            w_max: 1.5,
            lookahead: 0.5,
            heading_tolerance: 30.0_f64.to_radians(),
            align_enter: 25.0_f64.to_radians(),
            k_theta: 2.0,
            backtrack_distance: 0.3,
            reverse_speed: 0.15,
            rear_align_tolerance: 0.1,
            slow_forward_speed: 0.2,
            arrival_tolerance: 0.05,
            recover_distance: 0.3,
            breadcrumb_spacing: 0.05,
            loop_guard: true,
            loop_guard_entries: 5,
            loop_guard_radius: 3.0,
        }
    }
}

/// Poses recorded during forward motion, consumed by backtracking.
#[derive(Debug, Clone, Default)]
pub struct BreadcrumbTrail {
    poses: Vec<Pose2D>,
    min_spacing: f64,
}

impl BreadcrumbTrail {
    pub fn new(min_spacing: f64) -> Self {
        Self {
            poses: Vec::new(),
            min_spacing,
        }
    }

    pub fn record(&mut self, pose: Pose2D) {
        match self.poses.last() {
            Some(last) if last.position().distance_to(pose.position()) < self.min_spacing => {}
            _ => self.poses.push(pose),
        }
    }

    pub fn poses(&self) -> &[Pose2D] {
        &self.poses
    }

    /// Trail point closest to `distance` behind the robot measured along the
    /// recorded path, walking back from the newest pose. Points bunched
    /// around the robot itself (a churned trail) are not usable targets; when
    /// nothing lies at least `distance / 3` away the trail counts as empty.
    /// Returns the point and its trail index.
    pub fn point_behind(&self, pose: &Pose2D, distance: f64) -> Option<(usize, Point2)> {
        if self.poses.is_empty() {
            return None;
        }
        let mut cum = pose.position().distance_to(self.poses.last().unwrap().position());
        let mut best: Option<(f64, usize, Point2)> = None;
        for i in (0..self.poses.len()).rev() {
            let p = self.poses[i].position();
            if i + 1 < self.poses.len() {
                cum += self.poses[i + 1].position().distance_to(p);
            }
            if pose.position().distance_to(p) < distance / 3.0 {
                continue;
            }
            let gap = (cum - distance).abs();
            if best.map(|(g, _, _)| gap < g).unwrap_or(true) {
                best = Some((gap, i, p));
            }
        }
        best.map(|(_, i, p)| (i, p))
    }

    /// Drop everything recorded after index `keep`. Reversing over a stretch
    /// of the trail consumes it, so consecutive failed retries back off
    /// further and further instead of replaying the same short hop.
    pub fn truncate_after(&mut self, keep: usize) {
        self.poses.truncate(keep + 1);
    }
}

/// Rotate in place toward `target`.
pub fn heading_behavior(pose: &Pose2D, target: Point2, cfg: &ControllerConfig) -> Twist2D {
    let err = heading_error(pose, target).unwrap_or(0.0);
    Twist2D::new(0.0, (cfg.k_theta * err).clamp(-cfg.w_max, cfg.w_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryStatus {
    Continue,
    Stuck,
    Recovered,
}

/// One backtrack tick: align the rear axis to the target, then reverse
/// straight. Stuck when the rear ROI reports an obstacle, recovered on
/// Euclidean arrival.
pub fn backtrack_behavior(
    pose: &Pose2D,
    target: Point2,
    roi_clear: bool,
    cfg: &ControllerConfig,
) -> (Twist2D, RecoveryStatus) {
    if !roi_clear {
        return (Twist2D::ZERO, RecoveryStatus::Stuck);
    }
    if pose.position().distance_to(target) <= cfg.arrival_tolerance {
        return (Twist2D::ZERO, RecoveryStatus::Recovered);
    }
    let rear_error = normalize_angle(pose.bearing_to(target) - (pose.theta + PI));
    if rear_error.abs() > cfg.rear_align_tolerance {
        let w = (cfg.k_theta * rear_error).clamp(-cfg.w_max, cfg.w_max);
        (Twist2D::new(0.0, w), RecoveryStatus::Continue)
    } else {
        (Twist2D::new(-cfg.reverse_speed, 0.0), RecoveryStatus::Continue)
    }
}

/// One slow-forward tick. Stuck when the forward check rejects the straight
/// crawl, recovered after enough displacement with a fresh path available.
pub fn forward_behavior(
    displacement: f64,
    path_available: bool,
    verdict_safe: bool,
    cfg: &ControllerConfig,
) -> (Twist2D, RecoveryStatus) {
    if !verdict_safe {
        return (Twist2D::ZERO, RecoveryStatus::Stuck);
    }
    if displacement >= cfg.recover_distance && path_available {
        return (Twist2D::ZERO, RecoveryStatus::Recovered);
    }
    (Twist2D::new(cfg.slow_forward_speed, 0.0), RecoveryStatus::Continue)
}

pub struct TickInput<'a> {
    pub pose: Pose2D,
    pub scan: &'a LaserScan,
    pub path: Option<&'a GlobalPath>,
    pub costmap: &'a Costmap,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct TickOutput {
    pub cmd: Twist2D,
    pub state: FsmState,
    /// Forward-safety verdict when one was evaluated this tick.
    pub verdict: Option<SafetyVerdict>,
}

enum Step {
    Emit(Twist2D),
    Goto(FsmState, Trigger),
}

/// State-bearing controller owned by one episode.
pub struct FsmController {
    state: FsmState,
    config: ControllerConfig,
    safety: ForwardSafety,
    roi: RearRoi,
    policy: Box<dyn DrivePolicy + Send>,
    trail: BreadcrumbTrail,
    backtrack_target: Option<Point2>,
    forward_entry: Option<Point2>,
    transitions: Vec<TransitionEvent>,
    backtrack_entries: Vec<Point2>,
    loop_detected: bool,
}

impl FsmController {
    pub fn new(
        config: ControllerConfig,
        safety: ForwardSafety,
        roi: RearRoi,
        policy: Box<dyn DrivePolicy + Send>,
    ) -> Self {
        let spacing = config.breadcrumb_spacing;
        Self {
            state: FsmState::Initial,
            config,
            safety,
            roi,
            policy,
            trail: BreadcrumbTrail::new(spacing),
            backtrack_target: None,
            forward_entry: None,
            transitions: Vec::new(),
            backtrack_entries: Vec::new(),
            loop_detected: false,
        }
    }

    pub fn state(&self) -> FsmState {
        self.state
    }

    pub fn transitions(&self) -> &[TransitionEvent] {
        &self.transitions
    }

    pub fn loop_detected(&self) -> bool {
        self.loop_detected
    }

    pub fn trail(&self) -> &BreadcrumbTrail {
        &self.trail
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    /// Run the active state's behavior and follow at most one transition per
    /// state visit. Transition evaluation order within a state is fixed:
    /// safety first, then alignment, then arrival/stuck, then the self-loop.
    pub fn tick(&mut self, input: &TickInput<'_>) -> TickOutput {
        let mut visited = [false; 5];
        let mut verdict: Option<SafetyVerdict> = None;
        loop {
            visited[self.state.index()] = true;
            let step = match self.state {
                FsmState::Initial => self.initial_step(input),
                FsmState::Heading => self.heading_step(input),
                FsmState::Drive => self.drive_step(input, &mut verdict),
                FsmState::Backtrack => self.backtrack_step(input),
                FsmState::Forward => self.forward_step(input, &mut verdict),
            };
            match step {
                Step::Emit(cmd) => {
                    let cmd = cmd.clamped(self.config.v_max, self.config.w_max);
                    if cmd.v > 0.0 {
                        self.trail.record(input.pose);
                    }
                    return TickOutput {
                        cmd,
                        state: self.state,
                        verdict,
                    };
                }
                Step::Goto(next, trigger) => {
                    self.transitions.push(TransitionEvent {
                        t: input.t,
                        from: self.state,
                        to: next,
                        trigger,
                    });
                    self.on_enter(next, input);
                    let already_ran = visited[next.index()];
                    self.state = next;
                    if already_ran {
                        // A cycle within one tick: both directions are
                        // blocked. Hold position and resume next tick.
                        return TickOutput {
                            cmd: Twist2D::ZERO,
                            state: self.state,
                            verdict,
                        };
                    }
                }
            }
        }
    }

    fn on_enter(&mut self, next: FsmState, input: &TickInput<'_>) {
        match next {
            FsmState::Backtrack => {
                let target = match self
                    .trail
                    .point_behind(&input.pose, self.config.backtrack_distance)
                {
                    Some((index, point)) => {
                        self.trail.truncate_after(index);
                        point
                    }
                    None => {
                        let d = self.config.backtrack_distance;
                        Point2::new(
                            input.pose.x - d * input.pose.theta.cos(),
                            input.pose.y - d * input.pose.theta.sin(),
                        )
                    }
                };
                self.backtrack_target = Some(target);
                if self.config.loop_guard {
                    let here = input.pose.position();
                    let nearby = self
                        .backtrack_entries
                        .iter()
                        .filter(|p| p.distance_to(here) <= self.config.loop_guard_radius)
                        .count();
                    if nearby + 1 > self.config.loop_guard_entries {
                        self.loop_detected = true;
                    }
                }
                self.backtrack_entries.push(input.pose.position());
            }
            FsmState::Forward => {
                self.forward_entry = Some(input.pose.position());
            }
            _ => {}
        }
    }

    fn initial_step(&mut self, input: &TickInput<'_>) -> Step {
        match input.path {
            None => Step::Emit(Twist2D::ZERO),
            Some(_) => Step::Goto(FsmState::Heading, Trigger::Path),
        }
    }

    fn heading_step(&mut self, input: &TickInput<'_>) -> Step {
        let Some(path) = input.path else {
            return Step::Goto(FsmState::Initial, Trigger::NoPath);
        };
        let target = sample_lookahead(path, &input.pose, self.config.lookahead);
        let err = match heading_error(&input.pose, target) {
            Ok(e) => e,
            // On top of the last waypoint: nothing to align to, hold still.
            Err(_) => return Step::Emit(Twist2D::ZERO),
        };
        if err.abs() <= self.config.align_enter {
            return Step::Goto(FsmState::Drive, Trigger::Aligned);
        }
        Step::Emit(heading_behavior(&input.pose, target, &self.config))
    }

    fn drive_step(&mut self, input: &TickInput<'_>, verdict: &mut Option<SafetyVerdict>) -> Step {
        let Some(path) = input.path else {
            // Losing the path interrupts driving; Heading then falls back to
            // Initial on its own no-path edge.
            return Step::Goto(FsmState::Heading, Trigger::NotAligned);
        };
        let target = sample_lookahead(path, &input.pose, self.config.lookahead);
        let rel = input.pose.to_local(target);
        let cmd = match self
            .policy
            .command(input.scan, rel, self.config.v_max, self.config.w_max)
        {
            Ok(cmd) => cmd,
            Err(PolicyError::DegenerateLookahead) => return Step::Emit(Twist2D::ZERO),
        };
        let v = self.safety.check(input.scan, cmd);
        let safe = v.safe;
        *verdict = Some(v);
        if !safe {
            return Step::Goto(FsmState::Backtrack, Trigger::Dangerous);
        }
        let err = heading_error(&input.pose, target).unwrap_or(0.0);
        if err.abs() >= self.config.heading_tolerance {
            return Step::Goto(FsmState::Heading, Trigger::NotAligned);
        }
        Step::Emit(cmd)
    }

    fn backtrack_step(&mut self, input: &TickInput<'_>) -> Step {
        let target = self.backtrack_target.expect("set on entry");
        let clear = input
            .costmap
            .roi_clear(&input.pose, &self.roi)
            .unwrap_or(false);
        let (cmd, status) = backtrack_behavior(&input.pose, target, clear, &self.config);
        match status {
            RecoveryStatus::Stuck => Step::Goto(FsmState::Forward, Trigger::Stuck),
            RecoveryStatus::Recovered => Step::Goto(FsmState::Heading, Trigger::Recovered),
            RecoveryStatus::Continue => Step::Emit(cmd),
        }
    }

    fn forward_step(&mut self, input: &TickInput<'_>, verdict: &mut Option<SafetyVerdict>) -> Step {
        let crawl = Twist2D::new(self.config.slow_forward_speed, 0.0);
        let v = self.safety.check(input.scan, crawl);
        let safe = v.safe;
        *verdict = Some(v);
        let displacement = self
            .forward_entry
            .map(|e| e.distance_to(input.pose.position()))
            .unwrap_or(0.0);
        let (cmd, status) = forward_behavior(displacement, input.path.is_some(), safe, &self.config);
        match status {
            RecoveryStatus::Stuck => Step::Goto(FsmState::Backtrack, Trigger::Stuck),
            RecoveryStatus::Recovered => Step::Goto(FsmState::Heading, Trigger::Recovered),
            RecoveryStatus::Continue => Step::Emit(cmd),
        }
    }
}
