//! Episode loop: sense, plan, control, step, with trace recording and
//! transition validation.

use crate::controller::{
    is_legal_transition, DrivePolicy, FsmController, FsmState, PurePursuit, TickInput, TickOutput,
    TransitionEvent,
};
use crate::controller::ControllerConfig;
use crate::costmap::{Costmap, CostmapConfig, RearRoi};
use crate::footprint::{check_collision, RobotFootprint};
use crate::geom::{Point2, Pose2D, Twist2D};
use crate::grid::OccupancyGrid;
use crate::lidar::{scan, ScanError};
use crate::planner::{dilate, plan_on_dilated};
use crate::safety::{ForwardSafety, SafetyMode};
use crate::sim::{apply_accel, step, SimConfig};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("lidar: {0}")]
    Scan(#[from] ScanError),
    #[error("start pose outside the world grid")]
    StartOutOfBounds,
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("illegal transition {from}->{to} via '{trigger}' at t={t}")]
    IllegalTransition {
        from: String,
        to: String,
        trigger: String,
        t: f64,
    },
    #[error("trace row {0}: {1}")]
    Malformed(usize, String),
}

/// One controller-tick snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v_cmd: f64,
    pub w_cmd: f64,
    pub fsm_state: FsmState,
    pub safety_flag: bool,
    pub min_scan_range: f64,
    pub first_unsafe_step: Option<usize>,
}

/// Full outcome of one simulated trial.
#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub outcome: Outcome,
    /// Actual traversal time, seconds; never exceeds the timeout.
    pub actual_time: f64,
    pub trace: Vec<TraceRow>,
    pub transitions: Vec<TransitionEvent>,
    pub loop_detected: bool,
    /// Fraction of controller ticks spent in each state, indexed by
    /// `FsmState::index()`.
    pub state_shares: [f64; 5],
    pub final_pose: Pose2D,
    /// Final costmap state, kept when the setup asks for it (debug dumps).
    pub final_costmap: Option<Costmap>,
}

/// Which drive policy an episode uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyChoice {
    Pursuit,
}

impl PolicyChoice {
    fn build(&self) -> Box<dyn DrivePolicy + Send> {
        match self {
            PolicyChoice::Pursuit => Box::new(PurePursuit::default()),
        }
    }
}

/// Everything an episode needs besides the world itself.
#[derive(Debug, Clone)]
pub struct EpisodeSetup {
    pub sim: SimConfig,
    pub controller: ControllerConfig,
    pub costmap: CostmapConfig,
    pub footprint: RobotFootprint,
    pub safety_mode: SafetyMode,
    pub policy: PolicyChoice,
    /// Obstacle dilation for the global planner. The default is a little
    /// over the footprint's inscribed (half-width) radius, the usual grid
    /// planner setting: paths may pass spots that are not rotation-safe,
    /// which is precisely what the forward safety checks are for. Dilating
    /// by the half-diagonal instead makes every course either unplannable or
    /// collision-free regardless of the safety mode.
    pub dilation_radius: f64,
    /// Keep the final costmap in the record for debug dumps.
    pub keep_costmap: bool,
}

impl Default for EpisodeSetup {
    fn default() -> Self {
        let footprint = RobotFootprint::default();
        Self {
            sim: SimConfig::default(),
            controller: ControllerConfig::default(),
            costmap: CostmapConfig::default(),
            footprint,
            safety_mode: SafetyMode::Fi,
            policy: PolicyChoice::Pursuit,
            dilation_radius: footprint.width / 2.0 + 0.025,
            keep_costmap: false,
        }
    }
}

impl EpisodeSetup {
    /// Benchmark preset: the default setup plus first-order velocity
    /// dynamics, so braking distance exists and high-speed approaches carry
    /// real risk.
    pub fn benchmark() -> Self {
        let mut setup = Self::default();
        setup.sim.accel_limits = Some(crate::sim::AccelLimits {
            linear: 0.7,
            angular: 2.5,
        });
        setup
    }
}

/// Run one episode to termination.
///
/// The loop is strictly deterministic: scan, costmap update, replan and
/// controller tick at the controller rate, then fixed physics steps with
/// collision / goal / timeout checks after each.
pub fn run_episode(
    grid: &OccupancyGrid,
    start: Pose2D,
    goal: Point2,
    setup: &EpisodeSetup,
) -> Result<EpisodeRecord, EpisodeError> {
    if grid.world_to_cell(start.position()).is_none() {
        return Err(EpisodeError::StartOutOfBounds);
    }
    let sim = &setup.sim;
    let safety = ForwardSafety::new(setup.safety_mode, setup.footprint);
    // Plan only where the active safety layer can drive. The pursuit's
    // lookahead chord cuts inside bends by up to ~0.15 m, so a safety check
    // that hard-stops on proximity needs that much path clearance beyond its
    // own trigger envelope, or the robot wedges against its own check at
    // every bend: inflation stops on points inside the grown rectangle
    // (half width 0.255), the rollout stops when the swept footprint
    // (half width 0.215) reaches a point within the horizon.
    let dilation = match setup.safety_mode {
        SafetyMode::Fi => setup
            .dilation_radius
            .max(setup.footprint.width / 2.0 + safety.inflated.offset + 0.145),
        SafetyMode::Mpc => setup
            .dilation_radius
            .max(setup.footprint.width / 2.0 + 0.145),
        SafetyMode::Off => setup.dilation_radius,
    };
    let mut controller = FsmController::new(
        setup.controller,
        safety.clone(),
        RearRoi::behind(&setup.footprint),
        setup.policy.build(),
    );
    let mut costmap = Costmap::new(start, setup.costmap);
    let dilated = dilate(grid, dilation);

    let mut pose = start;
    let mut twist = Twist2D::ZERO;
    let mut cmd = Twist2D::ZERO;
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut state_ticks = [0usize; 5];

    let max_steps = (sim.timeout / sim.dt).ceil() as usize;

    // Terminal conditions at t = 0, before any motion.
    let mut terminal = if check_collision(grid, &pose, &setup.footprint) {
        Some((Outcome::Collision, 0.0))
    } else if pose.position().distance_to(goal) <= sim.goal_tolerance {
        Some((Outcome::Success, 0.0))
    } else {
        None
    };

    if terminal.is_none() {
        for i in 0..max_steps {
            let t = i as f64 * sim.dt;
            if i % sim.control_every == 0 {
                let laser = scan(grid, &pose, &sim.lidar)?;
                costmap.integrate_scan(&laser);
                let path = plan_on_dilated(&dilated, &pose, goal).ok();
                let TickOutput {
                    cmd: tick_cmd,
                    state,
                    verdict,
                } = controller.tick(&TickInput {
                    pose,
                    scan: &laser,
                    path: path.as_ref(),
                    costmap: &costmap,
                    t,
                });
                cmd = tick_cmd.clamped(sim.v_max, sim.w_max);
                state_ticks[state.index()] += 1;
                trace.push(TraceRow {
                    t,
                    x: pose.x,
                    y: pose.y,
                    theta: pose.theta,
                    v_cmd: cmd.v,
                    w_cmd: cmd.w,
                    fsm_state: state,
                    safety_flag: verdict.map(|v| v.safe).unwrap_or(true),
                    min_scan_range: laser.min_range(),
                    first_unsafe_step: verdict.and_then(|v| v.first_unsafe_step),
                });
            }
            twist = apply_accel(twist, cmd, sim.accel_limits, sim.dt);
            pose = step(pose, twist, sim.dt);
            let t_next = ((i + 1) as f64 * sim.dt).min(sim.timeout);
            if check_collision(grid, &pose, &setup.footprint) {
                terminal = Some((Outcome::Collision, t_next));
                break;
            }
            if pose.position().distance_to(goal) <= sim.goal_tolerance {
                terminal = Some((Outcome::Success, t_next));
                break;
            }
        }
    }
    let (outcome, actual_time) = terminal.unwrap_or((Outcome::Timeout, sim.timeout));

    let total: usize = state_ticks.iter().sum();
    let mut state_shares = [0.0; 5];
    if total > 0 {
        for (share, ticks) in state_shares.iter_mut().zip(state_ticks) {
            *share = ticks as f64 / total as f64;
        }
    }
    Ok(EpisodeRecord {
        outcome,
        actual_time,
        transitions: controller.transitions().to_vec(),
        loop_detected: controller.loop_detected(),
        trace,
        state_shares,
        final_pose: pose,
        final_costmap: setup.keep_costmap.then_some(costmap),
    })
}

pub const TRACE_HEADER: &str =
    "t,x,y,theta,v_cmd,w_cmd,fsm_state,safety_flag,min_scan_range,first_unsafe_step";

/// Write the per-tick trace as CSV. Fixed-precision formatting keeps reruns
/// byte-identical.
pub fn write_trace_csv<W: Write>(record: &EpisodeRecord, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for row in &record.trace {
        writeln!(
            out,
            "{:.3},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{:.6},{}",
            row.t,
            row.x,
            row.y,
            row.theta,
            row.v_cmd,
            row.w_cmd,
            row.fsm_state,
            row.safety_flag as u8,
            row.min_scan_range,
            row.first_unsafe_step
                .map(|s| s.to_string())
                .unwrap_or_default(),
        )?;
    }
    Ok(())
}

/// Parse a trace CSV produced by [`write_trace_csv`].
pub fn read_trace_csv<R: BufRead>(reader: R) -> Result<Vec<TraceRow>, TraceError> {
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| TraceError::Malformed(n, e.to_string()))?;
        if n == 0 {
            if line != TRACE_HEADER {
                return Err(TraceError::Malformed(0, format!("bad header: {line}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 10 {
            return Err(TraceError::Malformed(n, format!("{} fields", parts.len())));
        }
        let f = |i: usize| -> Result<f64, TraceError> {
            parts[i]
                .parse()
                .map_err(|_| TraceError::Malformed(n, format!("field {i}: {}", parts[i])))
        };
        rows.push(TraceRow {
            t: f(0)?,
            x: f(1)?,
            y: f(2)?,
            theta: f(3)?,
            v_cmd: f(4)?,
            w_cmd: f(5)?,
            fsm_state: FsmState::from_name(parts[6])
                .ok_or_else(|| TraceError::Malformed(n, format!("state {}", parts[6])))?,
            safety_flag: parts[7] == "1",
            min_scan_range: f(8)?,
            first_unsafe_step: if parts[9].is_empty() {
                None
            } else {
                Some(
                    parts[9]
                        .parse()
                        .map_err(|_| TraceError::Malformed(n, format!("step {}", parts[9])))?,
                )
            },
        });
    }
    Ok(rows)
}

/// Check every logged transition against the labeled edge set.
pub fn validate_transitions(events: &[TransitionEvent]) -> Result<(), TraceError> {
    for e in events {
        if !is_legal_transition(e.from, e.trigger, e.to) {
            return Err(TraceError::IllegalTransition {
                from: e.from.to_string(),
                to: e.to.to_string(),
                trigger: e.trigger.as_str().to_string(),
                t: e.t,
            });
        }
    }
    Ok(())
}

/// Validate a whole record: every logged hop is a table edge, and the per-tick
/// state sequence is explained by the hops (states only change through logged
/// transitions).
pub fn validate_record(record: &EpisodeRecord) -> Result<(), TraceError> {
    validate_transitions(&record.transitions)?;
    let mut hops = record.transitions.iter().peekable();
    let mut state = FsmState::Initial;
    for (i, row) in record.trace.iter().enumerate() {
        while let Some(e) = hops.peek() {
            if e.t <= row.t {
                state = e.to;
                hops.next();
            } else {
                break;
            }
        }
        if row.fsm_state != state {
            return Err(TraceError::Malformed(
                i + 1,
                format!("state {} not explained by transitions", row.fsm_state),
            ));
        }
    }
    Ok(())
}
