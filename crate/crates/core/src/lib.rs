//! Deterministic 2D navigation simulation core.
//!
//! A differential-drive robot with a 270-degree lidar runs inside an
//! occupancy grid. A five-state controller plans over the grid, drives with a
//! pluggable policy, checks commands against two interchangeable forward
//! safety checks (footprint inflation and a constant-command rollout), and
//! recovers by backtracking along its breadcrumb trail or crawling forward.
//! Episodes are bit-reproducible: same world, same config, same trace.

pub mod controller;
pub mod costmap;
pub mod episode;
pub mod footprint;
pub mod geom;
pub mod grid;
pub mod lidar;
pub mod planner;
pub mod safety;
pub mod search;
pub mod sim;

pub use controller::{
    ControllerConfig, DrivePolicy, FsmController, FsmState, PurePursuit, TransitionEvent, Trigger,
};
pub use costmap::{Costmap, CostmapConfig, RearRoi};
pub use episode::{
    run_episode, EpisodeRecord, EpisodeSetup, Outcome, PolicyChoice, TraceRow,
};
pub use footprint::{check_collision, RobotFootprint};
pub use geom::{normalize_angle, Point2, Pose2D, Twist2D};
pub use grid::{OccupancyGrid, FREE, OCCUPIED};
pub use lidar::{scan, LaserScan};
pub use planner::{plan_global, sample_lookahead, GlobalPath, PlanError};
pub use safety::{
    fi_check, mpc_check, scan_to_points, ForwardSafety, InflatedFootprint, MpcParams, SafetyMode,
    SafetyVerdict,
};
pub use sim::{step, LidarConfig, SimConfig};
