//! Procedural obstacle-course generation.
//!
//! Worlds come out of a cellular automaton over a bordered grid, are
//! validated by flood fill between fixed start and goal cells, and get rated
//! by the length of an 8-connected A* path. The path length divided by the
//! benchmark's nominal 2 m/s top speed is the course's optimal traversal
//! time. Generation is reproducible: the same parameters (seed included)
//! always serialize to identical bytes.

mod automaton;
mod generate;
mod io;

pub use automaton::cellular_automaton;
pub use generate::{
    astar_path, flood_fill_connected, generate_world, generate_world_with_attempts,
    start_goal_cells, PathResult,
    CLEARANCE_RADIUS, NOMINAL_SPEED,
};
pub use io::{
    decode_rle, encode_rle, world_from_json, world_to_json, Manifest, ManifestEntry, SCHEMA_VERSION,
};

use navbench_core::{OccupancyGrid, Point2, Pose2D};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("flood fill endpoint is occupied")]
    CellOccupied,
    #[error("no path between start and goal")]
    NoPath,
    #[error("no connected world after {0} attempts")]
    GenerationExhausted(usize),
    #[error("world file: {0}")]
    Format(String),
}

/// The four automaton knobs plus grid geometry and the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenParams {
    /// Probability that an interior cell starts occupied.
    pub initial_fill: f64,
    pub smoothing_iterations: usize,
    /// A cell becomes occupied at this many occupied neighbors or more.
    pub fill_threshold: usize,
    /// A cell becomes free at this many occupied neighbors or fewer.
    pub clear_threshold: usize,
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            initial_fill: 0.28,
            smoothing_iterations: 2,
            fill_threshold: 6,
            clear_threshold: 2,
            width: 30,
            height: 30,
            resolution: 0.15,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        if !(0.0..=1.0).contains(&self.initial_fill) {
            return Err(GenError::InvalidParams(format!(
                "initial_fill {} outside [0, 1]",
                self.initial_fill
            )));
        }
        if self.fill_threshold <= self.clear_threshold {
            return Err(GenError::InvalidParams(format!(
                "fill_threshold {} must exceed clear_threshold {}",
                self.fill_threshold, self.clear_threshold
            )));
        }
        if self.width < 10 || self.height < 10 {
            return Err(GenError::InvalidParams(format!(
                "grid {}x{} below the 10x10 minimum",
                self.width, self.height
            )));
        }
        if self.resolution <= 0.0 {
            return Err(GenError::InvalidParams("resolution must be positive".into()));
        }
        Ok(())
    }
}

/// A generated course: grid, endpoints, and its difficulty rating.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub grid: OccupancyGrid,
    pub start: Pose2D,
    pub goal: Point2,
    /// A* path length over the raw grid, meters.
    pub path_length: f64,
    /// `path_length / 2.0` (nominal top speed 2 m/s).
    pub optimal_time: f64,
    pub params: GenParams,
}

/// splitmix64; used to derive independent sub-stream seeds.
pub(crate) fn mix_seed(state: u64, salt: u64) -> u64 {
    let mut z = state
        .wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
