//! 2D lidar simulation by grid ray traversal.

use crate::geom::{Point2, Pose2D};
use crate::grid::OccupancyGrid;
use crate::sim::LidarConfig;
use thiserror::Error;

/// Field of view, 270 degrees.
pub const FOV: f64 = 270.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Error, PartialEq)]
pub enum ScanError {
    #[error("sensor pose ({0:.3}, {1:.3}) lies outside the grid")]
    PoseOutOfBounds(f64, f64),
}

/// One sweep of ranges over the 270 degree arc, centered on the robot
/// heading. Angles are robot-frame; beam i points at
/// `angle_min + i * (angle_max - angle_min) / (count - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserScan {
    pub angle_min: f64,
    pub angle_max: f64,
    pub count: usize,
    pub ranges: Vec<f64>,
    pub range_max: f64,
    pub origin: Pose2D,
}

impl LaserScan {
    /// Robot-frame angle of beam `i`.
    pub fn beam_angle(&self, i: usize) -> f64 {
        if self.count <= 1 {
            return self.angle_min;
        }
        self.angle_min + i as f64 * (self.angle_max - self.angle_min) / (self.count - 1) as f64
    }

    pub fn min_range(&self) -> f64 {
        self.ranges.iter().copied().fold(self.range_max, f64::min)
    }

    /// Minimum range over beams whose robot-frame angle lies within
    /// `half_angle` of straight ahead.
    pub fn min_range_in_cone(&self, half_angle: f64) -> f64 {
        let mut best = self.range_max;
        for i in 0..self.count {
            if self.beam_angle(i).abs() <= half_angle {
                best = best.min(self.ranges[i]);
            }
        }
        best
    }
}

/// Cast a single ray and return the distance to the first occupied cell
/// boundary, or `range_max` when nothing is hit inside the grid.
pub fn raycast(grid: &OccupancyGrid, from: Point2, angle: f64, range_max: f64) -> f64 {
    let (dy, dx) = angle.sin_cos();
    let res = grid.resolution();
    let origin = grid.origin();

    let Some((sx, sy)) = grid.world_to_cell(from) else {
        return range_max;
    };
    let mut ix = sx as i64;
    let mut iy = sy as i64;

    let (step_x, mut t_max_x, t_delta_x) = if dx > 0.0 {
        let edge = origin.x + (ix + 1) as f64 * res;
        (1i64, (edge - from.x) / dx, res / dx)
    } else if dx < 0.0 {
        let edge = origin.x + ix as f64 * res;
        (-1i64, (edge - from.x) / dx, res / -dx)
    } else {
        (0i64, f64::INFINITY, f64::INFINITY)
    };
    let (step_y, mut t_max_y, t_delta_y) = if dy > 0.0 {
        let edge = origin.y + (iy + 1) as f64 * res;
        (1i64, (edge - from.y) / dy, res / dy)
    } else if dy < 0.0 {
        let edge = origin.y + iy as f64 * res;
        (-1i64, (edge - from.y) / dy, res / -dy)
    } else {
        (0i64, f64::INFINITY, f64::INFINITY)
    };

    let mut t: f64 = 0.0;
    loop {
        if grid.is_occupied(ix as usize, iy as usize) {
            // t is the entry distance into this cell; the start cell reports
            // a near-zero hit rather than exactly 0.
            return t.max(1e-9).min(range_max);
        }
        if t_max_x < t_max_y {
            t = t_max_x;
            ix += step_x;
            t_max_x += t_delta_x;
        } else {
            t = t_max_y;
            iy += step_y;
            t_max_y += t_delta_y;
        }
        if t > range_max {
            return range_max;
        }
        if !grid.in_bounds(ix, iy) {
            return range_max;
        }
    }
}

/// Simulate a full scan from `pose`. Beams sweep from `-FOV/2` to `+FOV/2`
/// relative to the heading, ordered low to high.
pub fn scan(grid: &OccupancyGrid, pose: &Pose2D, cfg: &LidarConfig) -> Result<LaserScan, ScanError> {
    if grid.world_to_cell(pose.position()).is_none() {
        return Err(ScanError::PoseOutOfBounds(pose.x, pose.y));
    }
    let angle_min = -FOV / 2.0;
    let angle_max = FOV / 2.0;
    let n = cfg.beam_count;
    let mut ranges = Vec::with_capacity(n);
    for i in 0..n {
        let rel = if n <= 1 {
            angle_min
        } else {
            angle_min + i as f64 * (angle_max - angle_min) / (n - 1) as f64
        };
        ranges.push(raycast(grid, pose.position(), pose.theta + rel, cfg.range_max));
    }
    Ok(LaserScan {
        angle_min,
        angle_max,
        count: n,
        ranges,
        range_max: cfg.range_max,
        origin: *pose,
    })
}
