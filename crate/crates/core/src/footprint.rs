//! Robot body rectangle and ground-truth collision checking.

use crate::geom::{Point2, Pose2D};
use crate::grid::OccupancyGrid;
use serde::{Deserialize, Serialize};

/// Rectangular robot body.
///
/// `length` runs along the robot's x axis (heading), `width` across it.
/// `center_offset` shifts the rectangle's geometric center forward from the
/// pose origin along the heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotFootprint {
    pub width: f64,
    pub length: f64,
    pub center_offset: f64,
}

impl Default for RobotFootprint {
    fn default() -> Self {
        Self {
            width: 0.43,
            length: 0.508,
            center_offset: 0.0,
        }
    }
}

impl RobotFootprint {
    pub fn new(width: f64, length: f64, center_offset: f64) -> Self {
        assert!(width > 0.0 && length > 0.0, "footprint dims must be positive");
        Self {
            width,
            length,
            center_offset,
        }
    }

    /// Distance from the geometric center to a corner.
    pub fn half_diagonal(&self) -> f64 {
        ((self.width / 2.0).powi(2) + (self.length / 2.0).powi(2)).sqrt()
    }

    /// Containment test for a robot-frame point, with `margin` added on all
    /// four sides. Boundary points count as contained.
    pub fn contains_local(&self, p: Point2, margin: f64) -> bool {
        (p.x - self.center_offset).abs() <= self.length / 2.0 + margin
            && p.y.abs() <= self.width / 2.0 + margin
    }

    /// Containment test for a world-frame point against the footprint placed
    /// at `pose`.
    pub fn contains_world(&self, pose: &Pose2D, p: Point2, margin: f64) -> bool {
        self.contains_local(pose.to_local(p), margin)
    }

    /// World-frame corners of the footprint at `pose` (counterclockwise).
    pub fn corners(&self, pose: &Pose2D, margin: f64) -> [Point2; 4] {
        let hl = self.length / 2.0 + margin;
        let hw = self.width / 2.0 + margin;
        let c = self.center_offset;
        [
            pose.to_world(Point2::new(c + hl, hw)),
            pose.to_world(Point2::new(c - hl, hw)),
            pose.to_world(Point2::new(c - hl, -hw)),
            pose.to_world(Point2::new(c + hl, -hw)),
        ]
    }
}

/// Ground-truth collision: true iff any occupied cell center lies inside the
/// oriented footprint rectangle at `pose`. No inflation is applied; this is
/// the episode-failure predicate, distinct from the safety checks.
pub fn check_collision(grid: &OccupancyGrid, pose: &Pose2D, footprint: &RobotFootprint) -> bool {
    // Only cells under the rectangle's world-axis bounding box can collide.
    let corners = footprint.corners(pose, 0.0);
    let res = grid.resolution();
    let min_x = corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - res;
    let max_x = corners.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + res;
    let min_y = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - res;
    let max_y = corners.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + res;

    let origin = grid.origin();
    let ix0 = (((min_x - origin.x) / res).floor().max(0.0)) as usize;
    let iy0 = (((min_y - origin.y) / res).floor().max(0.0)) as usize;
    let ix1 = ((((max_x - origin.x) / res).ceil()) as usize).min(grid.width());
    let iy1 = ((((max_y - origin.y) / res).ceil()) as usize).min(grid.height());

    for iy in iy0..iy1 {
        for ix in ix0..ix1 {
            if grid.is_occupied(ix, iy)
                && footprint.contains_world(pose, grid.cell_center(ix, iy), 0.0)
            {
                return true;
            }
        }
    }
    false
}
