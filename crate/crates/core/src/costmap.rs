//! Rolling local costmap with mark-only obstacle history and the rear
//! region-of-interest query used before reversing.

use crate::footprint::RobotFootprint;
use crate::geom::{Point2, Pose2D};
use crate::grid::{OccupancyGrid, FREE, OCCUPIED};
use crate::lidar::LaserScan;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RoiError {
    #[error("rear ROI leaves the costmap window")]
    RoiOutOfWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostmapConfig {
    /// Window side length, meters (square window).
    pub window: f64,
    pub resolution: f64,
    pub occupied_threshold: u8,
    /// Recenter once the robot drifts this far from the anchor.
    pub recenter_threshold: f64,
}

impl Default for CostmapConfig {
    fn default() -> Self {
        Self {
            window: 6.0,
            resolution: 0.05,
            occupied_threshold: 128,
            recenter_threshold: 1.5, // window / 4
        }
    }
}

/// Oriented rectangle directly behind the robot.
///
/// `offset` is the distance from the pose origin back to the ROI's front
/// edge; the rectangle then extends `length` further back and spans `width`
/// across the reversing axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RearRoi {
    pub length: f64,
    pub width: f64,
    pub offset: f64,
}

impl RearRoi {
    /// ROI starting at the rear bumper, slightly wider than the body.
    pub fn behind(footprint: &RobotFootprint) -> Self {
        Self {
            length: 0.5,
            width: footprint.width + 2.0 * 0.04,
            offset: footprint.length / 2.0 - footprint.center_offset,
        }
    }

    /// Robot-frame corners, counterclockwise.
    pub fn corners_local(&self) -> [Point2; 4] {
        let x_front = -self.offset;
        let x_back = -self.offset - self.length;
        let hw = self.width / 2.0;
        [
            Point2::new(x_front, hw),
            Point2::new(x_back, hw),
            Point2::new(x_back, -hw),
            Point2::new(x_front, -hw),
        ]
    }

    /// Containment test for a robot-frame point (boundary counts).
    pub fn contains_local(&self, p: Point2) -> bool {
        p.x <= -self.offset && p.x >= -self.offset - self.length && p.y.abs() <= self.width / 2.0
    }
}

/// Rolling obstacle-memory grid. Beam endpoints mark cells at full cost and
/// marks persist until they scroll out of the window; nothing clears them.
#[derive(Debug, Clone)]
pub struct Costmap {
    grid: OccupancyGrid,
    anchor: Pose2D,
    config: CostmapConfig,
}

impl Costmap {
    pub fn new(anchor: Pose2D, config: CostmapConfig) -> Self {
        let cells = (config.window / config.resolution).round() as usize;
        let origin = Self::snapped_origin(&anchor, &config);
        Self {
            grid: OccupancyGrid::new_free(cells, cells, config.resolution, origin),
            anchor,
            config,
        }
    }

    fn snapped_origin(pose: &Pose2D, config: &CostmapConfig) -> Point2 {
        let half = config.window / 2.0;
        let res = config.resolution;
        Point2::new(
            ((pose.x - half) / res).round() * res,
            ((pose.y - half) / res).round() * res,
        )
    }

    /// Reassemble a costmap from a raw grid, for tools and tests that build
    /// marks directly.
    pub fn from_parts(grid: OccupancyGrid, anchor: Pose2D, config: CostmapConfig) -> Self {
        Self {
            grid,
            anchor,
            config,
        }
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn anchor(&self) -> Pose2D {
        self.anchor
    }

    pub fn config(&self) -> &CostmapConfig {
        &self.config
    }

    /// Shift the window onto a new anchor, keeping marks that stay inside.
    fn recenter(&mut self, pose: &Pose2D) {
        let new_origin = Self::snapped_origin(pose, &self.config);
        let res = self.config.resolution;
        let old_origin = self.grid.origin();
        let dx = ((new_origin.x - old_origin.x) / res).round() as i64;
        let dy = ((new_origin.y - old_origin.y) / res).round() as i64;
        let w = self.grid.width();
        let h = self.grid.height();
        let mut shifted = OccupancyGrid::new_free(w, h, res, new_origin);
        for iy in 0..h {
            for ix in 0..w {
                let sx = ix as i64 + dx;
                let sy = iy as i64 + dy;
                if self.grid.in_bounds(sx, sy) {
                    let v = self.grid.get(sx as usize, sy as usize);
                    if v != FREE {
                        shifted.set(ix, iy, v);
                    }
                }
            }
        }
        self.grid = shifted;
        self.anchor = *pose;
    }

    /// Mark every finite beam endpoint at full cost. Marks never decrease
    /// within one window placement; the window recenters once the robot
    /// drifts past the configured threshold.
    pub fn integrate_scan(&mut self, scan: &LaserScan) {
        let drift = scan.origin.position().distance_to(self.anchor.position());
        if drift > self.config.recenter_threshold {
            self.recenter(&scan.origin);
        }
        for i in 0..scan.count {
            let r = scan.ranges[i];
            if r >= scan.range_max {
                continue;
            }
            let a = scan.origin.theta + scan.beam_angle(i);
            let p = Point2::new(scan.origin.x + r * a.cos(), scan.origin.y + r * a.sin());
            if let Some((ix, iy)) = self.grid.world_to_cell(p) {
                self.grid.set(ix, iy, OCCUPIED);
            }
        }
    }

    /// True iff no remembered obstacle cell center falls inside the rear ROI
    /// placed behind `pose`.
    pub fn roi_clear(&self, pose: &Pose2D, roi: &RearRoi) -> Result<bool, RoiError> {
        // The whole ROI must be answerable from the current window.
        let corners = roi.corners_local().map(|c| pose.to_world(c));
        for c in corners {
            if self.grid.world_to_cell(c).is_none() {
                return Err(RoiError::RoiOutOfWindow);
            }
        }
        let res = self.grid.resolution();
        let origin = self.grid.origin();
        let min_x = corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - res;
        let max_x = corners.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + res;
        let min_y = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - res;
        let max_y = corners.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + res;
        let ix0 = (((min_x - origin.x) / res).floor().max(0.0)) as usize;
        let iy0 = (((min_y - origin.y) / res).floor().max(0.0)) as usize;
        let ix1 = ((((max_x - origin.x) / res).ceil()) as usize).min(self.grid.width());
        let iy1 = ((((max_y - origin.y) / res).ceil()) as usize).min(self.grid.height());
        for iy in iy0..iy1 {
            for ix in ix0..ix1 {
                if self.grid.get(ix, iy) >= self.config.occupied_threshold
                    && roi.contains_local(pose.to_local(self.grid.cell_center(ix, iy)))
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Binary PGM (P5) dump of the cost grid, top row first; obstacles dark.
    pub fn write_pgm<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "P5")?;
        writeln!(out, "{} {}", self.grid.width(), self.grid.height())?;
        writeln!(out, "255")?;
        for iy in (0..self.grid.height()).rev() {
            for ix in 0..self.grid.width() {
                out.write_all(&[255 - self.grid.get(ix, iy)])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lidar::FOV;

    fn synthetic_scan(origin: Pose2D, hits: &[(f64, f64)]) -> LaserScan {
        // hits: (relative angle, range); everything else at range_max. An odd
        // beam count puts one beam at exactly zero relative angle.
        let count = 361;
        let range_max = 10.0;
        let mut ranges = vec![range_max; count];
        let angle_min = -FOV / 2.0;
        let angle_max = FOV / 2.0;
        for &(a, r) in hits {
            let i = ((a - angle_min) / (angle_max - angle_min) * (count - 1) as f64).round();
            ranges[i as usize] = r;
        }
        LaserScan {
            angle_min,
            angle_max,
            count,
            ranges,
            range_max,
            origin,
        }
    }

    #[test]
    fn all_max_scan_changes_nothing() {
        let pose = Pose2D::new(0.0, 0.0, 0.0);
        let mut map = Costmap::new(pose, CostmapConfig::default());
        let before = map.grid().clone();
        map.integrate_scan(&synthetic_scan(pose, &[]));
        assert_eq!(*map.grid(), before);
    }

    #[test]
    fn marks_persist_after_rotating_away() {
        // Position nudged off exact cell boundaries.
        let pose = Pose2D::new(0.001, 0.001, 0.0);
        let mut map = Costmap::new(pose, CostmapConfig::default());
        map.integrate_scan(&synthetic_scan(pose, &[(0.0, 1.003)]));
        let cell = map.grid().world_to_cell(Point2::new(1.004, 0.001)).unwrap();
        assert_eq!(map.grid().get(cell.0, cell.1), OCCUPIED);
        // rotate 180 degrees and scan nothing: the mark stays
        let turned = Pose2D::new(0.001, 0.001, std::f64::consts::PI);
        map.integrate_scan(&synthetic_scan(turned, &[]));
        assert_eq!(map.grid().get(cell.0, cell.1), OCCUPIED);
    }

    #[test]
    fn endpoint_cell_indexing() {
        // Robot facing +x, endpoint 1 m ahead: the mark lands 20 cells ahead
        // of the robot's cell in the same row (0.05 m cells).
        let pose = Pose2D::new(0.001, 0.001, 0.0);
        let mut map = Costmap::new(pose, CostmapConfig::default());
        map.integrate_scan(&synthetic_scan(pose, &[(0.0, 1.003)]));
        let robot_cell = map.grid().world_to_cell(pose.position()).unwrap();
        let hit_cell = map.grid().world_to_cell(Point2::new(1.004, 0.001)).unwrap();
        assert_eq!(hit_cell.0, robot_cell.0 + 20);
        assert_eq!(hit_cell.1, robot_cell.1);
        assert_eq!(map.grid().get(hit_cell.0, hit_cell.1), OCCUPIED);
    }

    #[test]
    fn roi_empty_map_is_clear() {
        let pose = Pose2D::new(0.0, 0.0, 0.0);
        let map = Costmap::new(pose, CostmapConfig::default());
        let roi = RearRoi::behind(&RobotFootprint::default());
        assert!(map.roi_clear(&pose, &roi).unwrap());
    }

    #[test]
    fn marked_cell_behind_rear_bumper_blocks() {
        let pose = Pose2D::new(0.0, 0.0, 0.0);
        let mut map = Costmap::new(pose, CostmapConfig::default());
        let fp = RobotFootprint::default();
        let roi = RearRoi::behind(&fp);
        // 0.2 m behind the rear bumper: rear bumper is at -0.254, so the point
        // sits at x = -0.454, well inside the 0.5 m ROI.
        let behind = Pose2D::new(0.0, 0.0, std::f64::consts::PI);
        map.integrate_scan(&synthetic_scan(behind, &[(0.0, fp.length / 2.0 + 0.2)]));
        assert!(!map.roi_clear(&pose, &roi).unwrap());
    }

    #[test]
    fn lateral_mark_outside_roi_stays_clear() {
        let pose = Pose2D::new(0.0, 0.0, 0.0);
        let mut map = Costmap::new(pose, CostmapConfig::default());
        let fp = RobotFootprint::default();
        let roi = RearRoi::behind(&fp);
        // Mark a cell behind the robot but offset laterally by width/2 plus
        // two cells.
        let lateral = roi.width / 2.0 + 2.0 * map.config().resolution + 0.001;
        let p = Point2::new(-(roi.offset + 0.2), lateral);
        let cell = map.grid().world_to_cell(p).unwrap();
        map.grid.set(cell.0, cell.1, OCCUPIED);
        assert!(map.roi_clear(&pose, &roi).unwrap());
        // Brute-force containment over every marked cell agrees.
        let blocked = map
            .grid()
            .occupied_centers()
            .any(|c| roi.contains_local(pose.to_local(c)));
        assert!(!blocked);
    }

    #[test]
    fn roi_out_of_window_errors() {
        let pose = Pose2D::new(0.0, 0.0, 0.0);
        let map = Costmap::new(pose, CostmapConfig::default());
        let roi = RearRoi::behind(&RobotFootprint::default());
        // Robot teleported to the window edge without integrating a scan:
        // the ROI extends past the stale window.
        let far = Pose2D::new(2.99, 0.0, std::f64::consts::PI);
        assert_eq!(map.roi_clear(&far, &roi).unwrap_err(), RoiError::RoiOutOfWindow);
    }

    #[test]
    fn mark_monotonicity_within_one_placement() {
        let pose = Pose2D::new(0.0, 0.0, 0.0);
        let mut map = Costmap::new(pose, CostmapConfig::default());
        map.integrate_scan(&synthetic_scan(pose, &[(0.3, 1.5), (-0.7, 2.0)]));
        let marked: Vec<(usize, usize)> = (0..map.grid().height())
            .flat_map(|iy| (0..map.grid().width()).map(move |ix| (ix, iy)))
            .filter(|&(ix, iy)| map.grid().is_occupied(ix, iy))
            .collect();
        map.integrate_scan(&synthetic_scan(pose, &[(1.1, 0.8)]));
        for (ix, iy) in marked {
            assert_eq!(map.grid().get(ix, iy), OCCUPIED);
        }
    }

    #[test]
    fn recentering_keeps_overlapping_marks() {
        let pose = Pose2D::new(0.001, 0.001, 0.0);
        let mut map = Costmap::new(pose, CostmapConfig::default());
        map.integrate_scan(&synthetic_scan(pose, &[(0.0, 2.003)]));
        // Drift past the recenter threshold; the mark near (2, 0) stays
        // inside the new window centered on (1.6, 0).
        let moved = Pose2D::new(1.6, 0.001, 0.0);
        map.integrate_scan(&synthetic_scan(moved, &[]));
        let cell = map.grid().world_to_cell(Point2::new(2.004, 0.001)).unwrap();
        assert_eq!(map.grid().get(cell.0, cell.1), OCCUPIED);
        // The window scrolled with the robot; space behind it is now outside.
        assert!((map.grid().origin().x - (-1.4)).abs() < 0.051);
        assert!(map.grid().world_to_cell(Point2::new(-1.5, 0.0)).is_none());
    }

    #[test]
    fn roi_clear_invariant_under_rigid_transform() {
        use rand_core::{Rng, SeedableRng};
        use rand_pcg::Pcg64Mcg;
        let mut rng = Pcg64Mcg::seed_from_u64(0x0c11);
        let fp = RobotFootprint::default();
        let roi = RearRoi::behind(&fp);
        for case in 0..300 {
            // Random marks in the robot neighborhood, interior placements
            // only (at least half a cell away from the ROI boundary) so
            // discretization cannot flip the answer.
            let n = 1 + (rng.next_u64() % 4) as usize;
            let mut locals = Vec::new();
            for _ in 0..n {
                let x = -((rng.next_u64() % 1500) as f64) / 1000.0;
                let y = ((rng.next_u64() % 2000) as f64) / 1000.0 - 1.0;
                let p = Point2::new(x, y);
                let margin = 0.06;
                let near_boundary = (p.x + roi.offset).abs() < margin
                    || (p.x + roi.offset + roi.length).abs() < margin
                    || (p.y.abs() - roi.width / 2.0).abs() < margin;
                if !near_boundary {
                    locals.push(p);
                }
            }
            let expected = locals.iter().any(|&p| roi.contains_local(p));

            let tx = ((rng.next_u64() % 1000) as f64) / 1000.0 - 0.5;
            let ty = ((rng.next_u64() % 1000) as f64) / 1000.0 - 0.5;
            let th = ((rng.next_u64() % 6283) as f64) / 1000.0 - std::f64::consts::PI;
            let pose = Pose2D::new(tx, ty, th);
            let mut map = Costmap::new(pose, CostmapConfig::default());
            for &p in &locals {
                let world = pose.to_world(p);
                let cell = map.grid().world_to_cell(world).unwrap();
                map.grid.set(cell.0, cell.1, OCCUPIED);
            }
            // Cell-center discretization shifts each mark by at most half a
            // cell diagonal; interior sampling keeps the answer stable.
            let got = !map.roi_clear(&pose, &roi).unwrap();
            assert_eq!(got, expected, "case {case} pose {pose:?} locals {locals:?}");
        }
    }
}
