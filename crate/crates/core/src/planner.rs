//! Global path planning on the world grid and lookahead sampling.

use crate::geom::{normalize_angle, Point2, Pose2D};
use crate::grid::{OccupancyGrid, OCCUPIED};
use crate::search::{shortest_path, Heuristic};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("no path between start and goal")]
    NoPath,
    #[error("start cell blocked after dilation")]
    StartBlocked,
    #[error("goal cell blocked after dilation")]
    GoalBlocked,
    #[error("target coincides with the robot position")]
    DegenerateTarget,
}

/// A world-frame polyline with cumulative arclength per waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPath {
    pub waypoints: Vec<Point2>,
    pub cumulative_arclength: Vec<f64>,
    pub straight_steps: u32,
    pub diagonal_steps: u32,
}

impl GlobalPath {
    fn from_cells(grid: &OccupancyGrid, cells: &[(usize, usize)], s: u32, d: u32) -> Self {
        let waypoints: Vec<Point2> = cells.iter().map(|&(x, y)| grid.cell_center(x, y)).collect();
        let mut cumulative = Vec::with_capacity(waypoints.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..waypoints.len() {
            acc += waypoints[i - 1].distance_to(waypoints[i]);
            cumulative.push(acc);
        }
        Self {
            waypoints,
            cumulative_arclength: cumulative,
            straight_steps: s,
            diagonal_steps: d,
        }
    }

    pub fn total_arclength(&self) -> f64 {
        *self.cumulative_arclength.last().unwrap_or(&0.0)
    }

    pub fn goal(&self) -> Point2 {
        *self.waypoints.last().expect("path is never empty")
    }

    /// Dump the active path as CSV (x, y, arclength) for trace tooling.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "x,y,arclength")?;
        for (p, s) in self.waypoints.iter().zip(&self.cumulative_arclength) {
            writeln!(out, "{:.6},{:.6},{:.6}", p.x, p.y, s)?;
        }
        Ok(())
    }
}

/// Expand every obstacle by `radius`: a cell becomes occupied when any
/// occupied cell center lies within `radius` of its center.
pub fn dilate(grid: &OccupancyGrid, radius: f64) -> OccupancyGrid {
    if radius <= 0.0 {
        return grid.clone();
    }
    let res = grid.resolution();
    let r_cells = (radius / res).ceil() as i64;
    let r2 = radius * radius;
    let mut out = grid.clone();
    for iy in 0..grid.height() {
        for ix in 0..grid.width() {
            if !grid.is_occupied(ix, iy) {
                continue;
            }
            for dy in -r_cells..=r_cells {
                for dx in -r_cells..=r_cells {
                    let nx = ix as i64 + dx;
                    let ny = iy as i64 + dy;
                    if !grid.in_bounds(nx, ny) {
                        continue;
                    }
                    let world = (dx as f64 * res, dy as f64 * res);
                    if world.0 * world.0 + world.1 * world.1 <= r2 {
                        out.set(nx as usize, ny as usize, OCCUPIED);
                    }
                }
            }
        }
    }
    out
}

/// Dijkstra over the obstacle-dilated grid, 8-connected, waypoints at cell
/// centers.
pub fn plan_global(
    grid: &OccupancyGrid,
    start: &Pose2D,
    goal: Point2,
    robot_radius: f64,
) -> Result<GlobalPath, PlanError> {
    let dilated = dilate(grid, robot_radius);
    plan_on_dilated(&dilated, start, goal)
}

/// How far (in cells) the planner searches for a free start cell when the
/// robot sits inside the dilated obstacle band.
const START_SNAP_CELLS: i64 = 5;

/// Planning core for callers that keep a pre-dilated grid (the world is
/// static, so episodes dilate once).
///
/// A robot that has strayed into the dilated band would otherwise be
/// unplannable from its own cell; the start snaps to the nearest free cell
/// within a small radius, mirroring how grid planners treat the robot cell.
/// `StartBlocked` means no free cell exists in that neighborhood.
pub fn plan_on_dilated(
    dilated: &OccupancyGrid,
    start: &Pose2D,
    goal: Point2,
) -> Result<GlobalPath, PlanError> {
    let start_cell = dilated
        .world_to_cell(start.position())
        .ok_or(PlanError::StartBlocked)?;
    let goal_cell = dilated.world_to_cell(goal).ok_or(PlanError::GoalBlocked)?;
    let start_cell = snap_to_free(dilated, start_cell).ok_or(PlanError::StartBlocked)?;
    if dilated.is_occupied(goal_cell.0, goal_cell.1) {
        return Err(PlanError::GoalBlocked);
    }
    let result =
        shortest_path(dilated, start_cell, goal_cell, Heuristic::None).ok_or(PlanError::NoPath)?;
    Ok(GlobalPath::from_cells(
        dilated,
        &result.cells,
        result.straight_steps,
        result.diagonal_steps,
    ))
}

/// Nearest free cell by center distance (ties on cell index), or None when
/// the whole neighborhood is blocked.
fn snap_to_free(grid: &OccupancyGrid, cell: (usize, usize)) -> Option<(usize, usize)> {
    if !grid.is_occupied(cell.0, cell.1) {
        return Some(cell);
    }
    let mut best: Option<((usize, usize), f64)> = None;
    for dy in -START_SNAP_CELLS..=START_SNAP_CELLS {
        for dx in -START_SNAP_CELLS..=START_SNAP_CELLS {
            let nx = cell.0 as i64 + dx;
            let ny = cell.1 as i64 + dy;
            if !grid.in_bounds(nx, ny) || grid.is_occupied(nx as usize, ny as usize) {
                continue;
            }
            let d2 = (dx * dx + dy * dy) as f64;
            let candidate = ((nx as usize, ny as usize), d2);
            best = match best {
                None => Some(candidate),
                Some((bc, bd)) => {
                    if d2 < bd || (d2 == bd && (candidate.0 .1, candidate.0 .0) < (bc.1, bc.0)) {
                        Some(candidate)
                    } else {
                        Some((bc, bd))
                    }
                }
            };
        }
    }
    best.map(|(c, _)| c)
}

/// Point on the path `distance` further along the arclength from the robot's
/// closest point on the polyline, clamped to the final waypoint.
pub fn sample_lookahead(path: &GlobalPath, pose: &Pose2D, distance: f64) -> Point2 {
    let wp = &path.waypoints;
    if wp.len() == 1 {
        return wp[0];
    }
    let p = pose.position();

    // Nearest point on the polyline (projection onto each segment).
    let mut best_d2 = f64::INFINITY;
    let mut best_s = 0.0;
    for i in 0..wp.len() - 1 {
        let a = wp[i];
        let b = wp[i + 1];
        let abx = b.x - a.x;
        let aby = b.y - a.y;
        let len2 = abx * abx + aby * aby;
        let t = if len2 > 0.0 {
            (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = Point2::new(a.x + t * abx, a.y + t * aby);
        let d2 = (q.x - p.x).powi(2) + (q.y - p.y).powi(2);
        if d2 < best_d2 {
            best_d2 = d2;
            best_s = path.cumulative_arclength[i] + t * len2.sqrt();
        }
    }

    let target_s = best_s + distance;
    let total = path.total_arclength();
    if target_s >= total {
        return *wp.last().unwrap();
    }
    // Locate the segment containing target_s and interpolate.
    let cum = &path.cumulative_arclength;
    let mut i = match cum.binary_search_by(|c| c.total_cmp(&target_s)) {
        Ok(k) => k,
        Err(k) => k.saturating_sub(1),
    };
    if i >= wp.len() - 1 {
        i = wp.len() - 2;
    }
    let seg = cum[i + 1] - cum[i];
    let t = if seg > 0.0 { (target_s - cum[i]) / seg } else { 0.0 };
    Point2::new(
        wp[i].x + t * (wp[i + 1].x - wp[i].x),
        wp[i].y + t * (wp[i + 1].y - wp[i].y),
    )
}

/// Signed smallest angle from the robot heading to the bearing of `target`,
/// in `(-pi, pi]`.
pub fn heading_error(pose: &Pose2D, target: Point2) -> Result<f64, PlanError> {
    let dx = target.x - pose.x;
    let dy = target.y - pose.y;
    if (dx * dx + dy * dy).sqrt() < 1e-6 {
        return Err(PlanError::DegenerateTarget);
    }
    Ok(normalize_angle(dy.atan2(dx) - pose.theta))
}
