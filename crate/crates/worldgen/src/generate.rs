//! Connectivity validation, difficulty rating, and the generation loop.

use crate::{cellular_automaton, mix_seed, GenError, GenParams, WorldSpec};
use navbench_core::grid::{OccupancyGrid, FREE};
use navbench_core::search::{shortest_path, Heuristic};
use navbench_core::{Point2, Pose2D};
use rand_core::SeedableRng;
use rand_pcg::Pcg64Mcg;
use std::collections::VecDeque;

/// Start/goal clearance disc radius, meters. Covers the default footprint's
/// half-diagonal (0.333 m) with margin so the dilated planner start stays
/// free.
pub const CLEARANCE_RADIUS: f64 = 0.50;

/// Nominal top speed used for optimal traversal time, m/s.
pub const NOMINAL_SPEED: f64 = 2.0;

const DEFAULT_MAX_ATTEMPTS: usize = 100;

/// Fixed start (bottom-center) and goal (top-center) cells for a grid of the
/// given dimensions.
pub fn start_goal_cells(width: usize, height: usize) -> ((usize, usize), (usize, usize)) {
    ((width / 2, 3), (width / 2, height - 4))
}

/// 4-connected reachability between two free cells.
pub fn flood_fill_connected(
    grid: &OccupancyGrid,
    start: (usize, usize),
    goal: (usize, usize),
) -> Result<bool, GenError> {
    if grid.is_occupied(start.0, start.1) || grid.is_occupied(goal.0, goal.1) {
        return Err(GenError::CellOccupied);
    }
    let w = grid.width();
    let mut seen = vec![false; w * grid.height()];
    let mut queue = VecDeque::new();
    seen[start.1 * w + start.0] = true;
    queue.push_back(start);
    while let Some((ix, iy)) = queue.pop_front() {
        if (ix, iy) == goal {
            return Ok(true);
        }
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let nx = ix as i64 + dx;
            let ny = iy as i64 + dy;
            if grid.in_bounds(nx, ny)
                && !grid.is_occupied(nx as usize, ny as usize)
                && !seen[ny as usize * w + nx as usize]
            {
                seen[ny as usize * w + nx as usize] = true;
                queue.push_back((nx as usize, ny as usize));
            }
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub cells: Vec<(usize, usize)>,
    /// Metric length: straight steps + sqrt(2) * diagonal steps, scaled by
    /// the grid resolution.
    pub length: f64,
    pub straight_steps: u32,
    pub diagonal_steps: u32,
}

/// Minimal-cost 8-connected path with octile A*; straight steps cost one
/// resolution, diagonals sqrt(2) resolutions.
pub fn astar_path(
    grid: &OccupancyGrid,
    start: (usize, usize),
    goal: (usize, usize),
) -> Result<PathResult, GenError> {
    let r = shortest_path(grid, start, goal, Heuristic::Octile).ok_or(GenError::NoPath)?;
    Ok(PathResult {
        length: r.length(grid.resolution()),
        straight_steps: r.straight_steps,
        diagonal_steps: r.diagonal_steps,
        cells: r.cells,
    })
}

fn carve_disc(grid: &mut OccupancyGrid, center: Point2, radius: f64) {
    for iy in 1..grid.height() - 1 {
        for ix in 1..grid.width() - 1 {
            if grid.cell_center(ix, iy).distance_to(center) <= radius {
                grid.set(ix, iy, FREE);
            }
        }
    }
}

/// Generate one course: run the automaton on fresh sub-seeds until flood fill
/// connects the fixed endpoints, carve clearance discs around them, rate the
/// course by A* length, and stamp the optimal traversal time. Gives up after
/// 100 attempts; use [`generate_world_with_attempts`] for a different budget.
pub fn generate_world(params: &GenParams) -> Result<WorldSpec, GenError> {
    generate_world_with_attempts(params, DEFAULT_MAX_ATTEMPTS)
}

pub fn generate_world_with_attempts(
    params: &GenParams,
    max_attempts: usize,
) -> Result<WorldSpec, GenError> {
    params.validate()?;
    let (start_cell, goal_cell) = start_goal_cells(params.width, params.height);
    for attempt in 0..max_attempts {
        let sub_seed = mix_seed(params.seed, attempt as u64);
        let mut rng = Pcg64Mcg::seed_from_u64(sub_seed);
        let mut grid = cellular_automaton(params, &mut rng);
        let start_center = grid.cell_center(start_cell.0, start_cell.1);
        let goal_center = grid.cell_center(goal_cell.0, goal_cell.1);
        carve_disc(&mut grid, start_center, CLEARANCE_RADIUS);
        carve_disc(&mut grid, goal_center, CLEARANCE_RADIUS);
        if !flood_fill_connected(&grid, start_cell, goal_cell)? {
            continue;
        }
        let path = astar_path(&grid, start_cell, goal_cell)?;
        let start_pose = Pose2D::new(
            start_center.x,
            start_center.y,
            (goal_center.y - start_center.y).atan2(goal_center.x - start_center.x),
        );
        return Ok(WorldSpec {
            grid,
            start: start_pose,
            goal: goal_center,
            path_length: path.length,
            optimal_time: path.length / NOMINAL_SPEED,
            params: *params,
        });
    }
    Err(GenError::GenerationExhausted(max_attempts))
}
