//! Cave-style cellular automaton over a bordered grid.

use crate::GenParams;
use navbench_core::grid::{OccupancyGrid, FREE, OCCUPIED};
use navbench_core::Point2;
use rand_core::Rng;

/// Uniform draw in [0, 1) from the top 53 bits; independent of any
/// distribution crate so sequences stay stable.
fn unit_f64(rng: &mut impl Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Seed the interior with Bernoulli(initial_fill) cells, keep the border
/// occupied, then run synchronous smoothing passes: a cell turns occupied at
/// `fill_threshold` or more occupied Moore neighbors and free at
/// `clear_threshold` or fewer, otherwise it keeps its state.
pub fn cellular_automaton(params: &GenParams, rng: &mut impl Rng) -> OccupancyGrid {
    let w = params.width;
    let h = params.height;
    let mut grid = OccupancyGrid::new_free(w, h, params.resolution, Point2::new(0.0, 0.0));
    grid.fill_border();
    for iy in 1..h - 1 {
        for ix in 1..w - 1 {
            if unit_f64(rng) < params.initial_fill {
                grid.set(ix, iy, OCCUPIED);
            }
        }
    }
    for _ in 0..params.smoothing_iterations {
        let mut next = grid.clone();
        for iy in 1..h - 1 {
            for ix in 1..w - 1 {
                let mut occupied = 0;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if (dx, dy) == (0, 0) {
                            continue;
                        }
                        let nx = (ix as i64 + dx) as usize;
                        let ny = (iy as i64 + dy) as usize;
                        if grid.is_occupied(nx, ny) {
                            occupied += 1;
                        }
                    }
                }
                if occupied >= params.fill_threshold {
                    next.set(ix, iy, OCCUPIED);
                } else if occupied <= params.clear_threshold {
                    next.set(ix, iy, FREE);
                }
            }
        }
        grid = next;
    }
    grid
}
