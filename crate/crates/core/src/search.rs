//! 8-connected grid shortest paths with exact step-count costs.
//!
//! Costs are carried as (straight, diagonal) step counts and compared through
//! the key `straight + sqrt(2) * diagonal`, recomputed from the counts at
//! every comparison. Two logically equal paths therefore always produce the
//! same key bits, which keeps Dijkstra and A*-with-octile results exactly
//! comparable. Ties break on the lower cell index.

use crate::grid::OccupancyGrid;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    /// Plain Dijkstra.
    None,
    /// Octile distance, admissible for unit/sqrt(2) step costs.
    Octile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Cells from start to goal inclusive.
    pub cells: Vec<Cell>,
    pub straight_steps: u32,
    pub diagonal_steps: u32,
}

impl SearchResult {
    /// Metric path length for a given cell size.
    pub fn length(&self, resolution: f64) -> f64 {
        (self.straight_steps as f64 + SQRT_2 * self.diagonal_steps as f64) * resolution
    }

    /// Length in cell units, exact function of the step counts.
    pub fn cost_key(&self) -> f64 {
        self.straight_steps as f64 + SQRT_2 * self.diagonal_steps as f64
    }
}

#[inline]
fn key(straight: u32, diagonal: u32) -> f64 {
    straight as f64 + SQRT_2 * diagonal as f64
}

/// Octile distance between two cells, in cell units.
pub fn octile_distance(a: Cell, b: Cell) -> f64 {
    let dx = (a.0 as i64 - b.0 as i64).unsigned_abs();
    let dy = (a.1 as i64 - b.1 as i64).unsigned_abs();
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    lo as f64 * SQRT_2 + (hi - lo) as f64
}

struct HeapEntry {
    f: f64,
    tie: usize,
    cell: Cell,
    straight: u32,
    diagonal: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.tie == other.tie
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert for smallest-first.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.tie.cmp(&self.tie))
    }
}

const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Minimal-cost 8-connected path over free cells, or None when unreachable.
/// Straight steps cost one cell, diagonal steps sqrt(2) cells.
pub fn shortest_path(
    grid: &OccupancyGrid,
    start: Cell,
    goal: Cell,
    heuristic: Heuristic,
) -> Option<SearchResult> {
    let w = grid.width();
    let h = grid.height();
    if start.0 >= w || start.1 >= h || goal.0 >= w || goal.1 >= h {
        return None;
    }
    if grid.is_occupied(start.0, start.1) || grid.is_occupied(goal.0, goal.1) {
        return None;
    }

    let idx = |c: Cell| c.1 * w + c.0;
    let mut best: Vec<Option<(u32, u32)>> = vec![None; w * h];
    let mut parent: Vec<usize> = vec![usize::MAX; w * h];
    let mut closed = vec![false; w * h];
    let mut heap = BinaryHeap::new();

    let h_of = |c: Cell| match heuristic {
        Heuristic::None => 0.0,
        Heuristic::Octile => octile_distance(c, goal),
    };

    best[idx(start)] = Some((0, 0));
    heap.push(HeapEntry {
        f: h_of(start),
        tie: idx(start),
        cell: start,
        straight: 0,
        diagonal: 0,
    });

    while let Some(entry) = heap.pop() {
        let ci = idx(entry.cell);
        if closed[ci] {
            continue;
        }
        // Stale entry: a better pair was recorded after this push.
        match best[ci] {
            Some(pair) if pair != (entry.straight, entry.diagonal) => continue,
            _ => {}
        }
        closed[ci] = true;
        if entry.cell == goal {
            let mut cells = vec![goal];
            let mut cur = ci;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push((cur % w, cur / w));
            }
            cells.reverse();
            return Some(SearchResult {
                cells,
                straight_steps: entry.straight,
                diagonal_steps: entry.diagonal,
            });
        }
        for (dx, dy) in NEIGHBORS {
            let nx = entry.cell.0 as i64 + dx;
            let ny = entry.cell.1 as i64 + dy;
            if !grid.in_bounds(nx, ny) {
                continue;
            }
            let ncell = (nx as usize, ny as usize);
            if grid.is_occupied(ncell.0, ncell.1) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            let (ns, nd) = if diagonal {
                (entry.straight, entry.diagonal + 1)
            } else {
                (entry.straight + 1, entry.diagonal)
            };
            let ni = idx(ncell);
            let improves = match best[ni] {
                None => true,
                Some((bs, bd)) => key(ns, nd) < key(bs, bd),
            };
            if improves {
                best[ni] = Some((ns, nd));
                parent[ni] = ci;
                heap.push(HeapEntry {
                    f: key(ns, nd) + h_of(ncell),
                    tie: ni,
                    cell: ncell,
                    straight: ns,
                    diagonal: nd,
                });
            }
        }
    }
    None
}
