//! Occupancy grids shared by worlds and costmaps.

use crate::geom::Point2;

/// Cell value for free space.
pub const FREE: u8 = 0;
/// Cell value for a (lethal) obstacle.
pub const OCCUPIED: u8 = 255;

/// A row-major cell grid anchored in the world frame.
///
/// World grids are binary (`FREE` / `OCCUPIED`); costmaps reuse the same
/// storage with intermediate cost bytes. `origin` is the world position of
/// the lower-left corner of cell `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Point2,
    cells: Vec<u8>,
}

impl OccupancyGrid {
    pub fn new_free(width: usize, height: usize, resolution: f64, origin: Point2) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        assert!(resolution > 0.0, "resolution must be positive");
        Self {
            width,
            height,
            resolution,
            origin,
            cells: vec![FREE; width * height],
        }
    }

    /// Build a grid from ASCII art. `#` marks occupied cells, anything else is
    /// free. The first line is the top row of the grid (highest y index).
    pub fn from_ascii(art: &str, resolution: f64, origin: Point2) -> Self {
        let rows: Vec<&str> = art.lines().filter(|l| !l.trim().is_empty()).collect();
        let height = rows.len();
        let width = rows.iter().map(|r| r.trim_end().len()).max().unwrap_or(0);
        let mut grid = Self::new_free(width, height, resolution, origin);
        for (r, line) in rows.iter().enumerate() {
            let iy = height - 1 - r;
            for (ix, ch) in line.chars().enumerate() {
                if ch == '#' {
                    grid.set(ix, iy, OCCUPIED);
                }
            }
        }
        grid
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    fn idx(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.width && iy < self.height);
        iy * self.width + ix
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> u8 {
        self.cells[self.idx(ix, iy)]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, value: u8) {
        let i = self.idx(ix, iy);
        self.cells[i] = value;
    }

    #[inline]
    pub fn is_occupied(&self, ix: usize, iy: usize) -> bool {
        self.get(ix, iy) != FREE
    }

    #[inline]
    pub fn in_bounds(&self, ix: i64, iy: i64) -> bool {
        ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height
    }

    /// Cell containing a world point, or None when outside the grid.
    pub fn world_to_cell(&self, p: Point2) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let ix = fx.floor() as usize;
        let iy = fy.floor() as usize;
        if ix < self.width && iy < self.height {
            Some((ix, iy))
        } else {
            None
        }
    }

    /// World position of a cell's center.
    pub fn cell_center(&self, ix: usize, iy: usize) -> Point2 {
        Point2::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    /// Mark every border cell occupied.
    pub fn fill_border(&mut self) {
        for ix in 0..self.width {
            self.set(ix, 0, OCCUPIED);
            self.set(ix, self.height - 1, OCCUPIED);
        }
        for iy in 0..self.height {
            self.set(0, iy, OCCUPIED);
            self.set(self.width - 1, iy, OCCUPIED);
        }
    }

    /// Iterator over the centers of all occupied cells.
    pub fn occupied_centers(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.height).flat_map(move |iy| {
            (0..self.width).filter_map(move |ix| {
                if self.is_occupied(ix, iy) {
                    Some(self.cell_center(ix, iy))
                } else {
                    None
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_cell_round_trip() {
        let g = OccupancyGrid::new_free(10, 8, 0.5, Point2::new(-1.0, 2.0));
        let c = g.cell_center(3, 4);
        assert_eq!(g.world_to_cell(c), Some((3, 4)));
        assert_eq!(g.world_to_cell(Point2::new(-1.01, 2.5)), None);
        assert_eq!(g.world_to_cell(Point2::new(4.1, 2.5)), None);
    }

    #[test]
    fn ascii_orientation() {
        let g = OccupancyGrid::from_ascii("#..\n...\n..#", 1.0, Point2::new(0.0, 0.0));
        assert_eq!(g.width(), 3);
        assert_eq!(g.height(), 3);
        // top-left '#' is (0, 2); bottom-right '#' is (2, 0)
        assert!(g.is_occupied(0, 2));
        assert!(g.is_occupied(2, 0));
        assert!(!g.is_occupied(1, 1));
    }
}
