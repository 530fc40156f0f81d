//! Axis-aligned grid geometry and world/cell conversion.
//!
//! Cells are addressed by `(col, row)`; column grows with world `x` and row
//! grows with world `y`. Storage everywhere in the crate is row-major:
//! `index = row * width + col`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid cell coordinates. Signed so that neighbor arithmetic can step off the
/// grid and be rejected by [`GridGeometry::index`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub col: i32,
    pub row: i32,
}

impl Cell {
    pub const fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }

    /// Ordering key used for deterministic tie-breaking: row first, then column.
    pub fn row_major_key(self) -> (i32, i32) {
        (self.row, self.col)
    }

    pub fn offset(self, dc: i32, dr: i32) -> Cell {
        Cell::new(self.col + dc, self.row + dr)
    }

    /// True when `other` is one king move away (distinct and Chebyshev distance 1).
    pub fn is_adjacent(self, other: Cell) -> bool {
        let dc = (self.col - other.col).abs();
        let dr = (self.row - other.row).abs();
        dc <= 1 && dr <= 1 && (dc + dr) > 0
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.col.abs_diff(other.col) + self.row.abs_diff(other.row)
    }
}

/// The eight king moves, in a fixed order shared by the MDP and the planners.
pub const KING_MOVES: [(i32, i32); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Length of a king move in cells.
pub fn step_length(dc: i32, dr: i32) -> f64 {
    if dc != 0 && dr != 0 {
        std::f64::consts::SQRT_2
    } else {
        1.0
    }
}

/// A world point in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rectangle of cells, `col0..col0+width` by `row0..row0+height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub col0: i32,
    pub row0: i32,
    pub width: usize,
    pub height: usize,
}

impl CellRect {
    /// Smallest rectangle covering `cells`, or `None` for an empty slice.
    pub fn bounding(cells: &[Cell]) -> Option<CellRect> {
        let first = cells.first()?;
        let (mut c0, mut c1, mut r0, mut r1) = (first.col, first.col, first.row, first.row);
        for c in cells {
            c0 = c0.min(c.col);
            c1 = c1.max(c.col);
            r0 = r0.min(c.row);
            r1 = r1.max(c.row);
        }
        Some(CellRect {
            col0: c0,
            row0: r0,
            width: (c1 - c0 + 1) as usize,
            height: (r1 - r0 + 1) as usize,
        })
    }

    pub fn expand(self, margin: usize) -> CellRect {
        let m = margin as i32;
        CellRect {
            col0: self.col0 - m,
            row0: self.row0 - m,
            width: self.width + 2 * margin,
            height: self.height + 2 * margin,
        }
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.col >= self.col0
            && cell.row >= self.row0
            && cell.col < self.col0 + self.width as i32
            && cell.row < self.row0 + self.height as i32
    }
}

/// Size, resolution and placement of a grid in the world frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    #[serde(rename = "resolution_m")]
    pub resolution: f64,
    #[serde(rename = "origin_x_m")]
    pub origin_x: f64,
    #[serde(rename = "origin_y_m")]
    pub origin_y: f64,
}

/// Default cell size in meters.
pub const DEFAULT_RESOLUTION: f64 = 0.5;

impl GridGeometry {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Point) -> Result<Self> {
        let g = Self {
            width,
            height,
            resolution,
            origin_x: origin.x,
            origin_y: origin.y,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::InvalidGeometry(format!(
                "grid must be at least 2x2, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        if !(self.origin_x.is_finite() && self.origin_y.is_finite()) {
            return Err(Error::InvalidGeometry("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.col >= 0
            && cell.row >= 0
            && (cell.col as usize) < self.width
            && (cell.row as usize) < self.height
    }

    pub fn index(&self, cell: Cell) -> Option<usize> {
        self.contains(cell)
            .then(|| cell.row as usize * self.width + cell.col as usize)
    }

    pub fn checked_index(&self, cell: Cell) -> Result<usize> {
        self.index(cell).ok_or(Error::OutOfBounds(cell))
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn center_of(&self, cell: Cell) -> Point {
        Point::new(
            self.origin_x + (cell.col as f64 + 0.5) * self.resolution,
            self.origin_y + (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing `p`; may lie outside the grid.
    pub fn cell_of(&self, p: Point) -> Cell {
        Cell::new(
            ((p.x - self.origin_x) / self.resolution).floor() as i32,
            ((p.y - self.origin_y) / self.resolution).floor() as i32,
        )
    }

    pub fn bounds(&self) -> CellRect {
        CellRect {
            col0: 0,
            row0: 0,
            width: self.width,
            height: self.height,
        }
    }

    /// Clip `rect` to the grid.
    pub fn clip(&self, rect: CellRect) -> CellRect {
        let c0 = rect.col0.max(0);
        let r0 = rect.row0.max(0);
        let c1 = (rect.col0 + rect.width as i32).min(self.width as i32);
        let r1 = (rect.row0 + rect.height as i32).min(self.height as i32);
        CellRect {
            col0: c0,
            row0: r0,
            width: (c1 - c0).max(0) as usize,
            height: (r1 - r0).max(0) as usize,
        }
    }

    /// Geometry of a sub-window; world coordinates are preserved.
    pub fn window(&self, rect: CellRect) -> Result<GridGeometry> {
        if rect.col0 < 0
            || rect.row0 < 0
            || rect.col0 as usize + rect.width > self.width
            || rect.row0 as usize + rect.height > self.height
        {
            return Err(Error::InvalidGeometry(format!(
                "window {rect:?} exceeds {}x{} grid",
                self.width, self.height
            )));
        }
        GridGeometry::new(
            rect.width,
            rect.height,
            self.resolution,
            Point::new(
                self.origin_x + rect.col0 as f64 * self.resolution,
                self.origin_y + rect.row0 as f64 * self.resolution,
            ),
        )
    }

    /// Exact equality of grid placement, used to check that layers line up.
    pub fn same_grid(&self, other: &GridGeometry) -> bool {
        self == other
    }

    /// In-bounds king-move neighbors of `cell` with their move index.
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = (usize, Cell)> + '_ {
        KING_MOVES
            .iter()
            .enumerate()
            .map(move |(a, &(dc, dr))| (a, cell.offset(dc, dr)))
            .filter(move |(_, n)| self.contains(*n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridGeometry::new(1, 5, 0.5, Point::new(0.0, 0.0)).is_err());
        assert!(GridGeometry::new(5, 5, 0.0, Point::new(0.0, 0.0)).is_err());
        assert!(GridGeometry::new(5, 5, -1.0, Point::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn window_keeps_world_frame() {
        let g = GridGeometry::new(10, 8, 0.5, Point::new(-2.0, 3.0)).unwrap();
        let rect = CellRect { col0: 3, row0: 2, width: 4, height: 4 };
        let w = g.window(rect).unwrap();
        assert_eq!(w.center_of(Cell::new(0, 0)), g.center_of(Cell::new(3, 2)));
        assert!(g.window(CellRect { col0: 8, row0: 0, width: 4, height: 2 }).is_err());
    }

    #[test]
    fn adjacency() {
        let c = Cell::new(2, 2);
        assert!(c.is_adjacent(Cell::new(3, 3)));
        assert!(!c.is_adjacent(c));
        assert!(!c.is_adjacent(Cell::new(4, 2)));
    }

    proptest! {
        #[test]
        fn world_cell_round_trip(
            w in 2usize..60, h in 2usize..60,
            res in 0.05f64..3.0,
            ox in -100.0f64..100.0, oy in -100.0f64..100.0,
            seed in any::<u64>(),
        ) {
            let g = GridGeometry::new(w, h, res, Point::new(ox, oy)).unwrap();
            let idx = (seed as usize) % g.len();
            let c = g.cell(idx);
            prop_assert_eq!(g.cell_of(g.center_of(c)), c);
            prop_assert_eq!(g.index(c), Some(idx));
        }
    }
}
