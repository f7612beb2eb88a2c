//! Occupancy grid and exact-cost A* global planner.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::Add;

use super::geometry::{Polygon, Rect, Vec2};

/// Side length of a navigation cell in meters.
pub const CELL_SIZE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

/// Path cost on the 8-connected grid, kept as move counts so that
/// `straight + diagonal * sqrt(2)` is compared exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct OctileCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl OctileCost {
    pub const ZERO: OctileCost = OctileCost {
        straight: 0,
        diagonal: 0,
    };

    /// Octile distance between two cells (admissible and consistent).
    pub fn between(a: Cell, b: Cell) -> Self {
        let dx = a.x.abs_diff(b.x) as u32;
        let dy = a.y.abs_diff(b.y) as u32;
        Self {
            straight: dx.max(dy) - dx.min(dy),
            diagonal: dx.min(dy),
        }
    }

    /// Cost in cell units.
    pub fn value(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }
}

impl Add for OctileCost {
    type Output = OctileCost;
    fn add(self, rhs: Self) -> Self {
        Self {
            straight: self.straight + rhs.straight,
            diagonal: self.diagonal + rhs.diagonal,
        }
    }
}

impl Ord for OctileCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare s1 + d1*r against s2 + d2*r with r = sqrt(2) irrational:
        // sign of ds + dd*r where ds = s1 - s2, dd = d1 - d2.
        let ds = self.straight as i128 - other.straight as i128;
        let dd = self.diagonal as i128 - other.diagonal as i128;
        match (ds.signum(), dd.signum()) {
            (0, 0) => Ordering::Equal,
            (s, d) if s >= 0 && d >= 0 => Ordering::Greater,
            (s, d) if s <= 0 && d <= 0 => Ordering::Less,
            // Opposite signs: compare |ds| with |dd|*sqrt(2) via squares.
            (s, _) => {
                let lhs = ds * ds;
                let rhs = 2 * dd * dd;
                let straight_wins = lhs > rhs;
                match (s > 0, straight_wins) {
                    (true, true) | (false, false) => Ordering::Greater,
                    _ => Ordering::Less,
                }
            }
        }
    }
}

impl PartialOrd for OctileCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Boolean occupancy grid. Row-major, `y` grows with world `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct NavGrid {
    pub origin: Vec2,
    pub cols: usize,
    pub rows: usize,
    blocked: Vec<bool>,
}

/// A planned route.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub cells: Vec<Cell>,
    pub cost: OctileCost,
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

impl NavGrid {
    /// Free grid of the given size with `origin` at the lower-left corner.
    pub fn empty(origin: Vec2, cols: usize, rows: usize) -> Self {
        Self {
            origin,
            cols,
            rows,
            blocked: vec![false; cols * rows],
        }
    }

    /// Rasterizes obstacles: a cell is blocked iff it intersects one.
    pub fn from_obstacles(bounds: &Rect, obstacles: &[Polygon]) -> Self {
        let cols = (bounds.width() / CELL_SIZE).ceil().max(1.0) as usize;
        let rows = (bounds.height() / CELL_SIZE).ceil().max(1.0) as usize;
        let mut grid = Self::empty(bounds.min, cols, rows);
        for y in 0..rows {
            for x in 0..cols {
                let (lo, hi) = grid.cell_rect(Cell::new(x, y));
                if obstacles.iter().any(|o| o.intersects_rect(&lo, &hi)) {
                    grid.set_blocked(Cell::new(x, y), true);
                }
            }
        }
        grid
    }

    pub fn cell_rect(&self, c: Cell) -> (Vec2, Vec2) {
        let lo = self.origin + Vec2::new(c.x as f64, c.y as f64) * CELL_SIZE;
        (lo, lo + Vec2::new(CELL_SIZE, CELL_SIZE))
    }

    pub fn cell_center(&self, c: Cell) -> Vec2 {
        self.origin + Vec2::new(c.x as f64 + 0.5, c.y as f64 + 0.5) * CELL_SIZE
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: &Vec2) -> Cell {
        let rel = (p - self.origin) / CELL_SIZE;
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        Cell::new(clamp(rel.x, self.cols), clamp(rel.y, self.rows))
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        self.blocked[c.y * self.cols + c.x]
    }

    pub fn set_blocked(&mut self, c: Cell, blocked: bool) {
        self.blocked[c.y * self.cols + c.x] = blocked;
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    /// Traversable neighbors of `c` with their step cost. Diagonal moves
    /// require both adjacent orthogonal cells to be free (no corner cutting).
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = (Cell, OctileCost)> + '_ {
        NEIGHBORS.iter().filter_map(move |&(dx, dy)| {
            let n = self.offset(c, dx, dy)?;
            if self.is_blocked(n) {
                return None;
            }
            if dx != 0 && dy != 0 {
                let a = self.offset(c, dx, 0)?;
                let b = self.offset(c, 0, dy)?;
                if self.is_blocked(a) || self.is_blocked(b) {
                    return None;
                }
                Some((
                    n,
                    OctileCost {
                        straight: 0,
                        diagonal: 1,
                    },
                ))
            } else {
                Some((
                    n,
                    OctileCost {
                        straight: 1,
                        diagonal: 0,
                    },
                ))
            }
        })
    }

    fn offset(&self, c: Cell, dx: i64, dy: i64) -> Option<Cell> {
        let x = c.x as i64 + dx;
        let y = c.y as i64 + dy;
        if x < 0 || y < 0 || x >= self.cols as i64 || y >= self.rows as i64 {
            None
        } else {
            Some(Cell::new(x as usize, y as usize))
        }
    }

    /// Nearest free cell to `c` by breadth-first search (itself when free).
    pub fn nearest_free(&self, c: Cell) -> Option<Cell> {
        if !self.is_blocked(c) {
            return Some(c);
        }
        let mut seen = vec![false; self.cols * self.rows];
        let mut queue = std::collections::VecDeque::from([c]);
        seen[c.y * self.cols + c.x] = true;
        while let Some(cur) = queue.pop_front() {
            for &(dx, dy) in &NEIGHBORS[..4] {
                if let Some(n) = self.offset(cur, dx, dy) {
                    let idx = n.y * self.cols + n.x;
                    if seen[idx] {
                        continue;
                    }
                    if !self.is_blocked(n) {
                        return Some(n);
                    }
                    seen[idx] = true;
                    queue.push_back(n);
                }
            }
        }
        None
    }

    /// A* with octile heuristic. Among equal `f`, the open cell with lower
    /// `(y, x)` is expanded first. `None` when the goal is unreachable or
    /// either endpoint is blocked.
    pub fn astar(&self, start: Cell, goal: Cell) -> Option<GridPath> {
        if self.is_blocked(start) || self.is_blocked(goal) {
            return None;
        }
        #[derive(PartialEq, Eq)]
        struct Open {
            f: OctileCost,
            g: OctileCost,
            cell: Cell,
        }
        impl Ord for Open {
            fn cmp(&self, other: &Self) -> Ordering {
                // BinaryHeap is a max-heap: invert.
                other
                    .f
                    .cmp(&self.f)
                    .then_with(|| (other.cell.y, other.cell.x).cmp(&(self.cell.y, self.cell.x)))
            }
        }
        impl PartialOrd for Open {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let n = self.cols * self.rows;
        let idx = |c: Cell| c.y * self.cols + c.x;
        let mut best: Vec<Option<OctileCost>> = vec![None; n];
        let mut parent: Vec<Option<Cell>> = vec![None; n];
        let mut closed = vec![false; n];
        let mut open = BinaryHeap::new();
        best[idx(start)] = Some(OctileCost::ZERO);
        open.push(Open {
            f: OctileCost::between(start, goal),
            g: OctileCost::ZERO,
            cell: start,
        });

        while let Some(Open { g, cell, .. }) = open.pop() {
            if closed[idx(cell)] {
                continue;
            }
            closed[idx(cell)] = true;
            if cell == goal {
                let mut cells = vec![cell];
                let mut cur = cell;
                while let Some(p) = parent[idx(cur)] {
                    cells.push(p);
                    cur = p;
                }
                cells.reverse();
                return Some(GridPath { cells, cost: g });
            }
            for (next, step) in self.neighbors(cell) {
                if closed[idx(next)] {
                    continue;
                }
                let tentative = g + step;
                if best[idx(next)].is_none_or(|b| tentative < b) {
                    best[idx(next)] = Some(tentative);
                    parent[idx(next)] = Some(cell);
                    open.push(Open {
                        f: tentative + OctileCost::between(next, goal),
                        g: tentative,
                        cell: next,
                    });
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octile_cost_ordering_is_exact() {
        let a = OctileCost {
            straight: 3,
            diagonal: 0,
        };
        let b = OctileCost {
            straight: 0,
            diagonal: 2,
        }; // 2.828
        assert!(b < a);
        let c = OctileCost {
            straight: 1,
            diagonal: 1,
        }; // 2.414
        assert!(c < b);
        let d = OctileCost {
            straight: 7,
            diagonal: 5,
        }; // 14.07
        let e = OctileCost {
            straight: 0,
            diagonal: 10,
        }; // 14.14
        assert!(d < e);
        assert_eq!(d.cmp(&d), Ordering::Equal);
    }

    #[test]
    fn open_grid_diagonal() {
        let g = NavGrid::empty(Vec2::zeros(), 10, 10);
        let p = g.astar(Cell::new(0, 0), Cell::new(9, 9)).unwrap();
        assert_eq!(
            p.cost,
            OctileCost {
                straight: 0,
                diagonal: 9
            }
        );
        assert!((p.cost.value() - 9.0 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(p.cells.len(), 10);
    }

    #[test]
    fn start_equals_goal() {
        let g = NavGrid::empty(Vec2::zeros(), 4, 4);
        let p = g.astar(Cell::new(2, 1), Cell::new(2, 1)).unwrap();
        assert_eq!(p.cells, vec![Cell::new(2, 1)]);
        assert_eq!(p.cost, OctileCost::ZERO);
    }

    #[test]
    fn full_wall_disconnects() {
        let mut g = NavGrid::empty(Vec2::zeros(), 10, 10);
        for y in 0..10 {
            g.set_blocked(Cell::new(5, y), true);
        }
        assert!(g.astar(Cell::new(0, 0), Cell::new(9, 9)).is_none());
    }

    #[test]
    fn no_corner_cutting() {
        let mut g = NavGrid::empty(Vec2::zeros(), 3, 3);
        g.set_blocked(Cell::new(1, 0), true);
        let moves: Vec<_> = g.neighbors(Cell::new(0, 0)).map(|(c, _)| c).collect();
        assert_eq!(moves, vec![Cell::new(0, 1)]);
    }

    #[test]
    fn rasterization_blocks_intersecting_cells() {
        let bounds = Rect::new(Vec2::zeros(), Vec2::new(5.0, 5.0));
        let obstacle = Polygon::rect(1.0, 1.0, 2.0, 2.0);
        let g = NavGrid::from_obstacles(&bounds, &[obstacle]);
        assert_eq!(g.cols, 10);
        // Exactly the 2x2 cells covering [1,2]^2.
        assert_eq!(g.blocked_count(), 4);
        assert!(g.is_blocked(Cell::new(2, 2)));
        assert!(!g.is_blocked(Cell::new(4, 4)));
        assert_eq!(g.cell_of(&Vec2::new(1.26, 0.1)), Cell::new(2, 0));
    }
}
