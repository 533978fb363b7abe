//! Rectangular domains, boundary partitions and the node/edge numbering of the
//! regular grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

const COVER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];
}

/// A closed interval `[from, to]` of one side, in the coordinate running along
/// that side (`x` for bottom/top, `y` for left/right).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryPart {
    pub side: Side,
    pub from: f64,
    pub to: f64,
}

/// The rectangle `[x_min, x_max] × [y_min, y_max]` with grid step `h` and a
/// Dirichlet/Neumann partition of its boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub h: f64,
    pub dirichlet: Vec<BoundaryPart>,
    #[serde(default)]
    pub neumann: Vec<BoundaryPart>,
}

/// Node and edge numbering of a regular grid with `nx × ny` cells.
///
/// Node `(i, j)` sits at `(x_min + i h, y_min + j h)` and has index
/// `j (nx + 1) + i`. Horizontal edge `(i, j)` joins nodes `(i, j)` and
/// `(i + 1, j)`; vertical edge `(i, j)` joins `(i, j)` and `(i, j + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub y_min: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_ij(&self, n: usize) -> (usize, usize) {
        (n % (self.nx + 1), n / (self.nx + 1))
    }

    pub fn position(&self, i: usize, j: usize) -> Point {
        Point::new(self.x_min + i as f64 * self.h, self.y_min + j as f64 * self.h)
    }

    pub fn node_position(&self, n: usize) -> Point {
        let (i, j) = self.node_ij(n);
        self.position(i, j)
    }

    pub fn h_edge_count(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn v_edge_count(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn h_edge(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn v_edge(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.nx as f64 * self.h
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + self.ny as f64 * self.h
    }
}

impl Domain {
    /// Rectangle whose listed sides are entirely Dirichlet and the rest Neumann.
    pub fn rectangle(
        (x_min, x_max): (f64, f64),
        (y_min, y_max): (f64, f64),
        h: f64,
        dirichlet_sides: &[Side],
    ) -> Result<Self> {
        let part = |side| {
            let (from, to) = match side {
                Side::Left | Side::Right => (y_min, y_max),
                Side::Bottom | Side::Top => (x_min, x_max),
            };
            BoundaryPart { side, from, to }
        };
        let (dirichlet, neumann) = Side::ALL
            .iter()
            .partition::<Vec<Side>, _>(|s| dirichlet_sides.contains(s));
        let domain = Domain {
            x_min,
            x_max,
            y_min,
            y_max,
            h,
            dirichlet: dirichlet.into_iter().map(part).collect(),
            neumann: neumann.into_iter().map(part).collect(),
        };
        domain.validate()?;
        Ok(domain)
    }

    /// Unit square with Dirichlet data on the whole boundary.
    pub fn unit_square(h: f64) -> Result<Self> {
        Self::rectangle((0.0, 1.0), (0.0, 1.0), h, &Side::ALL)
    }

    fn side_range(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Left | Side::Right => (self.y_min, self.y_max),
            Side::Bottom | Side::Top => (self.x_min, self.x_max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max, self.h]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(Error::Validation("degenerate rectangle".into()));
        }
        if !(self.h > 0.0) {
            return Err(Error::Validation("grid step must be positive".into()));
        }
        for extent in [self.x_max - self.x_min, self.y_max - self.y_min] {
            let cells = extent / self.h;
            if (cells - cells.round()).abs() > COVER_TOL || cells.round() < 1.0 {
                return Err(Error::Validation(format!(
                    "grid step {} does not divide side length {extent}",
                    self.h
                )));
            }
        }
        for side in Side::ALL {
            let (lo, hi) = self.side_range(side);
            let mut parts: Vec<(f64, f64)> = self
                .dirichlet
                .iter()
                .chain(&self.neumann)
                .filter(|p| p.side == side)
                .map(|p| (p.from, p.to))
                .collect();
            if parts.iter().any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
                return Err(Error::Validation(format!("empty or reversed interval on {side:?}")));
            }
            parts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut reach = lo;
            for (a, b) in parts {
                if (a - reach).abs() > COVER_TOL {
                    return Err(Error::Validation(format!(
                        "boundary parts on {side:?} leave a gap or overlap at {reach}"
                    )));
                }
                reach = b;
            }
            if (reach - hi).abs() > COVER_TOL {
                return Err(Error::Validation(format!(
                    "boundary parts on {side:?} do not cover the side"
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid {
            x_min: self.x_min,
            y_min: self.y_min,
            h: self.h,
            nx: ((self.x_max - self.x_min) / self.h).round() as usize,
            ny: ((self.y_max - self.y_min) / self.h).round() as usize,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// True when `p` lies in the closed rectangle, up to `tol`.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p.x >= self.x_min - tol
            && p.x <= self.x_max + tol
            && p.y >= self.y_min - tol
            && p.y <= self.y_max + tol
    }

    /// Per-node flag: the node lies on a (closed) Dirichlet part.
    pub fn dirichlet_nodes(&self) -> Vec<bool> {
        let g = self.grid();
        let mut flags = vec![false; g.node_count()];
        for part in &self.dirichlet {
            let (count, fixed, along_x) = match part.side {
                Side::Bottom => (g.nx + 1, 0, true),
                Side::Top => (g.nx + 1, g.ny, true),
                Side::Left => (g.ny + 1, 0, false),
                Side::Right => (g.ny + 1, g.nx, false),
            };
            for k in 0..count {
                let (i, j) = if along_x { (k, fixed) } else { (fixed, k) };
                let p = g.position(i, j);
                let t = if along_x { p.x } else { p.y };
                if t >= part.from - COVER_TOL && t <= part.to + COVER_TOL {
                    flags[g.node(i, j)] = true;
                }
            }
        }
        flags
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_numbering() {
        let d = Domain::unit_square(0.25).unwrap();
        let g = d.grid();
        assert_eq!((g.nx, g.ny), (4, 4));
        assert_eq!(g.node_count(), 25);
        assert_eq!(g.node_ij(g.node(3, 2)), (3, 2));
        assert_eq!(g.position(4, 4), Point::new(1.0, 1.0));
        assert_eq!(g.h_edge_count(), 20);
        assert_eq!(g.v_edge_count(), 20);
        assert!(d.dirichlet_nodes().iter().filter(|&&f| f).count() == 16);
    }

    #[test]
    fn partial_dirichlet_parts() {
        let d = Domain {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
            h: 0.25,
            dirichlet: vec![BoundaryPart { side: Side::Bottom, from: 0.0, to: 0.5 }],
            neumann: vec![
                BoundaryPart { side: Side::Bottom, from: 0.5, to: 1.0 },
                BoundaryPart { side: Side::Left, from: 0.0, to: 1.0 },
                BoundaryPart { side: Side::Right, from: 0.0, to: 1.0 },
                BoundaryPart { side: Side::Top, from: 0.0, to: 1.0 },
            ],
        };
        d.validate().unwrap();
        let flags = d.dirichlet_nodes();
        assert_eq!(flags.iter().filter(|&&f| f).count(), 3);
    }

    #[test]
    fn rejects_gaps_overlaps_and_bad_steps() {
        let mut d = Domain::rectangle((0.0, 1.0), (0.0, 1.0), 0.25, &[Side::Left]).unwrap();
        d.neumann.retain(|p| p.side != Side::Top);
        assert!(d.validate().is_err());

        let mut d = Domain::rectangle((0.0, 1.0), (0.0, 1.0), 0.25, &[Side::Left]).unwrap();
        d.dirichlet.push(BoundaryPart { side: Side::Top, from: 0.2, to: 0.4 });
        assert!(d.validate().is_err());

        assert!(Domain::unit_square(0.3).is_err());
        assert!(Domain::unit_square(0.0).is_err());
    }
}
