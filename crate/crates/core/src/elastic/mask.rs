//! Severed-edge representation of a cracked grid.

use std::io::Write;

use crate::crack::Crack;
use crate::elastic::grid::{Domain, Grid};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Slack for "the crack sample lies in the closed domain".
const CONTAINMENT_TOL: f64 = 1e-12;

/// The set of grid edges cut by a crack.
#[derive(Debug, Clone, PartialEq)]
pub struct CrackMask {
    grid: Grid,
    h_cut: Vec<bool>,
    v_cut: Vec<bool>,
    source_hash: String,
    depth: u32,
}

impl CrackMask {
    /// No severed edges.
    pub fn empty(grid: Grid) -> Self {
        Self {
            grid,
            h_cut: vec![false; grid.h_edge_count()],
            v_cut: vec![false; grid.v_edge_count()],
            source_hash: String::new(),
            depth: 0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn source_hash(&self) -> &str {
        &self.source_hash
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Horizontal edge `(i, j)`–`(i + 1, j)` is severed.
    pub fn h_severed(&self, i: usize, j: usize) -> bool {
        self.h_cut[self.grid.h_edge(i, j)]
    }

    /// Vertical edge `(i, j)`–`(i, j + 1)` is severed.
    pub fn v_severed(&self, i: usize, j: usize) -> bool {
        self.v_cut[self.grid.v_edge(i, j)]
    }

    pub fn severed_count(&self) -> usize {
        self.h_cut.iter().chain(&self.v_cut).filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        self.severed_count() == 0
    }

    /// Every edge severed here is also severed in `other`.
    pub fn is_subset_of(&self, other: &CrackMask) -> bool {
        self.grid == other.grid
            && self.h_cut.iter().zip(&other.h_cut).all(|(a, b)| !a || *b)
            && self.v_cut.iter().zip(&other.v_cut).all(|(a, b)| !a || *b)
    }

    /// Sever one edge given by its two endpoint nodes (adjacent, in any order).
    pub fn sever(&mut self, (i1, j1): (usize, usize), (i2, j2): (usize, usize)) -> Result<()> {
        let g = self.grid;
        let ((ia, ja), (ib, jb)) = if (j1, i1) <= (j2, i2) {
            ((i1, j1), (i2, j2))
        } else {
            ((i2, j2), (i1, j1))
        };
        if ja == jb && ib == ia + 1 && ib <= g.nx && ja <= g.ny {
            let e = g.h_edge(ia, ja);
            self.h_cut[e] = true;
            Ok(())
        } else if ia == ib && jb == ja + 1 && ia <= g.nx && jb <= g.ny {
            let e = g.v_edge(ia, ja);
            self.v_cut[e] = true;
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "({i1},{j1})-({i2},{j2}) is not a grid edge"
            )))
        }
    }

    /// Severed edges as node pairs, horizontal edges first, each family in
    /// index order.
    pub fn edges(&self) -> Vec<((usize, usize), (usize, usize))> {
        let g = self.grid;
        let mut out = Vec::new();
        for j in 0..=g.ny {
            for i in 0..g.nx {
                if self.h_severed(i, j) {
                    out.push(((i, j), (i + 1, j)));
                }
            }
        }
        for j in 0..g.ny {
            for i in 0..=g.nx {
                if self.v_severed(i, j) {
                    out.push(((i, j), (i, j + 1)));
                }
            }
        }
        out
    }

    /// CSV with header `i1,j1,i2,j2`, LF line endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i1,j1,i2,j2")?;
        for ((i1, j1), (i2, j2)) in self.edges() {
            writeln!(out, "{i1},{j1},{i2},{j2}")?;
        }
        Ok(())
    }
}

/// Rasterize the depth-`depth` crack polyline onto the domain grid.
///
/// The depth must resolve the grid (`ratio^depth ≤ h`) and the polyline must
/// stay inside the closed rectangle.
pub fn rasterize_crack(crack: &Crack, domain: &Domain, depth: u32) -> Result<CrackMask> {
    let cell = crack.curve().cell_diameter(depth);
    if cell > domain.h * (1.0 + 1e-12) {
        return Err(Error::Coupling(format!(
            "depth {depth} has cell size {cell:.3e} above grid step {}",
            domain.h
        )));
    }
    rasterize_unchecked(crack, domain, depth)
}

/// As [`rasterize_crack`] without the resolution coupling check; used when
/// deliberately coarse polylines are laid on a fine grid.
pub fn rasterize_unchecked(crack: &Crack, domain: &Domain, depth: u32) -> Result<CrackMask> {
    let grid = domain.grid();
    if crack.tip() == 0.0 {
        let mut mask = CrackMask::empty(grid);
        mask.source_hash = crack.content_hash();
        mask.depth = depth;
        return Ok(mask);
    }
    let poly = crack.sample(depth);
    if let Some(p) = poly.iter().find(|p| !domain.contains(**p, CONTAINMENT_TOL)) {
        return Err(Error::Geometry(format!(
            "crack point ({}, {}) lies outside the domain",
            p.x, p.y
        )));
    }
    let mut mask = rasterize_polyline(grid, &poly);
    mask.source_hash = crack.content_hash();
    mask.depth = depth;
    Ok(mask)
}

/// Sever every grid edge touching a segment of `poly` (closed segments, so a
/// polyline through a node cuts all edges meeting there).
pub fn rasterize_polyline(grid: Grid, poly: &[Point]) -> CrackMask {
    let mut mask = CrackMask::empty(grid);
    let h = grid.h;
    let slack = 1e-9 * h;
    let col = |x: f64| (x - grid.x_min) / h;
    let row = |y: f64| (y - grid.y_min) / h;
    let clamp = |v: f64, hi: usize| v.max(0.0).min(hi as f64) as usize;
    for seg in poly.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        let i_lo = clamp((col(p.x.min(q.x)) - slack).floor() - 1.0, grid.nx);
        let i_hi = clamp((col(p.x.max(q.x)) + slack).ceil() + 1.0, grid.nx);
        let j_lo = clamp((row(p.y.min(q.y)) - slack).floor() - 1.0, grid.ny);
        let j_hi = clamp((row(p.y.max(q.y)) + slack).ceil() + 1.0, grid.ny);
        for j in j_lo..=j_hi {
            for i in i_lo..=i_hi {
                let a = grid.position(i, j);
                if i < grid.nx && segments_touch(p, q, a, grid.position(i + 1, j)) {
                    let e = grid.h_edge(i, j);
                    mask.h_cut[e] = true;
                }
                if j < grid.ny && segments_touch(p, q, a, grid.position(i, j + 1)) {
                    let e = grid.v_edge(i, j);
                    mask.v_cut[e] = true;
                }
            }
        }
    }
    mask
}

fn orientation(a: Point, b: Point, c: Point) -> i8 {
    let u = b - a;
    let v = c - a;
    let value = u.cross(v);
    let tol = 1e-12 * u.norm() * v.norm();
    if value > tol {
        1
    } else if value < -tol {
        -1
    } else {
        0
    }
}

fn within_box(a: Point, b: Point, c: Point) -> bool {
    let tol = 1e-12 * (b - a).norm().max(1e-300);
    c.x >= a.x.min(b.x) - tol
        && c.x <= a.x.max(b.x) + tol
        && c.y >= a.y.min(b.y) - tol
        && c.y <= a.y.max(b.y) + tol
}

/// Closed segments `[p1, p2]` and `[q1, q2]` share at least one point.
pub(crate) fn segments_touch(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && within_box(q1, q2, p1))
        || (d2 == 0 && within_box(q1, q2, p2))
        || (d3 == 0 && within_box(p1, p2, q1))
        || (d4 == 0 && within_box(p1, p2, q2))
}
