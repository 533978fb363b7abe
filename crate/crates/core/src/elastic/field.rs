//! Nodal fields on the grid and polynomial boundary data.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elastic::grid::Grid;
use crate::elastic::mask::CrackMask;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// `Σ c x^i y^j` with terms `[c, i, j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<[f64; 3]>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: vec![[c, 0.0, 0.0]] }
    }

    /// `a x + b y + c`.
    pub fn linear(a: f64, b: f64, c: f64) -> Self {
        Self { terms: vec![[a, 1.0, 0.0], [b, 0.0, 1.0], [c, 0.0, 0.0]] }
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            let ok = t[0].is_finite()
                && t[1..].iter().all(|e| *e >= 0.0 && e.fract() == 0.0 && *e <= 16.0);
            if !ok {
                return Err(Error::Validation(format!("bad polynomial term {t:?}")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.terms
            .iter()
            .map(|t| t[0] * p.x.powi(t[1] as i32) * p.y.powi(t[2] as i32))
            .sum()
    }
}

/// Base boundary datum `w₀`, scalar or vector valued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Datum {
    Scalar { w: Polynomial },
    Vector { wx: Polynomial, wy: Polynomial },
}

impl Datum {
    pub fn validate(&self) -> Result<()> {
        match self {
            Datum::Scalar { w } => w.validate(),
            Datum::Vector { wx, wy } => wx.validate().and(wy.validate()),
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Datum::Scalar { .. })
    }
}

/// Nodal values on a grid, tied to the mask through which gradients are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid,
    mask: Arc<CrackMask>,
    values: Vec<T>,
}

pub type ScalarField = Field<f64>;
pub type VectorField = Field<[f64; 2]>;

impl<T: Copy> Field<T> {
    pub fn new(mask: Arc<CrackMask>, values: Vec<T>) -> Result<Self> {
        let grid = *mask.grid();
        if values.len() != grid.node_count() {
            return Err(Error::Validation(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(Self { grid, mask, values })
    }

    /// Sample `f` at every node of the mask's grid.
    pub fn from_fn(mask: Arc<CrackMask>, f: impl Fn(Point) -> T) -> Self {
        let grid = *mask.grid();
        let values = (0..grid.node_count()).map(|n| f(grid.node_position(n))).collect();
        Self { grid, mask, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &Arc<CrackMask> {
        &self.mask
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.node(i, j)]
    }

    /// Same values viewed through a different mask on the same grid.
    pub fn with_mask(&self, mask: Arc<CrackMask>) -> Result<Self> {
        Self::new(mask, self.values.clone())
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field {
            grid: self.grid,
            mask: self.mask.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }
}

impl ScalarField {
    /// Interpolate a polynomial datum scaled by `lambda`.
    pub fn interpolate(mask: Arc<CrackMask>, w: &Polynomial, lambda: f64) -> Self {
        Self::from_fn(mask, |p| lambda * w.eval(p))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// CSV with header `i,j,x,y,u`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,j,x,y,u")?;
        for n in 0..self.grid.node_count() {
            let (i, j) = self.grid.node_ij(n);
            let p = self.grid.position(i, j);
            writeln!(out, "{i},{j},{},{},{}", p.x, p.y, self.values[n])?;
        }
        Ok(())
    }
}

impl VectorField {
    pub fn interpolate(mask: Arc<CrackMask>, wx: &Polynomial, wy: &Polynomial, lambda: f64) -> Self {
        Self::from_fn(mask, |p| [lambda * wx.eval(p), lambda * wy.eval(p)])
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v[0].is_finite() && v[1].is_finite())
    }

    /// CSV with header `i,j,x,y,ux,uy`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,j,x,y,ux,uy")?;
        for n in 0..self.grid.node_count() {
            let (i, j) = self.grid.node_ij(n);
            let p = self.grid.position(i, j);
            let [ux, uy] = self.values[n];
            writeln!(out, "{i},{j},{},{},{ux},{uy}", p.x, p.y)?;
        }
        Ok(())
    }
}

/// A solved field of either physics.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl AnyField {
    pub fn mask(&self) -> &Arc<CrackMask> {
        match self {
            AnyField::Scalar(u) => u.mask(),
            AnyField::Vector(u) => u.mask(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        match self {
            AnyField::Scalar(u) => u.write_csv(out),
            AnyField::Vector(u) => u.write_csv(out),
        }
    }
}
