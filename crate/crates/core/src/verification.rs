//! Numerical studies: convergence of minimizers along pre-fractal crack
//! approximations, and the failure of lower semicontinuity of covering
//! contents under Hausdorff convergence.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crack::Crack;
use crate::curve::AlphaCurve;
use crate::elastic::{
    rasterize_unchecked, scalar_corner_gradients, solve_scalar, Domain, Integrand, Polynomial,
    ScalarField, SolverOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{alpha_content, densify, hausdorff_distance, PointSet};

/// `(Σ_corners (h²/4) |ξ - η|^p)^{1/p}` between two corner-gradient arrays.
pub fn gradient_lp_distance(xi: &[[f64; 2]], eta: &[[f64; 2]], h: f64, p: f64) -> f64 {
    let w = 0.25 * h * h;
    let sum: f64 = xi
        .iter()
        .zip(eta)
        .map(|(a, b)| w * (a[0] - b[0]).hypot(a[1] - b[1]).powf(p))
        .sum();
    sum.powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub depth: u32,
    /// Hausdorff distance of the depth-`d` crack sample to the finest one.
    pub hausdorff: f64,
    pub energy: f64,
    /// L^p distance of the gradients to the finest-level solution.
    pub gradient_distance: f64,
    pub severed_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub p: f64,
    pub h: f64,
    /// The finest depth, used as the stand-in for the limit crack.
    pub finest_depth: u32,
    pub records: Vec<ConvergenceRecord>,
}

pub const CONVERGENCE_HEADER: &str = "depth,hausdorff,energy,gradient_distance,severed_edges";

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CONVERGENCE_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.depth, r.hausdorff, r.energy, r.gradient_distance, r.severed_edges
            )?;
        }
        Ok(())
    }

    /// Gradient distances strictly decrease over every depth but the finest.
    pub fn gradient_distance_decreasing(&self) -> bool {
        let coarse = &self.records[..self.records.len().saturating_sub(1)];
        coarse.windows(2).all(|w| w[1].gradient_distance < w[0].gradient_distance)
    }

    /// `|E(d) - E(D)|` decreases over every depth but the finest.
    pub fn energy_gap_decreasing(&self) -> bool {
        let last = match self.records.last() {
            Some(r) => r.energy,
            None => return true,
        };
        let coarse = &self.records[..self.records.len().saturating_sub(1)];
        coarse
            .windows(2)
            .all(|w| (w[1].energy - last).abs() <= (w[0].energy - last).abs())
    }
}

/// Solve the scalar problem on one fixed grid with the crack polyline
/// rasterized at each depth of `depths` (ascending), and compare every level
/// with the finest.
pub fn minimizer_convergence_study(
    crack: &Crack,
    domain: &Domain,
    datum: &Polynomial,
    integrand: &Integrand,
    depths: &[u32],
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    if depths.is_empty() || depths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("depths must be non-empty and strictly increasing".into()));
    }
    let coarsest = crack.curve().cell_diameter(depths[0]);
    if coarsest < domain.h * (1.0 - 1e-12) {
        return Err(Error::Coupling(format!(
            "coarsest depth {} has cells of size {coarsest:.3e} below the grid step {}",
            depths[0], domain.h
        )));
    }
    let solved = depths
        .par_iter()
        .map(|&d| {
            let mask = Arc::new(rasterize_unchecked(crack, domain, d)?);
            let w = ScalarField::interpolate(mask.clone(), datum, 1.0);
            let sol = solve_scalar(domain, &mask, integrand, &w, opts)?;
            let sample = PointSet::new(crack.sample(d))?;
            Ok((d, sample, sol, mask.severed_count()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, finest_sample, finest, _) = solved.last().expect("depths non-empty");
    // Severed edges zero the corner gradient, matching the extension by 0 on the crack.
    let finest_grad = scalar_corner_gradients(&finest.field);
    let p = integrand.exponent();
    let records = solved
        .iter()
        .map(|(d, sample, sol, severed)| {
            Ok(ConvergenceRecord {
                depth: *d,
                hausdorff: hausdorff_distance(sample, finest_sample)?,
                energy: sol.energy,
                gradient_distance: gradient_lp_distance(
                    &scalar_corner_gradients(&sol.field),
                    &finest_grad,
                    domain.h,
                    p,
                ),
                severed_edges: *severed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { p, h: domain.h, finest_depth: *depths.last().unwrap(), records })
}

/// Covering contents `N(ε) ε^α` of pre-fractals and of a deep sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentTable {
    pub alpha: f64,
    pub eps: Vec<f64>,
    /// `(n, contents over eps)` for each pre-fractal level.
    pub rows: Vec<(u32, Vec<f64>)>,
    pub deep_depth: u32,
    pub deep_row: Vec<f64>,
    /// Smallest box size at which the deep sample is considered resolved.
    pub resolved_eps: f64,
}

impl ContentTable {
    /// CSV with header `row,eps_1,…`; the deep sample row is labelled `deep<depth>`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "row")?;
        for e in &self.eps {
            write!(out, ",{e}")?;
        }
        writeln!(out)?;
        let mut line = |label: String, values: &[f64]| -> Result<()> {
            write!(out, "{label}")?;
            for v in values {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
            Ok(())
        };
        for (n, values) in &self.rows {
            line(format!("n{n}"), values)?;
        }
        line(format!("deep{}", self.deep_depth), &self.deep_row)
    }

    /// Mean decay ratio per factor-three refinement of `ε` for the row of
    /// level `n`, over box sizes at least two levels below the segment scale.
    /// Box sizes are expected to shrink by one curve ratio from entry to entry.
    pub fn row_decay_ratio(&self, curve_ratio: f64, n: u32) -> Option<f64> {
        let (_, values) = self.rows.iter().find(|(m, _)| *m == n)?;
        let scale = curve_ratio.powi(n as i32 + 2) * (1.0 + 1e-9);
        let tail: Vec<f64> = self
            .eps
            .iter()
            .zip(values)
            .filter(|(e, _)| **e <= scale)
            .map(|(_, v)| *v)
            .collect();
        if tail.len() < 2 {
            return None;
        }
        let steps = (tail.len() - 1) as f64;
        Some((tail[tail.len() - 1] / tail[0]).powf(1.0 / steps))
    }

    /// Smallest deep-row content over the resolved box sizes.
    pub fn deep_floor(&self) -> f64 {
        self.eps
            .iter()
            .zip(&self.deep_row)
            .filter(|(e, _)| **e >= self.resolved_eps * (1.0 - 1e-9))
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    /// Successive deep-row ratios over the resolved box sizes.
    pub fn deep_ratios(&self) -> Vec<f64> {
        let resolved: Vec<f64> = self
            .eps
            .iter()
            .zip(&self.deep_row)
            .filter(|(e, _)| **e >= self.resolved_eps * (1.0 - 1e-9))
            .map(|(_, v)| *v)
            .collect();
        resolved.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Tabulate `alpha_content` of each pre-fractal (densified below the smallest
/// box size) and of the depth-`deep_depth` vertex set.
pub fn semicontinuity_demo(
    curve: &AlphaCurve,
    depths: &[u32],
    eps_list: &[f64],
    alpha: f64,
    deep_depth: u32,
    resolved_eps: f64,
) -> Result<ContentTable> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Domain("box sizes must be positive".into()));
    }
    let eps_min = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let table_row = |points: &PointSet| -> Result<Vec<f64>> {
        eps_list.iter().map(|&e| alpha_content(points, e, alpha)).collect()
    };
    let rows = depths
        .par_iter()
        .map(|&n| {
            let points = PointSet::new(densify(&curve.prefractal(n), eps_min / 8.0))?;
            Ok((n, table_row(&points)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let deep = PointSet::new(curve.prefractal(deep_depth))?;
    Ok(ContentTable {
        alpha,
        eps: eps_list.to_vec(),
        rows,
        deep_depth,
        deep_row: table_row(&deep)?,
        resolved_eps,
    })
}
