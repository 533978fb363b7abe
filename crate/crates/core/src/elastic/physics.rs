//! Physics selector dispatching to the scalar or planar solver.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::crack::Crack;
use crate::elastic::field::{AnyField, Datum, ScalarField, VectorField};
use crate::elastic::grid::Domain;
use crate::elastic::mask::CrackMask;
use crate::elastic::material::{ElasticityTensor, Integrand};
use crate::elastic::solver::{
    planar_energy, planar_work_rate, scalar_energy, scalar_work_rate, solve_planar, solve_scalar,
    SolveStats, SolverOptions,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Physics {
    Scalar { integrand: Integrand },
    Planar { tensor: ElasticityTensor },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticSolution {
    pub field: AnyField,
    pub energy: f64,
    pub stats: SolveStats,
}

impl Physics {
    pub fn validate(&self) -> Result<()> {
        match self {
            Physics::Scalar { integrand } => integrand.validate(),
            Physics::Planar { tensor } => tensor.validate(),
        }
    }

    /// Check that the datum has the right number of components.
    pub fn check_datum(&self, datum: &Datum) -> Result<()> {
        match (self, datum.is_scalar()) {
            (Physics::Scalar { .. }, true) | (Physics::Planar { .. }, false) => datum.validate(),
            _ => Err(Error::Validation("datum kind does not match the physics".into())),
        }
    }

    /// Degree `q` with `E(λ w) = λ^q E(w)` for the minimal energy.
    pub fn homogeneity(&self) -> f64 {
        match self {
            Physics::Scalar { integrand } => integrand.homogeneity(),
            Physics::Planar { .. } => 2.0,
        }
    }

    /// The datum `λ w₀` sampled on the grid of `mask`.
    pub fn interpolate(&self, mask: &Arc<CrackMask>, datum: &Datum, lambda: f64) -> AnyField {
        match datum {
            Datum::Scalar { w } => AnyField::Scalar(ScalarField::interpolate(mask.clone(), w, lambda)),
            Datum::Vector { wx, wy } => AnyField::Vector(VectorField::interpolate(mask.clone(), wx, wy, lambda)),
        }
    }

    /// Minimize the bulk energy with Dirichlet datum `λ w₀`.
    pub fn solve(
        &self,
        domain: &Domain,
        mask: &Arc<CrackMask>,
        datum: &Datum,
        lambda: f64,
        opts: &SolverOptions,
    ) -> Result<StaticSolution> {
        self.check_datum(datum)?;
        match (self, self.interpolate(mask, datum, lambda)) {
            (Physics::Scalar { integrand }, AnyField::Scalar(w)) => {
                let s = solve_scalar(domain, mask, integrand, &w, opts)?;
                Ok(StaticSolution { field: AnyField::Scalar(s.field), energy: s.energy, stats: s.stats })
            }
            (Physics::Planar { tensor }, AnyField::Vector(w)) => {
                let s = solve_planar(domain, mask, tensor, &w, opts)?;
                Ok(StaticSolution { field: AnyField::Vector(s.field), energy: s.energy, stats: s.stats })
            }
            _ => unreachable!("datum kind checked above"),
        }
    }

    pub fn energy(&self, u: &AnyField) -> Result<f64> {
        match (self, u) {
            (Physics::Scalar { integrand }, AnyField::Scalar(u)) => Ok(scalar_energy(u, integrand)),
            (Physics::Planar { tensor }, AnyField::Vector(u)) => Ok(planar_energy(u, tensor)),
            _ => Err(Error::Validation("field kind does not match the physics".into())),
        }
    }

    /// Bulk energy plus the alpha-measure of the crack.
    pub fn total_energy(&self, u: &AnyField, crack: &Crack) -> Result<f64> {
        Ok(self.energy(u)? + crack.alpha_measure())
    }

    /// Work rate of `u` against the rate field `ẇ`.
    pub fn work_rate(&self, u: &AnyField, wdot: &AnyField) -> Result<f64> {
        match (self, u, wdot) {
            (Physics::Scalar { integrand }, AnyField::Scalar(u), AnyField::Scalar(w)) => {
                scalar_work_rate(u, w, integrand)
            }
            (Physics::Planar { tensor }, AnyField::Vector(u), AnyField::Vector(w)) => planar_work_rate(u, w, tensor),
            _ => Err(Error::Validation("field kinds do not match the physics".into())),
        }
    }
}
