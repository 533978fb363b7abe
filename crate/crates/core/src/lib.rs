//! Quasistatic growth of cracks of fractional Hausdorff dimension.
//!
//! The crate builds the admissible crack family generated by a self-similar
//! curve, discretizes the cracked domain with severed grid edges, solves the
//! static scalar and planar-elastic minimum problems, and drives the
//! incremental global minimization of bulk plus alpha-surface energy.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crack;
pub mod curve;
pub mod elastic;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod verification;

pub mod cli;

pub use crack::{Crack, Perturbation, Rotation};
pub use curve::{koch_curve, AlphaCurve, CurveSpec, Similarity};
pub use error::{Error, Result};
pub use geometry::{Point, PointSet};
