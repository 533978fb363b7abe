//! Grid discretization of the cracked body and the static minimum problems.

pub mod field;
pub mod grid;
pub mod mask;
pub mod physics;
pub mod material;
pub mod solver;
pub mod sparse;

pub use field::{AnyField, Datum, Field, Polynomial, ScalarField, VectorField};
pub use grid::{BoundaryPart, Domain, Grid, Side};
pub use mask::{rasterize_crack, rasterize_polyline, rasterize_unchecked, CrackMask};
pub use material::{ElasticityTensor, Integrand, IntegrandKind};
pub use physics::{Physics, StaticSolution};
pub use solver::{
    planar_corner_gradients, planar_energy, planar_work_rate, scalar_corner_gradients, scalar_energy,
    scalar_work_rate, solve_planar, solve_scalar, solve_scalar_from, PlanarSolution, ScalarSolution,
    SolveStats, SolverOptions,
};
