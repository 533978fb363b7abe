//! Static minimum problems on a cracked unit square: scalar quadratic, scalar
//! p-power and planar elasticity.

use std::sync::Arc;

use fractal_crack::elastic::{
    rasterize_crack, Datum, Domain, ElasticityTensor, Integrand, Physics, Polynomial, Side, SolverOptions,
};
use fractal_crack::{koch_curve, Crack, Point, Rotation};

fn main() -> fractal_crack::Result<()> {
    let h = 1.0 / 32.0;
    let domain = Domain::rectangle((0.0, 1.0), (0.0, 1.0), h, &[Side::Bottom, Side::Top])?;
    let curve = Arc::new(koch_curve(6));
    let opts = SolverOptions::default();
    let pull = Datum::Scalar { w: Polynomial::linear(0.0, 1.0, 0.0) };

    for a in [0.0, 0.5, 1.0] {
        let crack = Crack::straight(curve.clone(), Rotation::new(0.0, false), a, Point::new(0.0, 0.49))?;
        let mask = Arc::new(rasterize_crack(&crack, &domain, 4)?);
        for integrand in [Integrand::quadratic(), Integrand::p_power(1.5)?] {
            let physics = Physics::Scalar { integrand };
            let sol = physics.solve(&domain, &mask, &pull, 1.0, &opts)?;
            println!(
                "a = {a:.2} p = {}: severed {:>3}, bulk {:.6}, total {:.6}, iters {}",
                physics.homogeneity(),
                mask.severed_count(),
                sol.energy,
                sol.energy + crack.alpha_measure(),
                sol.stats.iterations
            );
        }
    }

    let shear = Datum::Vector { wx: Polynomial::linear(0.0, 0.5, 0.0), wy: Polynomial::linear(0.0, 1.0, 0.0) };
    let crack = Crack::straight(curve, Rotation::new(0.0, false), 0.8, Point::new(0.0, 0.49))?;
    let mask = Arc::new(rasterize_crack(&crack, &domain, 4)?);
    let planar = Physics::Planar { tensor: ElasticityTensor::new(1.0, 1.0)? };
    let sol = planar.solve(&domain, &mask, &shear, 1.0, &opts)?;
    println!("planar, a = 0.8: bulk {:.6}, iters {}", sol.energy, sol.stats.iterations);
    Ok(())
}
