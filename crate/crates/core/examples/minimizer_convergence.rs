//! Scalar minimizers for pre-fractal cracks of increasing depth on one grid,
//! compared with the finest depth.

use std::sync::Arc;

use fractal_crack::elastic::{Domain, Integrand, Polynomial, Side, SolverOptions};
use fractal_crack::verification::minimizer_convergence_study;
use fractal_crack::{koch_curve, Crack, Point, Rotation};

fn main() -> fractal_crack::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(128);
    let domain = Domain::rectangle((0.0, 1.0), (0.0, 1.0), 1.0 / n as f64, &[Side::Left, Side::Right])?;
    let crack = Crack::straight(Arc::new(koch_curve(6)), Rotation::new(0.0, false), 1.0, Point::new(0.0, 0.35))?;
    let report = minimizer_convergence_study(
        &crack,
        &domain,
        &Polynomial::linear(0.0, 1.0, 0.0),
        &Integrand::quadratic(),
        &[2, 3, 4, 5],
        &SolverOptions::default(),
    )?;
    report.write_csv(std::io::stdout().lock())?;
    println!("gradient distance strictly decreasing: {}", report.gradient_distance_decreasing());
    Ok(())
}
