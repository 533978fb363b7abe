//! Box-counting dimension of Koch pre-fractals.

use fractal_crack::geometry::{box_count, box_dimension_estimate};
use fractal_crack::{koch_curve, PointSet};

fn main() -> fractal_crack::Result<()> {
    let curve = koch_curve(6);
    let eps: Vec<f64> = (2..=6).map(|k| 3f64.powi(-k)).collect();
    println!("target log4/log3 = {:.4}", curve.alpha());
    for depth in [4, 6, 8] {
        let pts = PointSet::new(curve.prefractal(depth))?;
        let counts: Vec<usize> = eps.iter().map(|&e| box_count(&pts, e)).collect::<Result<_, _>>()?;
        let fit = box_dimension_estimate(&pts, &eps)?;
        println!(
            "depth {depth}: N = {counts:?}, slope = {:.4}, r2 = {:.5}{}",
            fit.slope,
            fit.r2,
            if fit.unreliable { " (unreliable)" } else { "" }
        );
    }
    Ok(())
}
