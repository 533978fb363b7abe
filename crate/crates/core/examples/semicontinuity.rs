//! Covering contents of pre-fractals against a deep sample of the limit
//! curve. Each fixed pre-fractal is a polygon of dimension one, so its alpha
//! content vanishes as eps shrinks; the limit keeps a positive floor.

use fractal_crack::koch_curve;
use fractal_crack::verification::semicontinuity_demo;

fn main() -> fractal_crack::Result<()> {
    let curve = koch_curve(6);
    let eps: Vec<f64> = (1..=8).map(|k| 3f64.powi(-k)).collect();
    let table = semicontinuity_demo(&curve, &[0, 1, 2, 3], &eps, curve.alpha(), 10, 3f64.powi(-6))?;
    table.write_csv(std::io::stdout().lock())?;
    let expected = 3f64.powf(-(curve.alpha() - 1.0));
    for n in 0..4 {
        if let Some(r) = table.row_decay_ratio(curve.ratio(), n) {
            println!("row n{n}: decay per third {r:.4} (expected {expected:.4})");
        }
    }
    println!("deep floor {:.4}", table.deep_floor());
    Ok(())
}
