//! Koch generator: pre-fractal vertices, natural parametrization and the
//! empirical Hölder constants.
//!
//! ```text
//! cargo run --release --example koch_curve -- 3
//! ```

use fractal_crack::koch_curve;

fn main() -> fractal_crack::Result<()> {
    let depth: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let curve = koch_curve(6);
    println!("alpha = {:.6}, ell = {}", curve.alpha(), curve.ell());
    println!("holder constants: c = {:.6}, C = {:.6}", curve.holder_c(), curve.holder_upper());

    let verts = curve.prefractal(depth);
    let params = curve.junction_parameters(depth);
    println!("depth {depth}: {} vertices", verts.len());
    for (s, p) in params.iter().zip(&verts).take(9) {
        println!("  s = {s:<8.5} ({:.6}, {:.6})", p.x, p.y);
    }

    // Arc measure is the parameter length.
    println!("measure of [0.25, 0.8] = {}", curve.measure_of_arc(0.25, 0.8)?);

    for d in [5, 6, 7] {
        let est = curve.estimate_holder_constants(d, 10_000, 1)?;
        println!("certification depth {d}: c = {:.6}, C = {:.6} over {} pairs", est.c, est.big_c, est.pairs);
    }
    Ok(())
}
