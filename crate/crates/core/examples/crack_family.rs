//! Admissible cracks: perturbed, rotated prefixes of the generator; their
//! measure, the extension map and recovery of the tip from samples.

use std::sync::Arc;

use fractal_crack::crack::{extend, measure_difference, prefix_recovery};
use fractal_crack::geometry::hausdorff_distance;
use fractal_crack::{koch_curve, Crack, Perturbation, Point, PointSet, Rotation};

fn main() -> fractal_crack::Result<()> {
    let curve = Arc::new(koch_curve(6));
    let ell = curve.ell();
    let bound = fractal_crack::crack::lipschitz_bound(&curve);
    println!("perturbation Lipschitz bound L = {bound:.6}");

    let psi = Perturbation::from_fn(ell, 64, |s| {
        let w = 0.4 * bound / std::f64::consts::TAU;
        Point::new(w * (std::f64::consts::TAU * s).sin(), 0.0)
    })?;
    let rot = Rotation::new(0.3, true);
    let k = Crack::new(curve.clone(), psi.clone(), rot, 0.9, Point::new(0.1, 0.2))?;
    println!("K: a = {}, alpha measure = {}", k.tip(), k.alpha_measure());
    let sep = k.verify_separation(5)?;
    println!("separation check: pass = {}, worst ratio = {:.4}", sep.pass, sep.worst_ratio);

    let h = k.with_tip(0.55)?;
    let e = extend(&h, &k)?;
    println!("extend(H, K): tip {} , measure difference {}", e.tip(), measure_difference(&e, &h)?);

    let a = PointSet::new(k.sample(6))?;
    let b = PointSet::new(h.sample(6))?;
    println!("Hausdorff distance K to H = {:.6}", hausdorff_distance(&a, &b)?);
    println!("prefix recovered from H's samples: {:.6}", prefix_recovery(b.points(), &k, 6)?);
    println!("spec: {}", serde_json::to_string(&k.to_spec()).unwrap());
    Ok(())
}
