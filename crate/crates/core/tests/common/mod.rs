#![allow(dead_code)]

use std::sync::Arc;

use fractal_crack::crack::lipschitz_bound;
use fractal_crack::{koch_curve, AlphaCurve, Crack, Perturbation, Point, Rotation};
use rand::Rng;

pub fn koch() -> Arc<AlphaCurve> {
    Arc::new(koch_curve(5))
}

/// Piecewise-linear perturbation whose slopes stay below `fraction * L`.
pub fn random_psi(curve: &AlphaCurve, rng: &mut impl Rng, intervals: usize, fraction: f64) -> Perturbation {
    let ell = curve.ell();
    let ds = ell / intervals as f64;
    let max_step = fraction * lipschitz_bound(curve) * ds;
    let mut v = Point::new(0.0, 0.0);
    let mut values = vec![v];
    for _ in 0..intervals {
        let r = max_step * rng.gen::<f64>();
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        v = v + Point::new(r * th.cos(), r * th.sin());
        values.push(v);
    }
    Perturbation::uniform(ell, values).unwrap()
}

pub fn random_crack(curve: &Arc<AlphaCurve>, rng: &mut impl Rng) -> Crack {
    let psi = random_psi(curve, rng, 16, 0.9);
    let rot = Rotation::new(rng.gen_range(-3.0..3.0), rng.gen_bool(0.5));
    let a = rng.gen_range(0.0..=curve.ell());
    let origin = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Crack::new(curve.clone(), psi, rot, a, origin).unwrap()
}
