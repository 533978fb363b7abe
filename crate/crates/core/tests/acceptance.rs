//! Acceptance suite: every criterion runs at its stated tolerance and time
//! budget and reports one line on stdout (written past the test harness
//! capture, so the table shows up in plain `cargo test` output).

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use fractal_crack::crack::{extend, measure_difference, CrackSpec};
use fractal_crack::elastic::{
    rasterize_crack, scalar_corner_gradients, solve_scalar, solve_scalar_from, CrackMask, Datum, Domain,
    ElasticityTensor, Integrand, Physics, Polynomial, ScalarField, Side, SolverOptions,
};
use fractal_crack::evolution::{
    audit_energy_balance, audit_stability, calibrate_ramp, run_evolution, Evolution, EvolutionConfig,
    EvolutionTrace, LoadProgram,
};
use fractal_crack::geometry::box_dimension_estimate;
use fractal_crack::verification::{minimizer_convergence_study, semicontinuity_demo};
use fractal_crack::{koch_curve, Crack, CurveSpec, Point, PointSet, Rotation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn koch_dimension() -> f64 {
    4f64.ln() / 3f64.ln()
}

fn measure_identity() -> Check {
    let curve = common::koch();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = common::random_crack(&curve, &mut rng);
        ensure(k.alpha_measure() == k.tip(), || format!("measure {} != tip {}", k.alpha_measure(), k.tip()))?;
        let h = k.with_tip(rng.gen_range(0.0..=k.tip())).unwrap();
        let d = measure_difference(&k, &h).map_err(|e| e.to_string())?;
        worst = worst.max((h.alpha_measure() + d - k.alpha_measure()).abs());
    }
    ensure(worst <= 2.0 * f64::EPSILON, || format!("additivity defect {worst:e}"))?;
    Ok(format!("100 cracks, additivity defect {worst:e}"))
}

fn holder_certification() -> Check {
    let curve = koch_curve(2);
    let e6 = curve.estimate_holder_constants(6, 10_000, 3).map_err(|e| e.to_string())?;
    let e7 = curve.estimate_holder_constants(7, 10_000, 3).map_err(|e| e.to_string())?;
    for e in [&e6, &e7] {
        ensure(0.0 < e.c && e.c <= 1.0 && 1.0 <= e.big_c, || format!("c = {}, C = {}", e.c, e.big_c))?;
    }
    let three = |x: f64| format!("{x:.2e}");
    ensure(three(e6.c) == three(e7.c) && three(e6.big_c) == three(e7.big_c), || {
        format!("depth 6 ({}, {}) vs depth 7 ({}, {})", e6.c, e6.big_c, e7.c, e7.big_c)
    })?;
    Ok(format!("c = {:.6}, C = {:.6} at depths 6 and 7", e7.c, e7.big_c))
}

fn dimension_check() -> Check {
    let pts = PointSet::new(koch_curve(2).prefractal(8)).unwrap();
    let eps: Vec<f64> = (2..=6).map(|k| 3f64.powi(-k)).collect();
    let fit = box_dimension_estimate(&pts, &eps).map_err(|e| e.to_string())?;
    let target = koch_dimension();
    ensure((fit.slope - target).abs() <= 0.05, || format!("slope {} vs {target}", fit.slope))?;
    Ok(format!("slope {:.4} vs {:.4}", fit.slope, target))
}

fn static_exactness() -> Check {
    let h = 1.0 / 64.0;
    let opts = SolverOptions::default();
    let all = Domain::rectangle((0.0, 1.0), (0.0, 1.0), h, &Side::ALL).unwrap();
    let mask = Arc::new(CrackMask::empty(all.grid()));
    let f = Integrand::quadratic();
    let datum = ScalarField::interpolate(mask.clone(), &Polynomial::linear(1.0, 0.0, 0.0), 1.0);
    let sol = solve_scalar(&all, &mask, &f, &datum, &opts).map_err(|e| e.to_string())?;
    let grid = all.grid();
    let nodal = (0..grid.node_count())
        .map(|n| (sol.field.values()[n] - grid.node_position(n).x).abs())
        .fold(0.0, f64::max);
    ensure(nodal <= 1e-10, || format!("nodal error {nodal:e}"))?;
    ensure((sol.energy - 0.5).abs() <= 1e-9, || format!("scalar energy {}", sol.energy))?;

    let planar = Physics::Planar { tensor: ElasticityTensor::new(0.0, 1.0).unwrap() };
    let affine = Datum::Vector { wx: Polynomial::linear(1.0, 0.0, 0.0), wy: Polynomial::linear(0.0, 1.0, 0.0) };
    let e_aff = planar.solve(&all, &mask, &affine, 1.0, &opts).map_err(|e| e.to_string())?.energy;
    ensure((e_aff - 2.0).abs() <= 1e-8, || format!("affine energy {e_aff}"))?;
    let rigid = Datum::Vector { wx: Polynomial::linear(0.0, -1.0, 0.3), wy: Polynomial::linear(1.0, 0.0, -0.7) };
    let e_rig = planar.solve(&all, &mask, &rigid, 1.0, &opts).map_err(|e| e.to_string())?.energy;
    ensure(e_rig.abs() <= 1e-9, || format!("rigid energy {e_rig:e}"))?;
    Ok(format!("nodal {nodal:.1e}, scalar {:.12}, affine {e_aff:.10}, rigid {e_rig:.1e}", sol.energy))
}

fn gradient_uniqueness() -> Check {
    let h = 1.0 / 64.0;
    let domain = Domain::rectangle((0.0, 1.0), (0.0, 1.0), h, &[Side::Bottom, Side::Top]).unwrap();
    let crack = Crack::straight(common::koch(), Rotation::new(0.0, false), 0.6, Point::new(0.0, 0.49)).unwrap();
    let mask = Arc::new(rasterize_crack(&crack, &domain, 4).map_err(|e| e.to_string())?);
    let f = Integrand::p_power(1.5).unwrap();
    let datum = ScalarField::interpolate(mask.clone(), &Polynomial::linear(0.2, 1.0, 0.0), 1.0);
    let opts = SolverOptions::default();
    let a = solve_scalar(&domain, &mask, &f, &datum, &opts).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start: Vec<f64> = (0..datum.values().len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let b = solve_scalar_from(&domain, &mask, &f, &datum, &start, &opts).map_err(|e| e.to_string())?;
    let ga = scalar_corner_gradients(&a.field);
    let gb = scalar_corner_gradients(&b.field);
    let scale = ga.iter().map(|g| g[0].hypot(g[1])).fold(0.0, f64::max);
    let diff = ga.iter().zip(&gb).map(|(x, y)| (x[0] - y[0]).hypot(x[1] - y[1])).fold(0.0, f64::max);
    ensure(diff <= 1e-5 * scale, || format!("gradient mismatch {diff:e} (scale {scale})"))?;
    Ok(format!("max relative gradient mismatch {:.1e}", diff / scale))
}

fn ramp_scenario(steps: usize) -> EvolutionConfig {
    EvolutionConfig {
        domain: Domain::rectangle((0.0, 1.0), (0.0, 1.0), 1.0 / 64.0, &[Side::Bottom, Side::Top]).unwrap(),
        crack: CrackSpec { curve: CurveSpec::Koch {}, psi: None, angle: 0.0, reflect: false, a: 0.0, origin: [0.0, 0.49] },
        depth: None,
        delta_a: 1.0 / 16.0,
        steps,
        times: None,
        load: LoadProgram::ramp(1.0, 1.0, Datum::Scalar { w: Polynomial::linear(0.0, 1.0, 0.0) }),
        physics: Physics::Scalar { integrand: Integrand::quadratic() },
        solver: SolverOptions::default(),
        certification_depth: 5,
        stability_tol: 2e-9,
    }
}

fn worst_violation(trace: &EvolutionTrace, evo: &Evolution) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for i in 0..trace.records.len() {
        worst = worst.max(audit_stability(trace, evo, i).map_err(|e| e.to_string())?);
    }
    Ok(worst)
}

fn irreversibility_and_stability() -> Check {
    let mut report = Vec::new();
    for fraction in [0.5 - 1e-6, 0.3] {
        let cfg = calibrate_ramp(&ramp_scenario(32), fraction).map_err(|e| e.to_string())?;
        let run = run_evolution(&cfg).map_err(|e| e.to_string())?;
        let evo = Evolution::new(cfg).map_err(|e| e.to_string())?;
        let trace = &run.trace;
        ensure(trace.is_irreversible(), || "tip decreases".into())?;
        let worst = worst_violation(trace, &evo)?;
        ensure(worst <= 2e-9, || format!("stability violation {worst:e}"))?;
        let final_a = trace.records.last().unwrap().a;
        ensure(final_a > 0.0, || "no growth under the ramp".into())?;

        // Fault injection: a decremented tip, and a tip held at its initial value.
        let mut dec = trace.clone();
        let k = dec.records.len() - 1;
        dec.records[k].a = dec.records[k - 1].a - 1.0 / 16.0;
        ensure(!dec.is_irreversible(), || "decremented tip accepted".into())?;
        let mut stalled = trace.clone();
        let a0 = stalled.records[0].a;
        for r in &mut stalled.records {
            r.a = a0;
        }
        let stalled_worst = worst_violation(&stalled, &evo)?;
        ensure(stalled_worst > 2e-9, || "stalled trace accepted".into())?;
        report.push(format!("fraction {fraction:.3}: final a {final_a}, violation {worst:.1e}, stalled {stalled_worst:.2e}"));
    }
    Ok(report.join("; "))
}

fn energy_balance() -> Check {
    let mut residuals = Vec::new();
    for n in [8, 16, 32, 64] {
        let cfg = calibrate_ramp(&ramp_scenario(n), 0.5 - 1e-6).map_err(|e| e.to_string())?;
        let run = run_evolution(&cfg).map_err(|e| e.to_string())?;
        residuals.push(audit_energy_balance(&run.trace).map_err(|e| e.to_string())?.residual);
    }
    for k in [1, 2] {
        ensure(residuals[k + 1] <= 0.75 * residuals[k], || format!("residuals {residuals:?}"))?;
    }
    Ok(format!("residuals at n = 8, 16, 32, 64: {residuals:.5?}"))
}

fn minimizer_convergence() -> Check {
    let domain = Domain::rectangle((0.0, 1.0), (0.0, 1.0), 1.0 / 256.0, &[Side::Left, Side::Right]).unwrap();
    let crack = Crack::straight(common::koch(), Rotation::new(0.0, false), 1.0, Point::new(0.0, 0.35)).unwrap();
    let report = minimizer_convergence_study(
        &crack,
        &domain,
        &Polynomial::linear(0.0, 1.0, 0.0),
        &Integrand::quadratic(),
        &[2, 3, 4, 5, 6],
        &SolverOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let d: Vec<f64> = report.records.iter().map(|r| r.gradient_distance).collect();
    ensure(d[..4].windows(2).all(|w| w[1] < w[0]), || format!("distances {d:?}"))?;
    Ok(format!("L2 gradient distances to depth 6: {:.4?}", &d[..4]))
}

fn semicontinuity() -> Check {
    let curve = koch_curve(2);
    let eps: Vec<f64> = (1..=8).map(|k| 3f64.powi(-k)).collect();
    let alpha = koch_dimension();
    let table = semicontinuity_demo(&curve, &[0, 1, 2, 3], &eps, alpha, 10, 3f64.powi(-6)).map_err(|e| e.to_string())?;
    let expected = 3f64.powf(-(alpha - 1.0));
    let mut ratios = Vec::new();
    for n in 0..4 {
        let r = table.row_decay_ratio(1.0 / 3.0, n).ok_or_else(|| format!("row {n} has no tail"))?;
        ensure((r - expected).abs() <= 0.05, || format!("row {n} ratio {r} vs {expected}"))?;
        ratios.push(r);
    }
    let floor = table.deep_floor();
    ensure(floor > 0.0 && floor.is_finite(), || format!("deep floor {floor}"))?;
    ensure(table.rows[0].1.last().unwrap() < &floor, || "pre-fractal row never drops below the floor".into())?;
    Ok(format!("row ratios {ratios:.4?} vs {expected:.4}, deep floor {floor:.4}"))
}

fn extension_construction() -> Check {
    let curve = common::koch();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let k = Crack::new(curve.clone(), common::random_psi(&curve, &mut rng, 32, 0.45), Rotation::new(0.4, false), 0.8, Point::new(0.2, 0.1))
        .unwrap();
    let a = 0.5;
    let mut worst_slack = f64::INFINITY;
    for n in 0..30 {
        let an = a + (-1f64).powi(n) * 0.4 * 0.5f64.powi(n);
        let psi = common::random_psi(&curve, &mut rng, 32, 0.45);
        let h_n = Crack::new(curve.clone(), psi, k.rotation(), an, k.origin()).unwrap();
        let e = extend(&h_n, &k).map_err(|e| e.to_string())?;
        let diff = measure_difference(&e, &h_n).map_err(|e| e.to_string())?;
        let err = (diff - (k.tip() - a)).abs();
        ensure(err <= (an - a).abs() + 1e-15, || format!("n = {n}: error {err} > {}", (an - a).abs()))?;
        worst_slack = worst_slack.min((an - a).abs() - err);
    }
    Ok(format!("30 terms, minimum slack {worst_slack:.2e}"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn report(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance_criteria() {
    let criteria = [
        Criterion { id: 1, name: "measure identity", budget: Duration::from_secs(1), run: measure_identity },
        Criterion { id: 2, name: "Hölder certification", budget: Duration::from_secs(10), run: holder_certification },
        Criterion { id: 3, name: "box dimension", budget: Duration::from_secs(5), run: dimension_check },
        Criterion { id: 4, name: "static solver exactness", budget: Duration::from_secs(5), run: static_exactness },
        Criterion { id: 5, name: "minimizer gradient uniqueness", budget: Duration::from_secs(30), run: gradient_uniqueness },
        Criterion { id: 6, name: "irreversibility and stability", budget: Duration::from_secs(300), run: irreversibility_and_stability },
        Criterion { id: 7, name: "energy balance", budget: Duration::from_secs(900), run: energy_balance },
        Criterion { id: 8, name: "minimizer convergence", budget: Duration::from_secs(600), run: minimizer_convergence },
        Criterion { id: 9, name: "semicontinuity", budget: Duration::from_secs(60), run: semicontinuity },
        Criterion { id: 10, name: "extension construction", budget: Duration::from_secs(1), run: extension_construction },
    ];
    let mut failures = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; over budget ({:.1?} > {:?})", elapsed, c.budget)),
            other => other,
        };
        match &outcome {
            Ok(detail) => report(format!("[PASS] {:>2} {} ({elapsed:.2?}): {detail}", c.id, c.name)),
            Err(why) => {
                report(format!("[FAIL] {:>2} {} ({elapsed:.2?}): {why}", c.id, c.name));
                failures.push(c.id);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

