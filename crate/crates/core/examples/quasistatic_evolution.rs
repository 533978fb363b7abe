//! Quasistatic growth under a calibrated ramp, followed by the stability and
//! energy-balance audits of the resulting trace.
//!
//! ```text
//! cargo run --release --example quasistatic_evolution -- 32
//! ```

use fractal_crack::crack::CrackSpec;
use fractal_crack::elastic::{Datum, Domain, Integrand, Physics, Polynomial, Side, SolverOptions};
use fractal_crack::evolution::{
    audit_energy_balance, audit_stability, calibrate_ramp, run_evolution, Evolution, EvolutionConfig, LoadProgram,
};
use fractal_crack::CurveSpec;

fn main() -> fractal_crack::Result<()> {
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let base = EvolutionConfig {
        domain: Domain::rectangle((0.0, 1.0), (0.0, 1.0), 1.0 / 32.0, &[Side::Bottom, Side::Top])?,
        crack: CrackSpec { curve: CurveSpec::Koch {}, psi: None, angle: 0.0, reflect: false, a: 0.0, origin: [0.0, 0.49] },
        depth: None,
        delta_a: 1.0 / 8.0,
        steps,
        times: None,
        load: LoadProgram::ramp(1.0, 1.0, Datum::Scalar { w: Polynomial::linear(0.0, 1.0, 0.0) }),
        physics: Physics::Scalar { integrand: Integrand::quadratic() },
        solver: SolverOptions::default(),
        certification_depth: 4,
        stability_tol: 2e-9,
    };
    let config = calibrate_ramp(&base, 0.5 - 1e-6)?;
    println!("calibrated final load factor {:.6}", config.load.lambda(config.load.t_final));

    let run = run_evolution(&config)?;
    let mut out = Vec::new();
    run.trace.write_csv(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));

    let evo = Evolution::new(config)?;
    let worst = (0..run.trace.records.len())
        .map(|i| audit_stability(&run.trace, &evo, i))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let balance = audit_energy_balance(&run.trace)?;
    println!("irreversible: {}", run.trace.is_irreversible());
    println!("max stability violation: {worst:.3e}");
    println!("energy-balance residual: {:.6} (one-sided constant {:.4})", balance.residual, balance.one_sided_constant);
    Ok(())
}
