//! Time-discrete quasistatic crack growth by incremental global minimization
//! over the tip of one frozen crack family.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crack::{Crack, CrackSpec};
use crate::curve::DEFAULT_CERTIFICATION_DEPTH;
use crate::elastic::{
    rasterize_crack, AnyField, CrackMask, Datum, Domain, Physics, SolverOptions, StaticSolution,
};
use crate::error::{Error, Result};

const GRID_TOL: f64 = 1e-9;

fn default_certification_depth() -> u32 {
    DEFAULT_CERTIFICATION_DEPTH
}

fn default_stability_tol() -> f64 {
    2e-9
}

/// Boundary datum `w(t, x) = λ(t) w₀(x)` with `λ` piecewise linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadProgram {
    pub t_final: f64,
    /// `[t, λ]` pairs, first at `t = 0`, last at `t_final`.
    pub knots: Vec<[f64; 2]>,
    pub datum: Datum,
}

impl LoadProgram {
    /// `λ(t) = lambda_end · t / t_final`.
    pub fn ramp(t_final: f64, lambda_end: f64, datum: Datum) -> Self {
        Self { t_final, knots: vec![[0.0, 0.0], [t_final, lambda_end]], datum }
    }

    pub fn zero(t_final: f64, datum: Datum) -> Self {
        Self::ramp(t_final, 0.0, datum)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Validation("final time must be positive".into()));
        }
        let k = &self.knots;
        let ok = k.len() >= 2
            && k[0][0] == 0.0
            && (k[k.len() - 1][0] - self.t_final).abs() <= GRID_TOL
            && k.windows(2).all(|w| w[1][0] > w[0][0])
            && k.iter().all(|r| r[1].is_finite());
        if !ok {
            return Err(Error::Validation(
                "load knots must start at 0, increase strictly and end at t_final".into(),
            ));
        }
        self.datum.validate()
    }

    pub fn lambda(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0][0] {
            return k[0][1];
        }
        for w in k.windows(2) {
            if t <= w[1][0] {
                let s = (t - w[0][0]) / (w[1][0] - w[0][0]);
                return w[0][1] + s * (w[1][1] - w[0][1]);
            }
        }
        k[k.len() - 1][1]
    }
}

/// Everything that defines an evolution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub domain: Domain,
    /// The frozen family; its tip `a` is the initial crack `a₀`.
    pub crack: CrackSpec,
    /// Rasterization depth; defaults to the coarsest depth resolving the grid.
    #[serde(default)]
    pub depth: Option<u32>,
    pub delta_a: f64,
    pub steps: usize,
    /// Optional non-uniform partition `0 = t₀ < … < t_n = T`.
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    pub load: LoadProgram,
    pub physics: Physics,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_certification_depth")]
    pub certification_depth: u32,
    /// Admissible stability violation, used for the initial-state check.
    #[serde(default = "default_stability_tol")]
    pub stability_tol: f64,
}

impl EvolutionConfig {
    /// Checks that need no solves.
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.physics.validate()?;
        self.physics.check_datum(&self.load.datum)?;
        self.load.validate()?;
        self.solver.validate()?;
        if self.steps == 0 {
            return Err(Error::Validation("at least one time step is required".into()));
        }
        if !(self.delta_a > 0.0 && self.delta_a.is_finite()) {
            return Err(Error::Validation("tip step must be positive".into()));
        }
        if !(self.stability_tol >= 0.0) {
            return Err(Error::Validation("stability tolerance must be non-negative".into()));
        }
        if let Some(times) = &self.times {
            let ok = times.len() == self.steps + 1
                && times[0] == 0.0
                && (times[self.steps] - self.load.t_final).abs() <= GRID_TOL
                && times.windows(2).all(|w| w[1] > w[0]);
            if !ok {
                return Err(Error::Validation(
                    "times must be an increasing partition of [0, T] with steps + 1 entries".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Vec<f64> {
        match &self.times {
            Some(t) => t.clone(),
            None => (0..=self.steps)
                .map(|i| self.load.t_final * i as f64 / self.steps as f64)
                .collect(),
        }
    }
}

/// One row of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub i: usize,
    pub t: f64,
    pub lambda: f64,
    pub a: f64,
    #[serde(rename = "E_elastic")]
    pub e_elastic: f64,
    #[serde(rename = "E_surface")]
    pub e_surface: f64,
    #[serde(rename = "E_total")]
    pub e_total: f64,
    pub work_cum: f64,
    pub solver_iters: usize,
}

pub const TRACE_HEADER: &str = "i,t,lambda,a,E_elastic,E_surface,E_total,work_cum,solver_iters";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvolutionTrace {
    pub records: Vec<StepRecord>,
}

impl EvolutionTrace {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.i, r.t, r.lambda, r.a, r.e_elastic, r.e_surface, r.e_total, r.work_cum, r.solver_iters
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers()?.iter().collect::<Vec<_>>().join(",");
        if headers != TRACE_HEADER {
            return Err(Error::Validation(format!("unexpected trace header {headers:?}")));
        }
        let records = reader.deserialize().collect::<std::result::Result<Vec<StepRecord>, _>>()?;
        Ok(Self { records })
    }

    pub fn tips(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.a).collect()
    }

    /// `a` never decreases along the trace.
    pub fn is_irreversible(&self) -> bool {
        self.records.windows(2).all(|w| w[1].a >= w[0].a)
    }

    /// Surface energy equals the tip and totals add up, exactly, on every row.
    pub fn bookkeeping_holds(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.e_surface == r.a && r.e_total == r.e_elastic + r.e_surface)
    }
}

/// Result of one incremental minimization.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Index of the chosen tip in [`Evolution::tips`].
    pub tip_index: usize,
    pub solution: StaticSolution,
    /// Conjugate-gradient iterations over all candidates.
    pub iterations: usize,
    /// Total energy of every candidate, ascending in tip.
    pub candidate_totals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EvolutionRun {
    pub trace: EvolutionTrace,
    pub final_field: AnyField,
    pub final_crack: Crack,
}

/// A validated configuration with the candidate cracks rasterized once.
#[derive(Debug, Clone)]
pub struct Evolution {
    config: EvolutionConfig,
    family: Crack,
    depth: u32,
    tips: Vec<f64>,
    masks: Vec<Arc<CrackMask>>,
}

impl Evolution {
    pub fn new(config: EvolutionConfig) -> Result<Self> {
        config.validate()?;
        let family = Crack::from_spec(&config.crack, config.certification_depth)?;
        let curve = family.curve().clone();
        let ell = curve.ell();
        let a0 = family.tip();
        let room = (ell - a0) / config.delta_a;
        let m = room.round();
        if (room - m).abs() > GRID_TOL {
            return Err(Error::Validation(format!(
                "tip step {} does not divide the remaining length {}",
                config.delta_a,
                ell - a0
            )));
        }
        let m = m as usize;
        let tips: Vec<f64> = (0..=m)
            .map(|k| if k == m { ell } else { a0 + k as f64 * config.delta_a })
            .collect();
        let depth = match config.depth {
            Some(d) => d,
            None => (1..=40)
                .find(|&d| curve.cell_diameter(d) <= config.domain.h * (1.0 + 1e-12))
                .ok_or_else(|| Error::Coupling("no depth resolves the grid step".into()))?,
        };
        let masks = tips
            .par_iter()
            .map(|&a| Ok(Arc::new(rasterize_crack(&family.with_tip(a)?, &config.domain, depth)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config, family, depth, tips, masks })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.config
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Candidate tips `a₀, a₀ + Δa, …, ℓ`.
    pub fn tips(&self) -> &[f64] {
        &self.tips
    }

    pub fn mask(&self, k: usize) -> &Arc<CrackMask> {
        &self.masks[k]
    }

    pub fn crack(&self, k: usize) -> Crack {
        self.family.with_tip(self.tips[k]).expect("tips lie in [0, ell]")
    }

    fn physics(&self) -> &Physics {
        &self.config.physics
    }

    /// Static solve for candidate `k` under load `λ`.
    pub fn solve_candidate(&self, k: usize, lambda: f64) -> Result<StaticSolution> {
        let c = &self.config;
        self.physics().solve(&c.domain, &self.masks[k], &c.load.datum, lambda, &c.solver)
    }

    /// Index of the tip grid point equal to `a`, if any.
    pub fn tip_index(&self, a: f64) -> Option<usize> {
        self.tips.iter().position(|&t| (t - a).abs() <= GRID_TOL)
    }

    /// One step of the scheme from tip index `prev`.
    pub fn incremental_step(&self, prev: usize, lambda: f64) -> Result<StepOutcome> {
        let order: Vec<usize> = (prev..self.tips.len()).collect();
        self.incremental_step_in_order(prev, lambda, &order)
    }

    /// As [`Self::incremental_step`] with candidates evaluated in `order`
    /// (a permutation of `prev..tips.len()`); the reduction is always in
    /// ascending tip order with ties going to the smaller tip.
    pub fn incremental_step_in_order(&self, prev: usize, lambda: f64, order: &[usize]) -> Result<StepOutcome> {
        let count = self.tips.len() - prev;
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (prev..self.tips.len()).collect::<Vec<_>>() {
            return Err(Error::Precondition("candidate order is not a permutation".into()));
        }
        let evaluated: Vec<(usize, Result<StaticSolution>)> =
            order.par_iter().map(|&k| (k, self.solve_candidate(k, lambda))).collect();
        let mut slots: Vec<Option<Result<StaticSolution>>> = (0..count).map(|_| None).collect();
        for (k, r) in evaluated {
            slots[k - prev] = Some(r);
        }
        let mut solutions = Vec::with_capacity(count);
        for slot in slots {
            solutions.push(slot.expect("every candidate evaluated")?);
        }
        let totals: Vec<f64> = solutions
            .iter()
            .enumerate()
            .map(|(j, s)| s.energy + self.tips[prev + j])
            .collect();
        let mut best = 0;
        for j in 1..count {
            if totals[j] < totals[best] {
                best = j;
            }
        }
        let iterations = solutions.iter().map(|s| s.stats.iterations).sum();
        let solution = solutions.swap_remove(best);
        Ok(StepOutcome { tip_index: prev + best, solution, iterations, candidate_totals: totals })
    }

    fn record(&self, i: usize, t: f64, lambda: f64, k: usize, energy: f64, work: f64, iters: usize) -> StepRecord {
        let a = self.tips[k];
        StepRecord {
            i,
            t,
            lambda,
            a,
            e_elastic: energy,
            e_surface: a,
            e_total: energy + a,
            work_cum: work,
            solver_iters: iters,
        }
    }

    /// Stability of `(u₀, a₀)` at `t = 0`: the violation, or a validation
    /// error when it exceeds the configured tolerance.
    pub fn check_initial_stability(&self) -> Result<f64> {
        let lambda = self.config.load.lambda(0.0);
        let violation = self.stability_violation(self.tips[0], lambda)?;
        if violation > self.config.stability_tol {
            return Err(Error::Validation(format!(
                "initial state is not globally stable (violation {violation:.3e})"
            )));
        }
        Ok(violation)
    }

    /// Run the scheme over the time partition without the initial check.
    pub fn run(&self) -> Result<EvolutionRun> {
        let times = self.config.time_grid();
        let load = &self.config.load;
        let lambdas: Vec<f64> = times.iter().map(|&t| load.lambda(t)).collect();
        let start = self.solve_candidate(0, lambdas[0]).map_err(|e| step_error(0, e))?;
        let mut records = vec![self.record(0, times[0], lambdas[0], 0, start.energy, 0.0, start.stats.iterations)];
        let mut k = 0;
        let mut u = start.field;
        let mut work = 0.0;
        for i in 1..times.len() {
            let wdot = self.physics().interpolate(u.mask(), &load.datum, 1.0);
            let rate = self.physics().work_rate(&u, &wdot).map_err(|e| step_error(i, e))?;
            work += rate * (lambdas[i] - lambdas[i - 1]);
            let out = self.incremental_step(k, lambdas[i]).map_err(|e| step_error(i, e))?;
            k = out.tip_index;
            records.push(self.record(i, times[i], lambdas[i], k, out.solution.energy, work, out.iterations));
            u = out.solution.field;
        }
        Ok(EvolutionRun { trace: EvolutionTrace { records }, final_field: u, final_crack: self.crack(k) })
    }

    /// `E_tot(a) - min_{â ≥ a} E_tot(â)` at load `λ`, with `â` ranging over
    /// the tip grid; `a` itself need not lie on the grid.
    pub fn stability_violation(&self, a: f64, lambda: f64) -> Result<f64> {
        let c = &self.config;
        let current = match self.tip_index(a) {
            Some(k) => self.solve_candidate(k, lambda)?.energy + self.tips[k],
            None => {
                let crack = self.family.with_tip(a)?;
                let mask = Arc::new(rasterize_crack(&crack, &c.domain, self.depth)?);
                self.physics().solve(&c.domain, &mask, &c.load.datum, lambda, &c.solver)?.energy + a
            }
        };
        let candidates: Vec<usize> = (0..self.tips.len()).filter(|&k| self.tips[k] >= a - GRID_TOL).collect();
        let totals = candidates
            .par_iter()
            .map(|&k| Ok(self.solve_candidate(k, lambda)?.energy + self.tips[k]))
            .collect::<Result<Vec<f64>>>()?;
        let best = totals.iter().copied().fold(current, f64::min);
        Ok(current - best)
    }

    /// Load `λ*` at which growth from `a₀` first becomes energetically
    /// favourable, from one solve per candidate at `λ = 1` and the
    /// homogeneity of the energy. `None` when no extension lowers the energy.
    pub fn first_crossover(&self) -> Result<Option<f64>> {
        let energies = (0..self.tips.len())
            .into_par_iter()
            .map(|k| Ok(self.solve_candidate(k, 1.0)?.energy))
            .collect::<Result<Vec<f64>>>()?;
        let q = self.physics().homogeneity();
        let mut best: Option<f64> = None;
        for k in 1..energies.len() {
            let gain = energies[0] - energies[k];
            if gain > 0.0 {
                let lam = ((self.tips[k] - self.tips[0]) / gain).powf(1.0 / q);
                best = Some(best.map_or(lam, |b: f64| b.min(lam)));
            }
        }
        Ok(best)
    }
}

fn step_error(index: usize, e: Error) -> Error {
    Error::Step { index, source: Box::new(e) }
}

/// Validate, check initial stability and run.
pub fn run_evolution(config: &EvolutionConfig) -> Result<EvolutionRun> {
    let evo = Evolution::new(config.clone())?;
    evo.check_initial_stability()?;
    evo.run()
}

/// A linear ramp whose first crack growth happens at `t = fraction · T`.
pub fn calibrate_ramp(config: &EvolutionConfig, fraction: f64) -> Result<EvolutionConfig> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Validation("crossover fraction must lie in (0, 1)".into()));
    }
    let evo = Evolution::new(config.clone())?;
    let lambda_star = evo
        .first_crossover()?
        .ok_or_else(|| Error::Precondition("no crack extension ever lowers the energy".into()))?;
    let mut out = config.clone();
    out.load = LoadProgram::ramp(config.load.t_final, lambda_star / fraction, config.load.datum.clone());
    Ok(out)
}

/// Stability violation of the trace row `t_index`, recomputed by fresh solves.
pub fn audit_stability(trace: &EvolutionTrace, evolution: &Evolution, t_index: usize) -> Result<f64> {
    let r = trace
        .records
        .get(t_index)
        .ok_or_else(|| Error::Precondition(format!("trace has no row {t_index}")))?;
    evolution.stability_violation(r.a, r.lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyBalance {
    /// `|E_tot(T) - E_tot(0) - work(T)|`.
    pub residual: f64,
    /// `E_tot(t) - E_tot(0) - work(t)` per row.
    pub profile: Vec<f64>,
    /// Smallest `C` with `E_tot(t) ≤ E_tot(0) + work(t) + C Δt` on every row.
    pub one_sided_constant: f64,
    pub max_dt: f64,
}

pub fn audit_energy_balance(trace: &EvolutionTrace) -> Result<EnergyBalance> {
    let rows = &trace.records;
    let first = rows.first().ok_or_else(|| Error::Precondition("empty trace".into()))?;
    let profile: Vec<f64> = rows.iter().map(|r| r.e_total - first.e_total - r.work_cum).collect();
    let max_dt = rows.windows(2).map(|w| w[1].t - w[0].t).fold(0.0, f64::max);
    let worst = profile.iter().copied().fold(0.0, f64::max);
    let one_sided_constant = if max_dt > 0.0 { worst / max_dt } else { 0.0 };
    Ok(EnergyBalance {
        residual: profile.last().copied().unwrap_or(0.0).abs(),
        profile,
        one_sided_constant,
        max_dt,
    })
}
