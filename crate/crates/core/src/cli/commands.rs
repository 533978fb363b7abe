use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde_json::json;

use super::config::RunConfig;
use super::Outcome;
use crate::crack::Crack;
use crate::curve::AlphaCurve;
use crate::elastic::{rasterize_crack, CrackMask};
use crate::error::{Error, Result};
use crate::evolution::{audit_energy_balance, audit_stability, run_evolution, Evolution, EvolutionTrace};
use crate::geometry::{alpha_content, box_count, box_dimension_estimate, PointSet};
use crate::verification::{minimizer_convergence_study, semicontinuity_demo};

fn missing(section: &str) -> Error {
    Error::Validation(format!("configuration has no `{section}` section"))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub(crate) fn curve(cfg: &RunConfig) -> Result<Outcome> {
    let sec = cfg.curve.as_ref().ok_or_else(|| missing("curve"))?;
    let curve = AlphaCurve::from_spec(&sec.curve, 2)?;
    let verts = curve.prefractal(sec.depth);
    let params = curve.junction_parameters(sec.depth);
    let prefractal = csv_bytes(|out| {
        writeln!(out, "index,s,x,y")?;
        for (k, (p, s)) in verts.iter().zip(&params).enumerate() {
            writeln!(out, "{k},{s},{},{}", p.x, p.y)?;
        }
        Ok(())
    })?;
    let holder = curve.estimate_holder_constants(sec.certification_depth, sec.pair_budget, cfg.seed)?;
    let holder_csv = csv_bytes(|out| {
        writeln!(out, "depth,c,C,argmin_s1,argmin_s2,argmax_s1,argmax_s2,pairs")?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            sec.certification_depth,
            holder.c,
            holder.big_c,
            holder.argmin.0,
            holder.argmin.1,
            holder.argmax.0,
            holder.argmax.1,
            holder.pairs
        )?;
        Ok(())
    })?;
    Ok(Outcome {
        files: vec![("prefractal.csv".into(), prefractal), ("holder.csv".into(), holder_csv)],
        summary: json!({
            "vertices": verts.len(),
            "alpha": curve.alpha(),
            "holder_c": holder.c,
            "holder_C": holder.big_c,
        }),
        audit_failed: false,
    })
}

pub(crate) fn solve(cfg: &RunConfig) -> Result<Outcome> {
    let sec = cfg.solve.as_ref().ok_or_else(|| missing("solve"))?;
    let grid = sec.domain.grid();
    let (mask, crack) = match &sec.crack {
        None => (CrackMask::empty(grid), None),
        Some(spec) => {
            let crack = Crack::from_spec(spec, sec.certification_depth)?;
            let depth = match sec.depth {
                Some(d) => d,
                None => (1..=40)
                    .find(|&d| crack.curve().cell_diameter(d) <= sec.domain.h * (1.0 + 1e-12))
                    .ok_or_else(|| Error::Coupling("no depth resolves the grid step".into()))?,
            };
            (rasterize_crack(&crack, &sec.domain, depth)?, Some(crack))
        }
    };
    let mask = Arc::new(mask);
    let sol = sec.physics.solve(&sec.domain, &mask, &sec.datum, sec.lambda, &sec.solver)?;
    let surface = crack.as_ref().map_or(0.0, |c| c.alpha_measure());
    let mut files = Vec::new();
    if cfg.emit.fields {
        files.push(("field.csv".into(), csv_bytes(|out| sol.field.write_csv(out))?));
    }
    if cfg.emit.masks {
        files.push(("mask.csv".into(), csv_bytes(|out| mask.write_csv(out))?));
    }
    Ok(Outcome {
        files,
        summary: json!({
            "energy": sol.energy,
            "surface_energy": surface,
            "total_energy": sol.energy + surface,
            "severed_edges": mask.severed_count(),
            "iterations": sol.stats.iterations,
            "newton_steps": sol.stats.newton_steps,
            "residual": sol.stats.residual,
        }),
        audit_failed: false,
    })
}

pub(crate) fn evolve(cfg: &RunConfig) -> Result<Outcome> {
    let sec = cfg.evolution.as_ref().ok_or_else(|| missing("evolution"))?;
    let run = run_evolution(sec)?;
    let balance = audit_energy_balance(&run.trace)?;
    let mut files = vec![("trace.csv".to_string(), csv_bytes(|out| run.trace.write_csv(out))?)];
    if cfg.emit.fields {
        files.push(("final_field.csv".into(), csv_bytes(|out| run.final_field.write_csv(out))?));
    }
    if cfg.emit.masks {
        files.push(("final_mask.csv".into(), csv_bytes(|out| run.final_field.mask().write_csv(out))?));
    }
    let last = run.trace.records.last().expect("trace has the initial row");
    Ok(Outcome {
        files,
        summary: json!({
            "steps": run.trace.records.len() - 1,
            "final_a": last.a,
            "final_total_energy": last.e_total,
            "energy_residual": balance.residual,
            "one_sided_constant": balance.one_sided_constant,
        }),
        audit_failed: false,
    })
}

pub(crate) fn audit(cfg: &RunConfig, trace_path: &Path) -> Result<Outcome> {
    let sec = cfg.evolution.as_ref().ok_or_else(|| missing("evolution"))?;
    let trace = EvolutionTrace::read_csv(std::fs::File::open(trace_path)?)?;
    let evo = Evolution::new(sec.clone())?;
    let tol = cfg.audit.and_then(|a| a.stability_tol).unwrap_or(sec.stability_tol);
    let times = sec.time_grid();
    let mut problems = Vec::new();
    if trace.records.len() != times.len() {
        problems.push(format!("trace has {} rows, expected {}", trace.records.len(), times.len()));
    }
    if !trace.is_irreversible() {
        problems.push("crack tip decreases along the trace".to_string());
    }
    if !trace.bookkeeping_holds() {
        problems.push("surface energy or total energy bookkeeping is inconsistent".to_string());
    }
    if trace.records.first().is_some_and(|r| r.a != evo.tips()[0]) {
        problems.push("initial tip differs from the configuration".to_string());
    }
    let mut violations = Vec::with_capacity(trace.records.len());
    for i in 0..trace.records.len() {
        violations.push(audit_stability(&trace, &evo, i)?);
    }
    let worst = violations.iter().copied().fold(0.0, f64::max);
    if worst > tol {
        problems.push(format!("stability violation {worst:.3e} exceeds {tol:.3e}"));
    }
    let balance = audit_energy_balance(&trace)?;
    if let Some(max) = cfg.audit.and_then(|a| a.max_energy_residual) {
        if balance.residual > max {
            problems.push(format!("energy residual {:.3e} exceeds {max:.3e}", balance.residual));
        }
    }
    let report = csv_bytes(|out| {
        writeln!(out, "i,t,a,stability_violation,energy_defect")?;
        for ((r, v), d) in trace.records.iter().zip(&violations).zip(&balance.profile) {
            writeln!(out, "{},{},{},{v},{d}", r.i, r.t, r.a)?;
        }
        Ok(())
    })?;
    Ok(Outcome {
        files: vec![("audit.csv".into(), report)],
        summary: json!({
            "max_stability_violation": worst,
            "energy_residual": balance.residual,
            "one_sided_constant": balance.one_sided_constant,
            "problems": problems,
        }),
        audit_failed: !problems.is_empty(),
    })
}

pub(crate) fn converge(cfg: &RunConfig) -> Result<Outcome> {
    let sec = cfg.converge.as_ref().ok_or_else(|| missing("converge"))?;
    let crack = Crack::from_spec(&sec.crack, sec.certification_depth)?;
    let report = minimizer_convergence_study(&crack, &sec.domain, &sec.datum, &sec.integrand, &sec.depths, &sec.solver)?;
    Ok(Outcome {
        files: vec![("convergence.csv".into(), csv_bytes(|out| report.write_csv(out))?)],
        summary: json!({
            "finest_depth": report.finest_depth,
            "limit_stand_in": "the finest depth replaces the limit crack",
            "gradient_distance_decreasing": report.gradient_distance_decreasing(),
            "energy_gap_decreasing": report.energy_gap_decreasing(),
        }),
        audit_failed: false,
    })
}

pub(crate) fn dimension(cfg: &RunConfig) -> Result<Outcome> {
    let sec = cfg.dimension.as_ref().ok_or_else(|| missing("dimension"))?;
    let curve = AlphaCurve::from_spec(&sec.curve, 2)?;
    let alpha = sec.alpha.unwrap_or(curve.alpha());
    let points = PointSet::new(curve.prefractal(sec.depth))?;
    let counts = csv_bytes(|out| {
        writeln!(out, "eps,N,content")?;
        for &e in &sec.eps {
            writeln!(out, "{e},{},{}", box_count(&points, e)?, alpha_content(&points, e, alpha)?)?;
        }
        Ok(())
    })?;
    let fit = box_dimension_estimate(&points, &sec.eps)?;
    let fit_csv = format!("slope,intercept,r2\n{},{},{}\n", fit.slope, fit.intercept, fit.r2).into_bytes();
    let mut files = vec![("box_counts.csv".to_string(), counts), ("dimension.csv".to_string(), fit_csv)];
    let mut summary = json!({
        "slope": fit.slope,
        "r2": fit.r2,
        "unreliable": fit.unreliable,
        "alpha": alpha,
    });
    if !sec.content_depths.is_empty() {
        let deep = sec.deep_depth.unwrap_or(sec.depth);
        let min_eps = sec.eps.iter().copied().fold(f64::INFINITY, f64::min);
        let resolved = sec.resolved_eps.unwrap_or(min_eps);
        let table = semicontinuity_demo(&curve, &sec.content_depths, &sec.eps, alpha, deep, resolved)?;
        files.push(("contents.csv".into(), csv_bytes(|out| table.write_csv(out))?));
        summary["deep_floor"] = json!(table.deep_floor());
        summary["row_decay_ratios"] = json!(sec
            .content_depths
            .iter()
            .map(|&n| table.row_decay_ratio(curve.ratio(), n))
            .collect::<Vec<_>>());
    }
    Ok(Outcome { files, summary, audit_failed: false })
}
