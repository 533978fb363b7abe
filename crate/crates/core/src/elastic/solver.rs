//! Corner-gradient discretization of the bulk energies and the static solvers.
//!
//! Every cell contributes four corners of weight `h²/4`. The corner at node
//! `(i, j)` of a cell reads its horizontal difference from the cell edge along
//! row `j` and its vertical difference from the cell edge along column `i`; a
//! severed edge contributes a zero difference. For the quadratic scalar energy
//! this is the five-point Laplacian whose edge weights count adjacent cells.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elastic::field::{ScalarField, VectorField};
use crate::elastic::grid::{Domain, Grid};
use crate::elastic::mask::CrackMask;
use crate::elastic::material::{ElasticityTensor, Integrand, IntegrandKind};
use crate::elastic::sparse::{pcg, CgOutcome, CsrMatrix};
use crate::error::{Error, Result};

/// Squared regularization of `|ξ|` in the Newton Hessian of the p-power density.
/// Final smoothing of the p-power density, `ε² = 1e-12`.
const SMOOTHING_EPS2: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Relative residual for linear solves.
    pub linear_tol: f64,
    /// Euclidean norm of the discrete energy gradient for nonlinear solves.
    pub gradient_tol: f64,
    /// Cap on conjugate-gradient iterations per linear solve; `None` means ten
    /// times the number of nodes.
    pub max_linear_iterations: Option<usize>,
    pub max_newton_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            linear_tol: 1e-10,
            gradient_tol: 1e-8,
            max_linear_iterations: None,
            max_newton_steps: 200,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.linear_tol > 0.0 && self.gradient_tol > 0.0) || self.max_newton_steps == 0 {
            return Err(Error::Validation("solver tolerances must be positive".into()));
        }
        if self.max_linear_iterations == Some(0) {
            return Err(Error::Validation("linear iteration cap must be positive".into()));
        }
        Ok(())
    }

    fn linear_cap(&self, grid: &Grid) -> usize {
        self.max_linear_iterations.unwrap_or(10 * grid.node_count())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveStats {
    /// Conjugate-gradient iterations summed over all linear solves.
    pub iterations: usize,
    pub newton_steps: usize,
    /// Final relative linear residual (quadratic) or gradient norm (nonlinear).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub field: ScalarField,
    pub energy: f64,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarSolution {
    pub field: VectorField,
    pub energy: f64,
    pub stats: SolveStats,
}

/// Node-pair `(from, to)` of an unsevered edge.
type Diff = Option<(usize, usize)>;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Corner {
    pub h: Diff,
    pub v: Diff,
}

/// Four corners per cell, cells in row-major order, corners ordered
/// bottom-left, bottom-right, top-left, top-right.
pub(crate) fn corners(mask: &CrackMask) -> Vec<Corner> {
    let g = *mask.grid();
    let mut out = Vec::with_capacity(4 * g.cell_count());
    for cj in 0..g.ny {
        for ci in 0..g.nx {
            let (n00, n10) = (g.node(ci, cj), g.node(ci + 1, cj));
            let (n01, n11) = (g.node(ci, cj + 1), g.node(ci + 1, cj + 1));
            let bottom = (!mask.h_severed(ci, cj)).then_some((n00, n10));
            let top = (!mask.h_severed(ci, cj + 1)).then_some((n01, n11));
            let left = (!mask.v_severed(ci, cj)).then_some((n00, n01));
            let right = (!mask.v_severed(ci + 1, cj)).then_some((n10, n11));
            out.extend([
                Corner { h: bottom, v: left },
                Corner { h: bottom, v: right },
                Corner { h: top, v: left },
                Corner { h: top, v: right },
            ]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NodeRole {
    Free,
    /// Carries the Dirichlet datum.
    Datum,
    /// In a component without active Dirichlet nodes; fixed at 0.
    Pinned,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Classify nodes. A Dirichlet node all of whose edges are severed is released.
pub(crate) fn node_roles(domain: &Domain, mask: &CrackMask) -> Result<Vec<NodeRole>> {
    let g = domain.grid();
    if *mask.grid() != g {
        return Err(Error::Validation("mask grid does not match the domain".into()));
    }
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut open_degree = vec![0u8; n];
    let mut join = |a: usize, b: usize, parent: &mut Vec<usize>| {
        open_degree[a] += 1;
        open_degree[b] += 1;
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            if i < g.nx && !mask.h_severed(i, j) {
                join(g.node(i, j), g.node(i + 1, j), &mut parent);
            }
            if j < g.ny && !mask.v_severed(i, j) {
                join(g.node(i, j), g.node(i, j + 1), &mut parent);
            }
        }
    }
    let on_dirichlet = domain.dirichlet_nodes();
    let active: Vec<bool> = (0..n).map(|k| on_dirichlet[k] && open_degree[k] > 0).collect();
    let mut anchored = vec![false; n];
    for k in 0..n {
        if active[k] {
            let r = find(&mut parent, k);
            anchored[r] = true;
        }
    }
    Ok((0..n)
        .map(|k| {
            if active[k] {
                NodeRole::Datum
            } else if anchored[find(&mut parent, k)] {
                NodeRole::Free
            } else {
                NodeRole::Pinned
            }
        })
        .collect())
}

fn diffs<const N: usize>(ops: &[Diff; N], x: &[f64]) -> [f64; N] {
    let mut q = [0.0; N];
    for (qa, op) in q.iter_mut().zip(ops) {
        if let Some((from, to)) = op {
            *qa = x[*to] - x[*from];
        }
    }
    q
}

fn push_local<const N: usize>(
    triplets: &mut Vec<(usize, usize, f64)>,
    ops: &[Diff; N],
    m: &[[f64; N]; N],
    scale: f64,
) {
    for a in 0..N {
        let Some((fa, ta)) = ops[a] else { continue };
        for b in 0..N {
            let Some((fb, tb)) = ops[b] else { continue };
            let v = scale * m[a][b];
            if v == 0.0 {
                continue;
            }
            triplets.extend([(ta, tb, v), (ta, fb, -v), (fa, tb, -v), (fa, fb, v)]);
        }
    }
}

fn scalar_ops(c: &Corner) -> [Diff; 2] {
    [c.h, c.v]
}

/// Difference operators on interleaved dofs `(2n, 2n + 1)`, in the order
/// `Dh ux, Dh uy, Dv ux, Dv uy`.
fn planar_ops(c: &Corner) -> [Diff; 4] {
    let comp = |d: Diff, k: usize| d.map(|(a, b)| (2 * a + k, 2 * b + k));
    [comp(c.h, 0), comp(c.h, 1), comp(c.v, 0), comp(c.v, 1)]
}

/// Position of each free dof among the free dofs.
fn free_index(fixed: &[Option<f64>]) -> Vec<Option<usize>> {
    let mut next = 0;
    fixed
        .iter()
        .map(|f| {
            f.is_none().then(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Minimize the quadratic `½ xᵀKx` over dofs with `fixed[i] = Some(value)`
/// prescribed; `x` holds the initial guess on entry.
fn solve_constrained(
    k: &CsrMatrix,
    fixed: &[Option<f64>],
    x: &mut [f64],
    tol: f64,
    cap: usize,
) -> Result<CgOutcome> {
    let keep = free_index(fixed);
    let values: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    let (kff, coupling) = k.restrict(&keep, &values);
    let b: Vec<f64> = coupling.iter().map(|c| -c).collect();
    let mut xf: Vec<f64> = (0..x.len()).filter(|&i| keep[i].is_some()).map(|i| x[i]).collect();
    let out = pcg(&kff, &b, &mut xf, tol, cap)?;
    for i in 0..x.len() {
        x[i] = match keep[i] {
            Some(r) => xf[r],
            None => values[i],
        };
    }
    Ok(out)
}

fn check_datum_grid(domain: &Domain, grid: &Grid) -> Result<()> {
    if domain.grid() != *grid {
        return Err(Error::Validation("datum grid does not match the domain".into()));
    }
    Ok(())
}

/// Per-corner gradients `ξ` of a scalar field through its own mask.
pub fn scalar_corner_gradients(u: &ScalarField) -> Vec<[f64; 2]> {
    let h = u.grid().h;
    corners(u.mask())
        .iter()
        .map(|c| {
            let q = diffs(&scalar_ops(c), u.values());
            [q[0] / h, q[1] / h]
        })
        .collect()
}

/// Per-corner displacement gradients `G[r][c] = ∂u_r/∂x_c` through the mask.
pub fn planar_corner_gradients(u: &VectorField) -> Vec<[[f64; 2]; 2]> {
    let h = u.grid().h;
    let flat: Vec<f64> = u.values().iter().flatten().copied().collect();
    corners(u.mask())
        .iter()
        .map(|c| {
            let q = diffs(&planar_ops(c), &flat);
            [[q[0] / h, q[2] / h], [q[1] / h, q[3] / h]]
        })
        .collect()
}

fn sym(g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let s = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], s], [s, g[1][1]]]
}

/// `Σ_corners (h²/4) f(∇_h u)`.
pub fn scalar_energy(u: &ScalarField, f: &Integrand) -> f64 {
    let w = 0.25 * u.grid().h * u.grid().h;
    scalar_corner_gradients(u).iter().map(|xi| w * f.value(*xi)).sum()
}

/// `Σ_corners (h²/4) ½ ℂE_h u : E_h u`.
pub fn planar_energy(u: &VectorField, t: &ElasticityTensor) -> f64 {
    let w = 0.25 * u.grid().h * u.grid().h;
    planar_corner_gradients(u)
        .iter()
        .map(|g| {
            let e = sym(*g);
            0.5 * w * t.contract(e, e)
        })
        .sum()
}

/// `Σ_corners (h²/4) ∂f(∇_h u) · ∇_h ẇ`, both gradients taken through the mask of `u`.
pub fn scalar_work_rate(u: &ScalarField, wdot: &ScalarField, f: &Integrand) -> Result<f64> {
    let wdot = wdot.with_mask(u.mask().clone())?;
    let w = 0.25 * u.grid().h * u.grid().h;
    Ok(scalar_corner_gradients(u)
        .iter()
        .zip(scalar_corner_gradients(&wdot))
        .map(|(gu, gw)| {
            let s = f.gradient(*gu);
            w * (s[0] * gw[0] + s[1] * gw[1])
        })
        .sum())
}

/// `Σ_corners (h²/4) ℂE_h u : E_h ẇ` through the mask of `u`.
pub fn planar_work_rate(u: &VectorField, wdot: &VectorField, t: &ElasticityTensor) -> Result<f64> {
    let wdot = wdot.with_mask(u.mask().clone())?;
    let w = 0.25 * u.grid().h * u.grid().h;
    Ok(planar_corner_gradients(u)
        .iter()
        .zip(planar_corner_gradients(&wdot))
        .map(|(gu, gw)| w * t.contract(sym(*gu), sym(gw)))
        .sum())
}

/// Minimize the scalar energy with Dirichlet values taken from `datum`,
/// starting from the datum itself.
pub fn solve_scalar(
    domain: &Domain,
    mask: &Arc<CrackMask>,
    f: &Integrand,
    datum: &ScalarField,
    opts: &SolverOptions,
) -> Result<ScalarSolution> {
    solve_scalar_from(domain, mask, f, datum, datum.values(), opts)
}

/// As [`solve_scalar`] from an explicit initial guess (free values only are used).
pub fn solve_scalar_from(
    domain: &Domain,
    mask: &Arc<CrackMask>,
    f: &Integrand,
    datum: &ScalarField,
    initial: &[f64],
    opts: &SolverOptions,
) -> Result<ScalarSolution> {
    f.validate()?;
    opts.validate()?;
    let grid = domain.grid();
    check_datum_grid(domain, datum.grid())?;
    let roles = node_roles(domain, mask)?;
    if initial.len() != grid.node_count() {
        return Err(Error::Validation("initial guess has the wrong length".into()));
    }
    let fixed: Vec<Option<f64>> = roles
        .iter()
        .zip(datum.values())
        .map(|(role, w)| match role {
            NodeRole::Free => None,
            NodeRole::Datum => Some(*w),
            NodeRole::Pinned => Some(0.0),
        })
        .collect();
    if fixed.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Validation("datum is not finite on Dirichlet nodes".into()));
    }
    let mut x: Vec<f64> = initial
        .iter()
        .zip(&fixed)
        .map(|(v, fx)| fx.unwrap_or(if v.is_finite() { *v } else { 0.0 }))
        .collect();
    let corners = corners(mask);
    let cap = opts.linear_cap(&grid);
    let stats = match f.kind {
        IntegrandKind::Quadratic => {
            let mut triplets = Vec::with_capacity(32 * corners.len());
            for c in &corners {
                push_local(&mut triplets, &scalar_ops(c), &[[1.0, 0.0], [0.0, 1.0]], 0.25);
            }
            let k = CsrMatrix::from_triplets(grid.node_count(), &triplets);
            let out = solve_constrained(&k, &fixed, &mut x, opts.linear_tol, cap)?;
            SolveStats { iterations: out.iterations, newton_steps: 0, residual: out.relative_residual }
        }
        IntegrandKind::PPower => newton(&grid, &corners, f, &fixed, &mut x, opts)?,
    };
    let field = ScalarField::new(mask.clone(), x)?;
    let energy = scalar_energy(&field, f);
    Ok(ScalarSolution { field, energy, stats })
}

fn nonlinear_energy(corners: &[Corner], f: &Integrand, x: &[f64], h: f64, eps2: f64) -> f64 {
    let w = 0.25 * h * h;
    corners
        .iter()
        .map(|c| {
            let q = diffs(&scalar_ops(c), x);
            w * f.regularized_value([q[0] / h, q[1] / h], eps2)
        })
        .sum()
}

fn nonlinear_gradient(
    corners: &[Corner],
    f: &Integrand,
    x: &[f64],
    h: f64,
    eps2: f64,
    fixed: &[Option<f64>],
) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for c in corners {
        let ops = scalar_ops(c);
        let q = diffs(&ops, x);
        let s = f.regularized_gradient([q[0] / h, q[1] / h], eps2);
        for (op, sa) in ops.iter().zip(s) {
            if let Some((from, to)) = op {
                g[*to] += 0.25 * h * sa;
                g[*from] -= 0.25 * h * sa;
            }
        }
    }
    for (gi, fx) in g.iter_mut().zip(fixed) {
        if fx.is_some() {
            *gi = 0.0;
        }
    }
    g
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton continuation on the smoothed density: each stage divides `ε²` by
/// 100 and warm-starts from the previous one; the last stage runs to the
/// gradient tolerance.
fn newton(
    grid: &Grid,
    corners: &[Corner],
    f: &Integrand,
    fixed: &[Option<f64>],
    x: &mut Vec<f64>,
    opts: &SolverOptions,
) -> Result<SolveStats> {
    let mut stats = SolveStats::default();
    let mut eps2 = 1e-2;
    loop {
        let last = eps2 <= SMOOTHING_EPS2;
        let tol = if last { opts.gradient_tol } else { opts.gradient_tol.max(1e-6) };
        stats.residual = newton_stage(grid, corners, f, fixed, x, opts, eps2, tol, &mut stats)?;
        if last {
            return Ok(stats);
        }
        eps2 = (eps2 * 1e-2).max(SMOOTHING_EPS2);
    }
}

/// Damped Newton with Armijo backtracking; returns the final gradient norm.
#[allow(clippy::too_many_arguments)]
fn newton_stage(
    grid: &Grid,
    corners: &[Corner],
    f: &Integrand,
    fixed: &[Option<f64>],
    x: &mut Vec<f64>,
    opts: &SolverOptions,
    eps2: f64,
    tol: f64,
    stats: &mut SolveStats,
) -> Result<f64> {
    let h = grid.h;
    let cap = opts.linear_cap(grid);
    let mut energy = nonlinear_energy(corners, f, x, h, eps2);
    let mut g = nonlinear_gradient(corners, f, x, h, eps2, fixed);
    let mut gnorm = norm(&g);
    let zero_fixed: Vec<Option<f64>> = fixed.iter().map(|v| v.map(|_| 0.0)).collect();
    while gnorm > tol {
        if stats.newton_steps >= opts.max_newton_steps {
            return Err(Error::Solver {
                message: "Newton iteration cap reached".into(),
                iterations: stats.newton_steps,
                residual: gnorm,
            });
        }
        stats.newton_steps += 1;
        let mut triplets = Vec::with_capacity(32 * corners.len());
        for c in corners {
            let ops = scalar_ops(c);
            let q = diffs(&ops, x);
            let hess = f.regularized_hessian([q[0] / h, q[1] / h], eps2);
            push_local(&mut triplets, &ops, &hess, 0.25);
        }
        let k = CsrMatrix::from_triplets(x.len(), &triplets);
        // Solve K d = -g by minimizing ½dᵀKd + gᵀd: shift the fixed-free coupling
        // into the right-hand side through a zero Dirichlet datum.
        let mut d = vec![0.0; x.len()];
        let lin_tol = gnorm.min(1e-2).max(opts.linear_tol);
        let out = solve_linear_system(&k, &g, &zero_fixed, &mut d, lin_tol, cap)?;
        stats.iterations += out.iterations;
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut accepted = false;
        let mut trial = x.clone();
        while t >= 1e-10 {
            for i in 0..x.len() {
                trial[i] = x[i] + t * d[i];
            }
            let e = nonlinear_energy(corners, f, &trial, h, eps2);
            if e <= energy + ARMIJO * t * slope {
                energy = e;
                accepted = true;
                break;
            }
            // Near the minimum the energy change drops below rounding; accept a
            // step that still lowers the gradient norm.
            if (e - energy).abs() <= 1e-14 * energy.abs().max(1e-300) {
                let gt = nonlinear_gradient(corners, f, &trial, h, eps2, fixed);
                if norm(&gt) < gnorm {
                    energy = e;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::Solver {
                message: "line search found no energy decrease".into(),
                iterations: stats.newton_steps,
                residual: gnorm,
            });
        }
        std::mem::swap(x, &mut trial);
        g = nonlinear_gradient(corners, f, x, h, eps2, fixed);
        gnorm = norm(&g);
    }
    Ok(gnorm)
}

/// Solve `K_ff d_f = -g_f` with `d = 0` on fixed dofs.
fn solve_linear_system(
    k: &CsrMatrix,
    g: &[f64],
    fixed: &[Option<f64>],
    d: &mut [f64],
    tol: f64,
    cap: usize,
) -> Result<CgOutcome> {
    let keep = free_index(fixed);
    let (kff, _) = k.restrict(&keep, &vec![0.0; g.len()]);
    let b: Vec<f64> = (0..g.len()).filter(|&i| keep[i].is_some()).map(|i| -g[i]).collect();
    let mut df = vec![0.0; b.len()];
    let out = pcg(&kff, &b, &mut df, tol, cap)?;
    for i in 0..d.len() {
        d[i] = keep[i].map_or(0.0, |r| df[r]);
    }
    Ok(out)
}

/// Minimize the planar elastic energy with Dirichlet values from `datum`.
pub fn solve_planar(
    domain: &Domain,
    mask: &Arc<CrackMask>,
    t: &ElasticityTensor,
    datum: &VectorField,
    opts: &SolverOptions,
) -> Result<PlanarSolution> {
    t.validate()?;
    opts.validate()?;
    let grid = domain.grid();
    check_datum_grid(domain, datum.grid())?;
    let roles = node_roles(domain, mask)?;
    let mut fixed = Vec::with_capacity(2 * grid.node_count());
    for (role, w) in roles.iter().zip(datum.values()) {
        for k in 0..2 {
            fixed.push(match role {
                NodeRole::Free => None,
                NodeRole::Datum => Some(w[k]),
                NodeRole::Pinned => Some(0.0),
            });
        }
    }
    if fixed.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Validation("datum is not finite on Dirichlet nodes".into()));
    }
    let mut x: Vec<f64> = datum
        .values()
        .iter()
        .flatten()
        .zip(&fixed)
        .map(|(v, fx)| fx.unwrap_or(if v.is_finite() { *v } else { 0.0 }))
        .collect();
    let (l, m) = (t.lambda, t.mu);
    let local = [
        [2.0 * m + l, 0.0, 0.0, l],
        [0.0, m, m, 0.0],
        [0.0, m, m, 0.0],
        [l, 0.0, 0.0, 2.0 * m + l],
    ];
    let corners = corners(mask);
    let mut triplets = Vec::with_capacity(64 * corners.len());
    for c in &corners {
        push_local(&mut triplets, &planar_ops(c), &local, 0.25);
    }
    let k = CsrMatrix::from_triplets(2 * grid.node_count(), &triplets);
    let out = solve_constrained(&k, &fixed, &mut x, opts.linear_tol, 2 * opts.linear_cap(&grid))?;
    let values: Vec<[f64; 2]> = x.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
    let field = VectorField::new(mask.clone(), values)?;
    let energy = planar_energy(&field, t);
    Ok(PlanarSolution {
        field,
        energy,
        stats: SolveStats { iterations: out.iterations, newton_steps: 0, residual: out.relative_residual },
    })
}
