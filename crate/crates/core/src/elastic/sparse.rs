//! Compressed sparse rows and a Jacobi-preconditioned conjugate gradient.

use crate::error::{Error, Result};

/// Square sparse matrix in CSR layout with column indices sorted per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from `(row, col, value)` triplets; duplicates are summed in
    /// triplet order, so the result is deterministic for a fixed input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for r in 0..n {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut order = vec![0usize; triplets.len()];
        for (k, &(r, _, _)) in triplets.iter().enumerate() {
            order[next[r]] = k;
            next[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut scratch: Vec<(usize, usize)> = Vec::new();
        for r in 0..n {
            scratch.clear();
            scratch.extend(order[counts[r]..counts[r + 1]].iter().map(|&k| (triplets[k].1, k)));
            scratch.sort_unstable();
            let mut last: Option<usize> = None;
            for &(c, k) in &scratch {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += triplets[k].2;
                } else {
                    cols.push(c);
                    vals.push(triplets[k].2);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row(r).find(|&(c, _)| c == r).map_or(0.0, |(_, v)| v))
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// Restrict to the rows/columns with `keep[i] = Some(new_index)`, and
    /// return the coupling `K[free, fixed] x_fixed` needed for the right-hand
    /// side.
    pub fn restrict(&self, keep: &[Option<usize>], fixed_values: &[f64]) -> (CsrMatrix, Vec<f64>) {
        let m = keep.iter().filter(|k| k.is_some()).count();
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut coupling = vec![0.0; m];
        row_ptr.push(0);
        for r in 0..self.n {
            let Some(rr) = keep[r] else { continue };
            for (c, v) in self.row(r) {
                match keep[c] {
                    Some(cc) => {
                        cols.push(cc);
                        vals.push(v);
                    }
                    None => coupling[rr] += v * fixed_values[c],
                }
            }
            row_ptr.push(cols.len());
        }
        (CsrMatrix { n: m, row_ptr, cols, vals }, coupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final `‖b - Ax‖ / ‖b‖` (0 when `b = 0`).
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` for symmetric positive definite `A`, starting from the
/// contents of `x`, until `‖r‖ ≤ tol ‖b‖`.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = a.dim();
    let b_norm = dot(b, b).sqrt();
    if n == 0 || b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / b_norm;
    let mut it = 0;
    while res > tol {
        if it >= max_iter {
            return Err(Error::Solver {
                message: "conjugate gradient hit its iteration cap".into(),
                iterations: it,
                residual: res,
            });
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            return Err(Error::Solver {
                message: "matrix is not positive definite on the search direction".into(),
                iterations: it,
                residual: res,
            });
        }
        let step = rz / pap;
        for k in 0..n {
            x[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        for k in 0..n {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        it += 1;
        res = dot(&r, &r).sqrt() / b_norm;
    }
    Ok(CgOutcome { iterations: it, relative_residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn triplets_are_summed_and_sorted() {
        let a = CsrMatrix::from_triplets(2, &[(1, 1, 1.0), (0, 1, 2.0), (1, 1, 3.0), (0, 0, 1.0)]);
        assert_eq!(a.row(0).collect::<Vec<_>>(), vec![(0, 1.0), (1, 2.0)]);
        assert_eq!(a.row(1).collect::<Vec<_>>(), vec![(1, 4.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.diagonal(), vec![1.0, 4.0]);
    }

    #[test]
    fn pcg_solves_tridiagonal_system() {
        // Exact solution x_i = i + 1 gives b = A x.
        let n = 50;
        let a = laplacian_1d(n);
        let exact: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let mut b = vec![0.0; n];
        a.mul_vec(&exact, &mut b);
        let mut x = vec![0.0; n];
        let out = pcg(&a, &b, &mut x, 1e-12, 10 * n).unwrap();
        assert!(out.relative_residual <= 1e-12);
        for (xi, ei) in x.iter().zip(&exact) {
            assert!((xi - ei).abs() < 1e-8);
        }
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let a = laplacian_1d(40);
        let b = vec![1.0; 40];
        let mut x = vec![0.0; 40];
        match pcg(&a, &b, &mut x, 1e-14, 2) {
            Err(Error::Solver { iterations, residual, .. }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("expected solver error, got {other:?}"),
        }
    }

    #[test]
    fn restriction_moves_fixed_columns_to_rhs() {
        let a = laplacian_1d(3);
        let keep = [None, Some(0), None];
        let (r, coupling) = a.restrict(&keep, &[1.0, 0.0, 2.0]);
        assert_eq!(r.dim(), 1);
        assert_eq!(r.row(0).collect::<Vec<_>>(), vec![(0, 2.0)]);
        assert_eq!(coupling, vec![-3.0]);
    }
}
