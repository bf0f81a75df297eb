//! Sparse matrix storage and linear solvers for the reduced face system.
//!
//! The matrix is built from triplets into compressed sparse row form.
//! Systems up to a size threshold go through a sparse direct LU
//! factorization; larger systems use BiCGStab preconditioned with an
//! incomplete LU factorization without fill-in. Both paths must meet the
//! same relative residual contract, which the caller verifies.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::{Error, Result};

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix from (row, col, value) triplets.
    ///
    /// Duplicates are summed. The triplets are ordered by (row, col,
    /// value) before accumulation, so the result is bitwise independent of
    /// the order in which contributions were generated.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_unstable_by(|a, b| {
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then_with(|| a.2.total_cmp(&b.2))
        });
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (row, col, value) in triplets {
            debug_assert!(row < nrows && col < ncols);
            match merged.last_mut() {
                Some((r, c, v)) if *r == row && *c == col => *v += value,
                _ => merged.push((row, col, value)),
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        for &(row, _, _) in &merged {
            row_ptr[row + 1] += 1;
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx: merged.iter().map(|t| t.1).collect(),
            values: merged.iter().map(|t| t.2).collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Structural nonzeros in one row.
    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    pub fn row_entries(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for row in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[row] = acc;
        }
        y
    }

    /// Residual b - A x.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = self.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        r
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sparse direct solve through an LU factorization with fill-reducing
/// ordering.
pub fn solve_direct(matrix: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let triplets: Vec<Triplet<usize, usize, f64>> = (0..matrix.nrows)
        .flat_map(|row| {
            matrix
                .row_entries(row)
                .map(move |(col, value)| Triplet::new(row, col, value))
        })
        .collect();
    let mat = SparseColMat::try_new_from_triplets(matrix.nrows, matrix.ncols, &triplets)
        .map_err(|_| Error::SingularSystem(0))?;
    let lu = mat.sp_lu().map_err(|_| {
        Error::SingularSystem(first_suspicious_row(matrix))
    })?;
    let mut b = Mat::<f64>::zeros(matrix.nrows, 1);
    for (i, &v) in rhs.iter().enumerate() {
        b[(i, 0)] = v;
    }
    let x = lu.solve(&b);
    let solution: Vec<f64> = (0..matrix.nrows).map(|i| x[(i, 0)]).collect();
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem(
            solution.iter().position(|v| !v.is_finite()).unwrap_or(0),
        ));
    }
    Ok(solution)
}

/// Best-effort guess at the offending equation of a singular system: an
/// empty row, or a row whose diagonal and off-diagonals all vanish.
fn first_suspicious_row(matrix: &CsrMatrix) -> usize {
    for row in 0..matrix.nrows {
        let mut max_mag = 0.0f64;
        for (_, v) in matrix.row_entries(row) {
            max_mag = max_mag.max(v.abs());
        }
        if max_mag == 0.0 {
            return row;
        }
    }
    0
}

/// Incomplete LU factorization without fill-in, stored in CSR layout with
/// the same sparsity pattern as the input.
pub struct Ilu0 {
    factors: CsrMatrix,
    diag_ptr: Vec<usize>,
}

impl Ilu0 {
    pub fn new(matrix: &CsrMatrix) -> Result<Self> {
        let mut factors = matrix.clone();
        let n = factors.nrows;
        let mut diag_ptr = vec![usize::MAX; n];
        for row in 0..n {
            for k in factors.row_ptr[row]..factors.row_ptr[row + 1] {
                if factors.col_idx[k] == row {
                    diag_ptr[row] = k;
                }
            }
            if diag_ptr[row] == usize::MAX {
                return Err(Error::SingularSystem(row));
            }
        }
        // Standard IKJ-ordered incomplete factorization.
        for i in 1..n {
            let row_start = factors.row_ptr[i];
            let row_end = factors.row_ptr[i + 1];
            for kk in row_start..row_end {
                let k = factors.col_idx[kk];
                if k >= i {
                    break;
                }
                let pivot = factors.values[diag_ptr[k]];
                if pivot == 0.0 {
                    return Err(Error::SingularSystem(k));
                }
                let lik = factors.values[kk] / pivot;
                factors.values[kk] = lik;
                // Subtract lik * U(k, j) for j > k, restricted to the
                // pattern of row i.
                let mut jj = kk + 1;
                for uk in (diag_ptr[k] + 1)..factors.row_ptr[k + 1] {
                    let col = factors.col_idx[uk];
                    while jj < row_end && factors.col_idx[jj] < col {
                        jj += 1;
                    }
                    if jj < row_end && factors.col_idx[jj] == col {
                        factors.values[jj] -= lik * factors.values[uk];
                    }
                }
            }
            if factors.values[diag_ptr[i]] == 0.0 {
                return Err(Error::SingularSystem(i));
            }
        }
        Ok(Ilu0 { factors, diag_ptr })
    }

    /// Applies (LU)^{-1} to `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.factors.nrows;
        let mut y = v.to_vec();
        // Forward: L has unit diagonal.
        for i in 0..n {
            let mut acc = y[i];
            for k in self.factors.row_ptr[i]..self.diag_ptr[i] {
                acc -= self.factors.values[k] * y[self.factors.col_idx[k]];
            }
            y[i] = acc;
        }
        // Backward with U.
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in (self.diag_ptr[i] + 1)..self.factors.row_ptr[i + 1] {
                acc -= self.factors.values[k] * y[self.factors.col_idx[k]];
            }
            y[i] = acc / self.factors.values[self.diag_ptr[i]];
        }
        y
    }
}

/// Right-preconditioned BiCGStab.
///
/// Iterates until the true relative residual drops below `tol` or the
/// iteration budget is exhausted.
pub fn bicgstab(
    matrix: &CsrMatrix,
    rhs: &[f64],
    precond: &Ilu0,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = matrix.nrows;
    let bnorm = norm2(rhs).max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut best_residual = norm2(&r) / bnorm;

    for iter in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < f64::MIN_POSITIVE {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = precond.apply(&p);
        v = matrix.mul_vec(&p_hat);
        alpha = rho / dot(&r0, &v);
        let mut s = r.clone();
        for i in 0..n {
            s[i] -= alpha * v[i];
        }
        let s_hat = precond.apply(&s);
        let t = matrix.mul_vec(&s_hat);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm2(&r) / bnorm;
        best_residual = best_residual.min(rel);
        if rel < tol {
            // Confirm with the true residual; rounding can detach the
            // recursive residual from it.
            let true_rel = norm2(&matrix.residual(&x, rhs)) / bnorm;
            if true_rel < tol {
                return Ok(x);
            }
        }
        if omega == 0.0 {
            return Err(Error::IterativeNoConvergence {
                residual: best_residual,
                iterations: iter + 1,
            });
        }
    }
    let true_rel = norm2(&matrix.residual(&x, rhs)) / bnorm;
    if true_rel < tol {
        return Ok(x);
    }
    Err(Error::IterativeNoConvergence {
        residual: true_rel,
        iterations: max_iter,
    })
}
