//! Small dense linear algebra kernels: Cholesky factorization, triangular
//! solves, and a cyclic Jacobi eigensolver for symmetric matrices.
//!
//! Matrices here are at most (N-1) x (N-1) with N <= 128, so dense O(n^3)
//! routines are fast enough and keep the crate free of external solver
//! backends.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor L with A = L Lᵀ.
///
/// Fails with `NotSpd` if a pivot is not strictly positive.
pub(crate) fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cholesky expects a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::NotSpd("Cholesky pivot <= 0"));
        }
        let diag = diag.sqrt();
        l[[j, j]] = diag;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / diag;
        }
    }
    Ok(l)
}

/// Solve L y = b for lower-triangular L.
pub(crate) fn solve_lower(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// Solve Lᵀ x = y for lower-triangular L.
pub(crate) fn solve_lower_transpose(l: &Array2<f64>, y: &Array1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = y.clone();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    x
}

/// Solve (L Lᵀ) x = b.
pub(crate) fn cholesky_solve_vec(l: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    solve_lower_transpose(l, &solve_lower(l, b))
}

/// Solve (L Lᵀ) X = B column by column.
pub(crate) fn cholesky_solve_mat(l: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let mut x = Array2::<f64>::zeros(b.raw_dim());
    for (j, col) in b.columns().into_iter().enumerate() {
        let sol = cholesky_solve_vec(l, &col.to_owned());
        x.column_mut(j).assign(&sol);
    }
    x
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. Sweeps until the off-diagonal Frobenius norm
/// drops below `1e-12` relative to the matrix norm.
pub(crate) fn jacobi_eigendecomposition(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    const TOL: f64 = 1e-12;
    const MAX_SWEEPS: usize = 50;

    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition expects a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut m = a.clone();
    let mut q = Array2::<f64>::eye(n);
    let norm = frobenius(&m).max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= TOL * norm {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for r in (p + 1)..n {
                let apq = m[[p, r]];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                // Classical Jacobi rotation choosing the smaller angle root.
                let theta = (m[[r, r]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                apply_rotation(&mut m, p, r, c, s);
                rotate_columns(&mut q, p, r, c, s);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > TOL * norm {
        return Err(Error::EigenNoConvergence(MAX_SWEEPS));
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[[i, i]], i)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));

    let eigenvalues = Array1::from_iter(pairs.iter().map(|&(v, _)| v));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &(_, src)) in pairs.iter().enumerate() {
        vectors.column_mut(dst).assign(&q.column(src));
    }
    Ok((eigenvalues, vectors))
}

fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn off_diagonal_norm(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[[i, j]] * m[[i, j]];
            }
        }
    }
    s.sqrt()
}

/// Two-sided rotation m <- Jᵀ m J on the (p, r) plane, keeping symmetry.
fn apply_rotation(m: &mut Array2<f64>, p: usize, r: usize, c: f64, s: f64) {
    let n = m.nrows();
    for k in 0..n {
        let mkp = m[[k, p]];
        let mkr = m[[k, r]];
        m[[k, p]] = c * mkp - s * mkr;
        m[[k, r]] = s * mkp + c * mkr;
    }
    for k in 0..n {
        let mpk = m[[p, k]];
        let mrk = m[[r, k]];
        m[[p, k]] = c * mpk - s * mrk;
        m[[r, k]] = s * mpk + c * mrk;
    }
}

fn rotate_columns(q: &mut Array2<f64>, p: usize, r: usize, c: f64, s: f64) {
    let n = q.nrows();
    for k in 0..n {
        let qkp = q[[k, p]];
        let qkr = q[[k, r]];
        q[[k, p]] = c * qkp - s * qkr;
        q[[k, r]] = s * qkp + c * qkr;
    }
}
