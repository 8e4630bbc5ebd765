//! Mass and stiffness matrices of the Dirichlet basis, the generalized
//! eigendecomposition that diagonalizes the semi-implicit solve, and L²
//! projection of initial data.
//!
//! The pencil is B h_i = λ_i A h_i with B the mass matrix and A the
//! stiffness matrix. Eigenvectors are normalized so that Hᵀ A H = I, which
//! also gives Hᵀ B H = Λ; both identities together decouple the implicit
//! update per mode. The stiffness matrix is assembled numerically rather
//! than assumed diagonal, so the decomposition is correct for any
//! normalization of the basis.

use ndarray::{Array1, Array2};

use crate::basis::{basis_fn_deriv, BasisSet, QuadratureRule};
use crate::error::{Error, Result};
use crate::linalg;
use crate::Dim;

/// The linear operator ν Δ with homogeneous Dirichlet conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub dimension: Dim,
    /// Constant diffusivity ν > 0.
    pub diffusivity: f64,
}

impl OperatorSpec {
    pub fn new(dimension: Dim, diffusivity: f64) -> Result<Self> {
        if !(diffusivity > 0.0) || !diffusivity.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "diffusivity must be positive and finite, got {diffusivity}"
            )));
        }
        Ok(Self {
            dimension,
            diffusivity,
        })
    }
}

/// Mass matrix b_mn = ∫ φ_m φ_n dx from its closed pentadiagonal form:
/// only the diagonal and the |m−n| = 2 bands are nonzero.
pub fn assemble_mass(n_cut: usize) -> Array2<f64> {
    let n = n_cut - 1;
    let mut b = Array2::<f64>::zeros((n, n));
    for m in 0..n {
        let mf = m as f64;
        b[[m, m]] = 1.0 / (4.0 * (4.0 * mf + 6.0)) * (1.0 / (2.0 * mf + 1.0) + 1.0 / (2.0 * mf + 5.0));
        if m >= 2 {
            let v = -1.0 / (4.0 * ((4.0 * mf + 6.0) * (4.0 * mf - 2.0)).sqrt()) / (2.0 * mf + 1.0);
            b[[m, m - 2]] = v;
            b[[m - 2, m]] = v;
        }
    }
    b
}

/// Stiffness matrix a_mn = ν ∫ φ'_m φ'_n dx by Gauss-Lobatto quadrature
/// exact for the polynomial integrands (degree ≤ 2N).
pub fn assemble_stiffness(n_cut: usize, diffusivity: f64) -> Array2<f64> {
    let n = n_cut - 1;
    let rule = QuadratureRule::gauss_lobatto(n_cut + 2).expect("valid quadrature order");
    let nn = rule.len();
    let mut dphi = Array2::<f64>::zeros((n, nn));
    for m in 0..n {
        for (i, &x) in rule.nodes().iter().enumerate() {
            dphi[[m, i]] = basis_fn_deriv(m, x);
        }
    }
    let mut a = Array2::<f64>::zeros((n, n));
    for m in 0..n {
        for k in m..n {
            let mut s = 0.0;
            for i in 0..nn {
                s += rule.weights()[i] * dphi[[m, i]] * dphi[[k, i]];
            }
            let v = diffusivity * s;
            a[[m, k]] = v;
            a[[k, m]] = v;
        }
    }
    a
}

/// Generalized eigenpairs of the pencil B h = λ A h.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues in ascending order, all positive for SPD inputs.
    pub lambda: Array1<f64>,
    /// Eigenvectors as columns, normalized so Hᵀ A H = I.
    pub h: Array2<f64>,
    /// Basis cutoff N; the matrices are (N−1) x (N−1).
    pub n_cut: usize,
}

/// Solve B h = λ A h for SPD B and A by reducing through the Cholesky
/// factor of A: with A = L Lᵀ, the matrix S = L⁻¹ B L⁻ᵀ is symmetric and
/// S q = λ q gives h = L⁻ᵀ q.
pub fn generalized_eigendecomposition(b: &Array2<f64>, a: &Array2<f64>) -> Result<EigenSystem> {
    if b.nrows() != a.nrows() || b.ncols() != a.ncols() || b.nrows() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "pencil matrices must be square and equal-sized, got {}x{} and {}x{}",
            b.nrows(),
            b.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    // Cholesky of B only probes positive definiteness; the factor of A drives
    // the reduction.
    linalg::cholesky(b).map_err(|_| Error::NotSpd("mass matrix"))?;
    let l = linalg::cholesky(a).map_err(|_| Error::NotSpd("stiffness matrix"))?;

    let n = b.nrows();
    // Y = L⁻¹ B, then S = Y L⁻ᵀ computed as (L⁻¹ Yᵀ)ᵀ.
    let mut y = Array2::<f64>::zeros((n, n));
    for (j, col) in b.columns().into_iter().enumerate() {
        y.column_mut(j)
            .assign(&linalg::solve_lower(&l, &col.to_owned()));
    }
    let mut s = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let row = y.row(j).to_owned();
        s.column_mut(j).assign(&linalg::solve_lower(&l, &row));
    }
    // Symmetrize away the last few ulps before the Jacobi sweeps.
    let s_sym = 0.5 * (&s + &s.t());

    let (lambda, q) = linalg::jacobi_eigendecomposition(&s_sym)?;
    if lambda.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotSpd("pencil produced non-positive eigenvalue"));
    }

    let mut h = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let col = linalg::solve_lower_transpose(&l, &q.column(j).to_owned());
        h.column_mut(j).assign(&col);
    }
    Ok(EigenSystem {
        lambda,
        h,
        n_cut: n + 1,
    })
}

/// Cholesky-backed solver for systems with the mass matrix, used by the
/// projection of initial data.
#[derive(Debug, Clone)]
pub struct MassSolver {
    chol: Array2<f64>,
}

impl MassSolver {
    pub fn new(mass: &Array2<f64>) -> Result<Self> {
        let chol = linalg::cholesky(mass).map_err(|_| Error::NotSpd("mass matrix"))?;
        Ok(Self { chol })
    }

    pub fn solve_vec(&self, rhs: &Array1<f64>) -> Array1<f64> {
        linalg::cholesky_solve_vec(&self.chol, rhs)
    }

    /// Solve B C B = rhs for the 2-d projection, using symmetry of B.
    pub fn solve_two_sided(&self, rhs: &Array2<f64>) -> Array2<f64> {
        let x = linalg::cholesky_solve_mat(&self.chol, rhs);
        let xt = x.t().to_owned();
        linalg::cholesky_solve_mat(&self.chol, &xt).t().to_owned()
    }
}

/// L² projection of pointwise initial data onto the basis span: solves
/// B c = ∫ I(u0) φ_m dx from nodal samples of u0.
pub fn project_initial_1d(
    u0: impl Fn(f64) -> f64,
    basis: &BasisSet,
    mass: &MassSolver,
) -> Result<Array1<f64>> {
    let values = Array1::from_iter(basis.rule().nodes().iter().map(|&x| u0(x)));
    let load = basis.load_vector_1d(&values)?;
    Ok(mass.solve_vec(&load))
}

/// Tensor-product projection in 2-d: B C B = load matrix.
pub fn project_initial_2d(
    u0: impl Fn(f64, f64) -> f64,
    basis: &BasisSet,
    mass: &MassSolver,
) -> Result<Array2<f64>> {
    let nn = basis.rule().len();
    let mut values = Array2::<f64>::zeros((nn, nn));
    for (a, &x) in basis.rule().nodes().iter().enumerate() {
        for (b, &y) in basis.rule().nodes().iter().enumerate() {
            values[[a, b]] = u0(x, y);
        }
    }
    let load = basis.load_vector_2d(&values)?;
    Ok(mass.solve_two_sided(&load))
}
