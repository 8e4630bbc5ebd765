//! Shifted Legendre polynomials on [0,1], the boundary-vanishing basis
//! φ_m = (L̃_m − L̃_{m+2}) / (2√(4m+6)), Gauss-Lobatto quadrature, and dense
//! transforms between nodal values and coefficient space.
//!
//! L̃_n(x) = P_n(2x−1) where P_n is the degree-n Legendre polynomial on
//! [−1,1], so ∫_0^1 L̃_m L̃_n dx = δ_mn / (2m+1). Every φ_m vanishes at both
//! endpoints by construction, which makes span{φ_0, …, φ_{N−2}} the discrete
//! space for homogeneous Dirichlet problems with polynomial degree ≤ N.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Evaluate the Legendre polynomial P_n(t) on [−1,1] by the ascending
/// three-term recurrence (n+1) P_{n+1} = (2n+1) t P_n − n P_{n−1}.
fn legendre(n: usize, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p_prev = 1.0;
    let mut p_curr = t;
    for k in 1..n {
        let p_next = ((2 * k + 1) as f64 * t * p_curr - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p_curr;
        p_curr = p_next;
    }
    p_curr
}

/// Evaluate P_n(t) and P'_n(t) together; the derivative comes from
/// P'_n = n (t P_n − P_{n−1}) / (t² − 1) away from the endpoints.
fn legendre_with_deriv(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    if n == 1 {
        return (t, 1.0);
    }
    let mut p_prev = 1.0;
    let mut p_curr = t;
    for k in 1..n {
        let p_next = ((2 * k + 1) as f64 * t * p_curr - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p_curr;
        p_curr = p_next;
    }
    let deriv = if (t.abs() - 1.0).abs() < 1e-14 {
        let v = (n * (n + 1)) as f64 / 2.0;
        if t > 0.0 || n % 2 == 1 {
            v
        } else {
            -v
        }
    } else {
        n as f64 * (t * p_curr - p_prev) / (t * t - 1.0)
    };
    (p_curr, deriv)
}

/// Shifted Legendre polynomial L̃_n(x) = P_n(2x−1) on [0,1].
pub fn shifted_legendre(n: usize, x: f64) -> f64 {
    legendre(n, 2.0 * x - 1.0)
}

/// Derivative d/dx L̃_n(x) = 2 P'_n(2x−1).
pub fn shifted_legendre_deriv(n: usize, x: f64) -> f64 {
    2.0 * legendre_with_deriv(n, 2.0 * x - 1.0).1
}

fn basis_scale(m: usize) -> f64 {
    1.0 / (2.0 * (4.0 * m as f64 + 6.0).sqrt())
}

/// Basis function φ_m(x) = (L̃_m(x) − L̃_{m+2}(x)) / (2√(4m+6)).
///
/// φ_m is a polynomial of degree m+2 with φ_m(0) = φ_m(1) = 0.
pub fn basis_fn(m: usize, x: f64) -> f64 {
    basis_scale(m) * (shifted_legendre(m, x) - shifted_legendre(m + 2, x))
}

/// Derivative φ'_m(x).
pub fn basis_fn_deriv(m: usize, x: f64) -> f64 {
    basis_scale(m) * (shifted_legendre_deriv(m, x) - shifted_legendre_deriv(m + 2, x))
}

/// Gauss-Lobatto quadrature rule on [0,1] with Np+1 nodes including both
/// endpoints; exact for polynomials of degree ≤ 2Np−1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Build the rule of order `np` (np+1 points). Interior nodes are the
    /// roots of P'_np found by Newton iteration from Chebyshev-Lobatto
    /// starting guesses; the affine map to [0,1] halves the weights.
    pub fn gauss_lobatto(np: usize) -> Result<Self> {
        if np < 1 {
            return Err(Error::InvalidConfig(
                "Gauss-Lobatto rule needs order Np >= 1".into(),
            ));
        }
        let mut t_nodes = vec![0.0; np + 1];
        t_nodes[0] = -1.0;
        t_nodes[np] = 1.0;
        for j in 1..np {
            let mut t = -(std::f64::consts::PI * j as f64 / np as f64).cos();
            let mut converged = false;
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(np, t);
                // Newton step for the roots of (1−t²) P'_np, whose derivative
                // collapses to −np(np+1) P_np.
                let update = (1.0 - t * t) * dp / (np as f64 * (np + 1) as f64 * p);
                t += update;
                if update.abs() <= 1e-14 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::QuadratureNoConvergence { np, node: j });
            }
            t_nodes[j] = t;
        }

        let denom = (np * (np + 1)) as f64;
        let mut nodes = Vec::with_capacity(np + 1);
        let mut weights = Vec::with_capacity(np + 1);
        for &t in &t_nodes {
            let p = legendre(np, t);
            nodes.push(0.5 * (t + 1.0));
            weights.push(1.0 / (denom * p * p));
        }
        nodes[0] = 0.0;
        nodes[np] = 1.0;
        Ok(Self { nodes, weights })
    }

    /// Quadrature order Np (one less than the node count).
    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫ v dx for nodal values of v.
    pub fn integrate(&self, values: &Array1<f64>) -> f64 {
        self.weights
            .iter()
            .zip(values.iter())
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Cached evaluations of the basis and the dense transform operators on a
/// fixed quadrature rule.
///
/// `n_cut` is the polynomial cutoff N; the basis has N−1 functions
/// φ_0, …, φ_{N−2}.
#[derive(Debug, Clone)]
pub struct BasisSet {
    n_cut: usize,
    rule: QuadratureRule,
    /// φ_m at the nodes, (N−1) x (Np+1).
    phi: Array2<f64>,
    /// L̃_n at the nodes, (Np+1) x (Np+1).
    legendre: Array2<f64>,
    /// Discrete Legendre transform, (Np+1) x (Np+1); row n recovers the
    /// coefficient of L̃_n in the interpolant, with the top-mode
    /// normalization Np instead of 2Np+1.
    analysis: Array2<f64>,
    /// Fused nodal-values-to-load operator: the two-band map from
    /// interpolant coefficients to ∫ I(v) φ_m dx composed with the discrete
    /// transform, so one (N−1) x (Np+1) contraction produces a load.
    load_operator: Array2<f64>,
}

impl BasisSet {
    pub fn new(n_cut: usize, rule: &QuadratureRule) -> Result<Self> {
        if n_cut < 3 {
            return Err(Error::InvalidConfig(format!(
                "basis cutoff N must be >= 3, got {n_cut}"
            )));
        }
        let np = rule.order();
        if np < n_cut + 1 {
            return Err(Error::QuadratureTooSmall { np, n_cut });
        }
        let nn = rule.len();
        let n_modes = n_cut - 1;

        let mut phi = Array2::<f64>::zeros((n_modes, nn));
        for m in 0..n_modes {
            for (i, &x) in rule.nodes().iter().enumerate() {
                phi[[m, i]] = basis_fn(m, x);
            }
        }

        let mut legendre = Array2::<f64>::zeros((np + 1, nn));
        for n in 0..=np {
            for (i, &x) in rule.nodes().iter().enumerate() {
                legendre[[n, i]] = shifted_legendre(n, x);
            }
        }

        let mut analysis = Array2::<f64>::zeros((np + 1, nn));
        for n in 0..=np {
            let inv_gamma = if n < np { (2 * n + 1) as f64 } else { np as f64 };
            for i in 0..nn {
                analysis[[n, i]] = inv_gamma * rule.weights()[i] * legendre[[n, i]];
            }
        }

        let mut load_map = Array2::<f64>::zeros((n_modes, np + 1));
        for m in 0..n_modes {
            let scale = basis_scale(m);
            load_map[[m, m]] = scale / (2 * m + 1) as f64;
            load_map[[m, m + 2]] = -scale / (2 * (m + 2) + 1) as f64;
        }
        let load_operator = load_map.dot(&analysis);

        Ok(Self {
            n_cut,
            rule: rule.clone(),
            phi,
            legendre,
            analysis,
            load_operator,
        })
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    /// Number of basis functions, N−1.
    pub fn mode_count(&self) -> usize {
        self.n_cut - 1
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// φ_m values at the quadrature nodes, (N−1) x (Np+1).
    pub fn phi_at_nodes(&self) -> &Array2<f64> {
        &self.phi
    }

    /// L̃_n values at the quadrature nodes, (Np+1) x (Np+1).
    pub fn legendre_at_nodes(&self) -> &Array2<f64> {
        &self.legendre
    }

    fn check_coeff_len(&self, len: usize) -> Result<()> {
        if len != self.mode_count() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {len}",
                self.mode_count()
            )));
        }
        Ok(())
    }

    fn check_node_len(&self, len: usize) -> Result<()> {
        if len != self.rule.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} nodal values, got {len}",
                self.rule.len()
            )));
        }
        Ok(())
    }

    /// Evaluate Σ_m c_m φ_m at the quadrature nodes.
    pub fn synthesize_1d(&self, coeffs: &Array1<f64>) -> Result<Array1<f64>> {
        self.check_coeff_len(coeffs.len())?;
        Ok(self.phi.t().dot(coeffs))
    }

    /// Evaluate Σ_{mn} C_mn φ_m(x) φ_n(y) on the tensor node grid; row index
    /// runs over x-nodes, column index over y-nodes.
    pub fn synthesize_2d(&self, coeffs: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_coeff_len(coeffs.nrows())?;
        self.check_coeff_len(coeffs.ncols())?;
        Ok(self.phi.t().dot(coeffs).dot(&self.phi))
    }

    /// Legendre coefficients h_0..h_Np of the nodal interpolant I(v).
    pub fn analyze_1d(&self, values: &Array1<f64>) -> Result<Array1<f64>> {
        self.check_node_len(values.len())?;
        Ok(self.analysis.dot(values))
    }

    /// Tensor-product interpolant coefficients; h[[m, n]] multiplies
    /// L̃_m(x) L̃_n(y).
    pub fn analyze_2d(&self, values: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_node_len(values.nrows())?;
        self.check_node_len(values.ncols())?;
        Ok(self.analysis.dot(values).dot(&self.analysis.t()))
    }

    /// Load vector F_m = ∫ I(v) φ_m dx.
    ///
    /// Exact given the interpolant: the two-term Legendre expansion of φ_m
    /// turns the integral into a difference of interpolant coefficients.
    pub fn load_vector_1d(&self, values: &Array1<f64>) -> Result<Array1<f64>> {
        self.check_node_len(values.len())?;
        Ok(self.load_operator.dot(values))
    }

    /// Load matrix F_mn = ∫∫ I(v) φ_m(x) φ_n(y) dx dy.
    pub fn load_vector_2d(&self, values: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_node_len(values.nrows())?;
        self.check_node_len(values.ncols())?;
        Ok(self.load_operator.dot(values).dot(&self.load_operator.t()))
    }

    /// Evaluate the interpolant Σ_n h_n L̃_n back at the nodes.
    pub fn legendre_synthesize_1d(&self, h: &Array1<f64>) -> Result<Array1<f64>> {
        if h.len() != self.rule.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} Legendre coefficients, got {}",
                self.rule.len(),
                h.len()
            )));
        }
        Ok(self.legendre.t().dot(h))
    }
}
