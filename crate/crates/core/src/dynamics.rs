//! Pointwise reaction and diffusion coefficients, the discrete L² norm used
//! by the taming denominator, and structural validation of the reaction
//! polynomial shape.

use ndarray::{Array1, Array2};

use crate::basis::QuadratureRule;
use crate::error::{Error, Result};

/// Reaction polynomial f(u) = Σ_j a_j u^j with odd degree P and a_P < 0,
/// so that f is dissipative at large |u|. The zero polynomial is admitted
/// separately for deterministic calibration runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSpec {
    coeffs: Vec<f64>,
}

/// Check the odd-degree / negative-leading-coefficient shape.
pub fn validate_reaction(coeffs: &[f64]) -> Result<()> {
    let degree = coeffs
        .iter()
        .rposition(|&a| a != 0.0)
        .ok_or_else(|| Error::InvalidReaction("polynomial is identically zero".into()))?;
    if degree % 2 == 0 {
        return Err(Error::InvalidReaction(format!(
            "degree must be odd, got {degree}"
        )));
    }
    if coeffs[degree] >= 0.0 {
        return Err(Error::InvalidReaction(format!(
            "leading coefficient must be negative, got {:+e} at degree {degree}",
            coeffs[degree]
        )));
    }
    Ok(())
}

impl ReactionSpec {
    /// Coefficients a_0..a_P, validated for odd P and a_P < 0.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        validate_reaction(&coeffs)?;
        Ok(Self { coeffs })
    }

    /// f(u) = u − u³, the Allen-Cahn reaction.
    pub fn allen_cahn() -> Self {
        Self {
            coeffs: vec![0.0, 1.0, 0.0, -1.0],
        }
    }

    /// f ≡ 0; bypasses the shape check on purpose so the pure heat equation
    /// can serve as a deterministic benchmark.
    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&a| a != 0.0).unwrap_or(0)
    }

    /// Horner evaluation at a single point.
    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * u + a)
    }

    /// Smallest K with f(u)·u ≤ K u² pointwise, estimated on a sign-symmetric
    /// grid; enters the stability bound. For u − u³ this is 1.
    pub fn one_sided_constant(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut k: f64 = 0.0;
        for i in 0..=4000 {
            // Geometric grid covering |u| from 1e-6 to ~1e3.
            let u = 1e-6 * 10f64.powf(9.0 * i as f64 / 4000.0);
            for sign in [-1.0, 1.0] {
                let v = sign * u;
                k = k.max(self.eval(v) * v / (v * v));
            }
        }
        k.max(0.0)
    }
}

/// Diffusion coefficient catalog; every entry is globally Lipschitz with
/// linear growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionSpec {
    /// g ≡ 1 (additive noise).
    ConstantOne,
    /// g(u) = c·u; c = 0 switches the noise off.
    Linear(f64),
    /// g(u) = sin(u).
    Sine,
    /// g(u) = (1 − u²) / (1 + u²).
    Rational,
}

impl DiffusionSpec {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            DiffusionSpec::ConstantOne => 1.0,
            DiffusionSpec::Linear(c) => c * u,
            DiffusionSpec::Sine => u.sin(),
            DiffusionSpec::Rational => (1.0 - u * u) / (1.0 + u * u),
        }
    }

    /// Lipschitz constant of the entry; for the constant entry 1.0 is used
    /// as the growth constant entering the stability bound.
    pub fn lipschitz_constant(&self) -> f64 {
        match self {
            DiffusionSpec::ConstantOne => 1.0,
            DiffusionSpec::Linear(c) => c.abs(),
            DiffusionSpec::Sine => 1.0,
            // max |d/du (1−u²)/(1+u²)| = |−4u/(1+u²)²| at u² = 1/3.
            DiffusionSpec::Rational => 1.3,
        }
    }
}

impl std::fmt::Display for DiffusionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiffusionSpec::ConstantOne => write!(f, "constant_one"),
            DiffusionSpec::Linear(c) => write!(f, "linear:{c}"),
            DiffusionSpec::Sine => write!(f, "sine"),
            DiffusionSpec::Rational => write!(f, "rational"),
        }
    }
}

/// Apply the reaction polynomial at every node.
pub fn f_eval_1d(spec: &ReactionSpec, values: &Array1<f64>) -> Array1<f64> {
    values.mapv(|u| spec.eval(u))
}

pub fn f_eval_2d(spec: &ReactionSpec, values: &Array2<f64>) -> Array2<f64> {
    values.mapv(|u| spec.eval(u))
}

/// Apply the diffusion coefficient at every node.
pub fn g_eval_1d(spec: &DiffusionSpec, values: &Array1<f64>) -> Array1<f64> {
    values.mapv(|u| spec.eval(u))
}

pub fn g_eval_2d(spec: &DiffusionSpec, values: &Array2<f64>) -> Array2<f64> {
    values.mapv(|u| spec.eval(u))
}

/// Discrete L² norm √(Σ w_i v_i²) of nodal values on (0,1).
pub fn l2_norm_1d(values: &Array1<f64>, rule: &QuadratureRule) -> f64 {
    values
        .iter()
        .zip(rule.weights())
        .map(|(v, w)| w * v * v)
        .sum::<f64>()
        .sqrt()
}

/// Discrete L² norm on (0,1)² with tensor-product weights.
pub fn l2_norm_2d(values: &Array2<f64>, rule: &QuadratureRule) -> f64 {
    let w = rule.weights();
    let mut acc = 0.0;
    for (a, row) in values.rows().into_iter().enumerate() {
        let mut row_acc = 0.0;
        for (b, v) in row.iter().enumerate() {
            row_acc += w[b] * v * v;
        }
        acc += w[a] * row_acc;
    }
    acc.sqrt()
}

/// Taming attenuation 1 / (1 + τ‖f(u)‖²) ∈ (0, 1].
///
/// Multiplying the explicit drift by this factor bounds the per-step drift
/// contribution: τ‖f‖ / (1 + τ‖f‖²) ≤ √τ / 2 for every state.
pub fn taming_factor(tau: f64, f_norm_sq: f64) -> f64 {
    debug_assert!(tau > 0.0 && f_norm_sq >= 0.0);
    1.0 / (1.0 + tau * f_norm_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::QuadratureRule;
    use proptest::prelude::*;

    #[test]
    fn allen_cahn_values() {
        let f = ReactionSpec::allen_cahn();
        assert_eq!(f.eval(2.0), -6.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.degree(), 3);
        assert!(!f.is_zero());
        assert!(ReactionSpec::zero().is_zero());
    }

    #[test]
    fn reaction_shape_validation() {
        assert!(validate_reaction(&[0.0, 1.0, 0.0, -1.0]).is_ok());
        // u² has even degree.
        assert!(validate_reaction(&[0.0, 0.0, 1.0]).is_err());
        // u + u³ has a positive leading coefficient.
        assert!(validate_reaction(&[0.0, 1.0, 0.0, 1.0]).is_err());
        assert!(validate_reaction(&[0.0]).is_err());
        // Trailing zeros do not change the degree.
        assert!(validate_reaction(&[0.0, 1.0, 0.0, -1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn one_sided_constant_for_allen_cahn() {
        // f(u)·u = u² − u⁴ ≤ u², attained as u → 0.
        let k = ReactionSpec::allen_cahn().one_sided_constant();
        assert!((k - 1.0).abs() < 1e-3, "k={k}");
        assert_eq!(ReactionSpec::zero().one_sided_constant(), 0.0);
    }

    #[test]
    fn diffusion_catalog_values() {
        assert_eq!(DiffusionSpec::ConstantOne.eval(123.0), 1.0);
        assert_eq!(DiffusionSpec::Rational.eval(0.0), 1.0);
        assert_eq!(DiffusionSpec::Rational.eval(1.0), 0.0);
        assert!((DiffusionSpec::Sine.eval(std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert_eq!(DiffusionSpec::Linear(0.0).eval(7.0), 0.0);
    }

    #[test]
    fn f_eval_matches_pointwise_oracle() {
        let f = ReactionSpec::allen_cahn();
        let rule = QuadratureRule::gauss_lobatto(32).unwrap();
        let vals = Array1::from_iter(
            rule.nodes()
                .iter()
                .map(|&x| (std::f64::consts::PI * x).sin()),
        );
        let fv = f_eval_1d(&f, &vals);
        for (i, &u) in vals.iter().enumerate() {
            assert!((fv[i] - (u - u * u * u)).abs() < 1e-13);
        }
    }

    #[test]
    fn l2_norm_reference_values() {
        let rule = QuadratureRule::gauss_lobatto(32).unwrap();
        let zero = Array1::zeros(rule.len());
        assert_eq!(l2_norm_1d(&zero, &rule), 0.0);

        let ones = Array1::from_elem(rule.len(), 1.0);
        assert!((l2_norm_1d(&ones, &rule) - 1.0).abs() < 1e-14);

        let sine = Array1::from_iter(
            rule.nodes()
                .iter()
                .map(|&x| (std::f64::consts::PI * x).sin()),
        );
        // ∫ sin²(πx) dx = 1/2.
        assert!((l2_norm_1d(&sine, &rule) - 0.5_f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn l2_norm_2d_separable_field() {
        let rule = QuadratureRule::gauss_lobatto(24).unwrap();
        let nn = rule.len();
        let mut vals = Array2::zeros((nn, nn));
        for (a, &x) in rule.nodes().iter().enumerate() {
            for (b, &y) in rule.nodes().iter().enumerate() {
                vals[[a, b]] =
                    (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin();
            }
        }
        assert!((l2_norm_2d(&vals, &rule) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn taming_factor_values() {
        assert_eq!(taming_factor(0.1, 0.0), 1.0);
        assert!((taming_factor(0.01, 1e4) - 1.0 / 101.0).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn tamed_drift_is_bounded(tau in 1e-6f64..10.0, f_norm in 0.0f64..1e6) {
            let factor = taming_factor(tau, f_norm * f_norm);
            prop_assert!(tau * f_norm * factor <= tau.sqrt() / 2.0 + 1e-15);
            prop_assert!(factor > 0.0 && factor <= 1.0);
        }

        #[test]
        fn horner_matches_naive(u in -10.0f64..10.0, raw in proptest::collection::vec(-3.0f64..3.0, 2..10)) {
            let mut coeffs = raw;
            // Force a valid shape: odd degree, negative leading coefficient.
            if coeffs.len() % 2 == 1 {
                coeffs.push(-1.0);
            }
            let last = coeffs.len() - 1;
            coeffs[last] = -coeffs[last].abs().max(0.5);
            let spec = ReactionSpec::new(coeffs.clone()).unwrap();
            let naive: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| a * u.powi(j as i32))
                .sum();
            let scale = 1.0 + naive.abs();
            prop_assert!((spec.eval(u) - naive).abs() / scale < 1e-12);
        }

        #[test]
        fn l2_norm_is_homogeneous(c in -8.0f64..8.0) {
            let rule = QuadratureRule::gauss_lobatto(16).unwrap();
            let vals = Array1::from_iter(rule.nodes().iter().map(|&x| x * (1.0 - x) - 0.1));
            let scaled = vals.mapv(|v| c * v);
            let lhs = l2_norm_1d(&scaled, &rule);
            let rhs = c.abs() * l2_norm_1d(&vals, &rule);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + rhs));
        }
    }
}
