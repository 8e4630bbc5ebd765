//! Oracle checks of the basis and operator layer against an independent
//! 64-point Gauss rule.

mod util;

use ndarray::Array1;
use spde_core::basis::{basis_fn, shifted_legendre, BasisSet, QuadratureRule};
use spde_core::operators::{assemble_mass, assemble_stiffness, generalized_eigendecomposition};
use util::integrate_64;

#[test]
fn shifted_legendre_orthogonality_against_gauss_oracle() {
    // ∫ L̃_m L̃_n = δ_mn / (2m+1) for m, n ≤ 30.
    for m in 0..=30usize {
        for n in m..=30usize {
            let got = integrate_64(|x| shifted_legendre(m, x) * shifted_legendre(n, x));
            let expect = if m == n { 1.0 / (2 * m + 1) as f64 } else { 0.0 };
            assert!(
                (got - expect).abs() < 1e-12,
                "m={m} n={n} got={got} expect={expect}"
            );
        }
    }
}

#[test]
fn load_vector_matches_direct_quadrature_of_legendre_input() {
    // Values of L̃_5 at the nodes: the load components must agree with the
    // 64-point quadrature of ∫ L̃_5 φ_m dx.
    let rule = QuadratureRule::gauss_lobatto(12).unwrap();
    let basis = BasisSet::new(5, &rule).unwrap();
    let values = Array1::from_iter(rule.nodes().iter().map(|&x| shifted_legendre(5, x)));
    let load = basis.load_vector_1d(&values).unwrap();
    for m in 0..3 {
        let direct = integrate_64(|x| shifted_legendre(5, x) * basis_fn(m, x));
        assert!(
            (load[m] - direct).abs() < 1e-12,
            "m={m} load={} direct={direct}",
            load[m]
        );
    }
}

#[test]
fn mass_matrix_closed_form_against_quadrature() {
    // Entrywise agreement of the closed pentadiagonal form with the Gauss
    // oracle for every N up to 32.
    for n_cut in [4usize, 8, 16, 24, 32] {
        let b = assemble_mass(n_cut);
        for m in 0..(n_cut - 1) {
            for n in m..(n_cut - 1) {
                let direct = integrate_64(|x| basis_fn(m, x) * basis_fn(n, x));
                assert!(
                    (b[[m, n]] - direct).abs() < 1e-12,
                    "N={n_cut} m={m} n={n} closed={} direct={direct}",
                    b[[m, n]]
                );
            }
        }
    }
}

#[test]
fn stiffness_matrix_against_quadrature() {
    let nu = 0.37;
    let a = assemble_stiffness(12, nu);
    for m in 0..11 {
        for n in m..11 {
            let direct = nu
                * integrate_64(|x| {
                    spde_core::basis::basis_fn_deriv(m, x) * spde_core::basis::basis_fn_deriv(n, x)
                });
            assert!(
                (a[[m, n]] - direct).abs() < 1e-12,
                "m={m} n={n} got={} direct={direct}",
                a[[m, n]]
            );
        }
    }
}

#[test]
fn mass_matrix_is_spd_up_to_large_cutoffs() {
    for n_cut in [16usize, 64, 128] {
        let b = assemble_mass(n_cut);
        let a = assemble_stiffness(n_cut, 1.0);
        let eig = generalized_eigendecomposition(&b, &a).unwrap();
        // λ = 2 eig(B) with this stiffness normalization, so positivity of
        // the pencil eigenvalues is positivity of B's spectrum.
        assert!(eig.lambda.iter().all(|&l| l > 0.0), "N={n_cut}");
    }
}

#[test]
fn projection_optimality_on_polynomials() {
    // A boundary-vanishing polynomial of degree ≤ N is reproduced exactly.
    use spde_core::operators::{project_initial_1d, MassSolver};
    let n_cut = 9;
    let rule = QuadratureRule::gauss_lobatto(n_cut + 8).unwrap();
    let basis = BasisSet::new(n_cut, &rule).unwrap();
    let mass = MassSolver::new(&assemble_mass(n_cut)).unwrap();
    // v = x(1−x)(2 + x − 3x³ + x⁵) has degree 7 ≤ 9 and zero boundary values.
    let v = |x: f64| x * (1.0 - x) * (2.0 + x - 3.0 * x.powi(3) + x.powi(5));
    let c = project_initial_1d(v, &basis, &mass).unwrap();
    let synth = basis.synthesize_1d(&c).unwrap();
    for (i, &x) in rule.nodes().iter().enumerate() {
        assert!((synth[i] - v(x)).abs() <= 1e-11, "x={x}");
    }
}
