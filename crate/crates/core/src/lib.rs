//! Spectral-Galerkin solver for nonlinear stochastic reaction-diffusion
//! equations on (0,1)^d, d = 1, 2, with homogeneous Dirichlet boundary
//! conditions and truncated Q-Wiener forcing:
//!
//!   du = ν Δu dt + f(u) dt + g(u) dW^Q(t)
//!
//! Space is discretized with a Legendre polynomial basis built to satisfy the
//! boundary conditions; the mass/stiffness pencil is diagonalized once so the
//! semi-implicit solve decouples per mode. Time stepping is a tamed
//! semi-implicit Euler scheme: the stiff linear part is implicit, the
//! polynomial reaction term is explicit but divided by 1 + τ‖f(u)‖², which
//! keeps the scheme stable for any step size even though f is only locally
//! Lipschitz.
//!
//! The [`experiments`] module drives Monte Carlo strong-convergence studies
//! against a fine-resolution surrogate solution sharing the same Brownian
//! paths, and fits log-log convergence rates.

pub mod basis;
pub mod dynamics;
pub mod error;
pub mod experiments;
mod linalg;
pub mod noise;
pub mod operators;
mod rng;
pub mod stepper;

pub use error::{Error, Result};

/// Spatial dimension of the computational domain (0,1)^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

impl std::fmt::Display for Dim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_usize())
    }
}
