//! Error type shared across the solver crate.

/// Errors produced by assembly, sampling, stepping, and study drivers.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Newton iteration for quadrature nodes failed; indicates a bug rather
    /// than bad input.
    #[error("Gauss-Lobatto node iteration did not converge for Np={np} (node {node})")]
    QuadratureNoConvergence { np: usize, node: usize },

    /// An array argument does not match the shape the receiver was built for.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Quadrature order too small for the requested basis cutoff.
    #[error("quadrature order Np={np} too small for basis cutoff N={n_cut}; need Np >= N+1")]
    QuadratureTooSmall { np: usize, n_cut: usize },

    /// A matrix expected to be symmetric positive definite was not.
    #[error("matrix is not symmetric positive definite ({0})")]
    NotSpd(&'static str),

    /// The Jacobi eigensolver did not reach its off-diagonal tolerance.
    #[error("symmetric eigensolver did not converge within {0} sweeps")]
    EigenNoConvergence(usize),

    /// Requested coarsening factor does not divide the lattice resolution.
    #[error("coarsening factor {factor} does not divide {m_fine} fine steps")]
    BadCoarsenFactor { factor: usize, m_fine: usize },

    /// Step or mode index outside the sampled lattice.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Reaction polynomial violates the odd-degree / negative-leading shape.
    #[error("invalid reaction polynomial: {0}")]
    InvalidReaction(String),

    /// A run configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The solution became non-finite while stepping.
    #[error("solution diverged (non-finite state) at step {step}{}",
        realization.map(|r| format!(" in realization {r}")).unwrap_or_default())]
    Divergence {
        step: usize,
        realization: Option<u64>,
    },

    /// Rate fitting needs at least three usable rows.
    #[error("rate fit requires at least 3 usable rows, got {0}")]
    TooFewRows(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
