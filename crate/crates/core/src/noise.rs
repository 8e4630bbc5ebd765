//! Truncated Q-Wiener process: per-mode Brownian increments sampled at a
//! master resolution, coarsening for path-coupled multi-resolution runs, and
//! evaluation of the noise field at quadrature nodes.
//!
//! W^Q(t) = Σ_j √q_j e_j β_j(t), truncated to J modes per direction. The
//! increments are sampled once at the finest time resolution a study uses;
//! coarser runs sum consecutive fine increments so that every resolution
//! sees the same Brownian path.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::basis::{basis_fn, QuadratureRule};
use crate::error::{Error, Result};
use crate::rng;
use crate::Dim;

/// Shape of the covariance eigenfunctions e_j.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// e_j(x) = sin(jπx); tensor product of sines in 2-d.
    Sine,
    /// e_j(x) = sin(jπx + φ_j(x)) with φ_j the Dirichlet basis function.
    SinePlusBasisPhase,
    /// 2-d product with asymmetric factors:
    /// sin(j₁πx + φ_{j₁}(x)) · (sin(j₂πy) + φ_{j₂}(y)).
    ProductSineBasis,
}

impl ModeKind {
    /// Pointwise value of the 1-d factor for mode index j ≥ 1 along `axis`
    /// (0 = x, 1 = y).
    pub fn factor(self, axis: usize, j: usize, x: f64) -> f64 {
        let arg = j as f64 * std::f64::consts::PI * x;
        match self {
            ModeKind::Sine => arg.sin(),
            ModeKind::SinePlusBasisPhase => (arg + basis_fn(j, x)).sin(),
            ModeKind::ProductSineBasis => {
                if axis == 0 {
                    (arg + basis_fn(j, x)).sin()
                } else {
                    arg.sin() + basis_fn(j, x)
                }
            }
        }
    }
}

impl std::fmt::Display for ModeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModeKind::Sine => "sine",
            ModeKind::SinePlusBasisPhase => "sine_plus_basis_phase",
            ModeKind::ProductSineBasis => "product_sine_basis",
        };
        write!(f, "{s}")
    }
}

/// Truncated covariance operator: J modes per direction with polynomial
/// eigenvalue decay q_j = j^(−s) in 1-d and q_{j₁j₂} = (j₁²+j₂²)^(−s/2)
/// in 2-d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QWienerSpec {
    pub dimension: Dim,
    /// Modes retained per direction (J).
    pub modes_per_direction: usize,
    /// Decay exponent s.
    pub decay_exponent: f64,
    pub mode_kind: ModeKind,
}

impl QWienerSpec {
    pub fn new(
        dimension: Dim,
        modes_per_direction: usize,
        decay_exponent: f64,
        mode_kind: ModeKind,
    ) -> Result<Self> {
        if modes_per_direction == 0 {
            return Err(Error::InvalidConfig(
                "noise truncation needs at least one mode per direction".into(),
            ));
        }
        if !(decay_exponent > 0.0) || !decay_exponent.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "noise decay exponent must be positive, got {decay_exponent}"
            )));
        }
        Ok(Self {
            dimension,
            modes_per_direction,
            decay_exponent,
            mode_kind,
        })
    }

    /// Total retained modes: J in 1-d, J² in 2-d, enumerated with the first
    /// direction outermost.
    pub fn mode_count(&self) -> usize {
        match self.dimension {
            Dim::One => self.modes_per_direction,
            Dim::Two => self.modes_per_direction * self.modes_per_direction,
        }
    }

    /// Eigenvalues q in ascending mode order; positive and non-increasing
    /// in |j|.
    pub fn q_values(&self) -> Vec<f64> {
        let j_max = self.modes_per_direction;
        let s = self.decay_exponent;
        match self.dimension {
            Dim::One => (1..=j_max).map(|j| (j as f64).powf(-s)).collect(),
            Dim::Two => {
                let mut q = Vec::with_capacity(j_max * j_max);
                for j1 in 1..=j_max {
                    for j2 in 1..=j_max {
                        q.push(((j1 * j1 + j2 * j2) as f64).powf(-s / 2.0));
                    }
                }
                q
            }
        }
    }

    /// Trace of the truncated covariance, Σ q_j.
    pub fn trace(&self) -> f64 {
        self.q_values().iter().sum()
    }

    /// Regularity index implied by the decay, used only when reporting the
    /// rate a study is expected to show: γ = (s+1)/2 in 1-d and s/2 in 2-d.
    pub fn predicted_gamma(&self) -> f64 {
        match self.dimension {
            Dim::One => (self.decay_exponent + 1.0) / 2.0,
            Dim::Two => self.decay_exponent / 2.0,
        }
    }
}

/// Per-mode Brownian increments at the master resolution, plus an
/// accumulated coarsening factor.
///
/// Coarsening never rewrites data: it multiplies the factor and keeps a
/// shared handle on the fine increments. A coarse increment is always the
/// left-to-right sum of its fine block, so chained coarsenings are exactly
/// the same map as a single combined coarsening.
#[derive(Debug, Clone)]
pub struct BrownianLattice {
    fine: Arc<Array2<f64>>,
    t_horizon: f64,
    factor: usize,
    master_seed: u64,
    realization_id: u64,
}

impl BrownianLattice {
    /// Sample all mode increments at resolution `m_fine`; each entry is
    /// N(0, T/m_fine) drawn from the counter stream keyed by
    /// (master_seed, realization_id, mode, step).
    pub fn sample(
        spec: &QWienerSpec,
        m_fine: usize,
        t_horizon: f64,
        master_seed: u64,
        realization_id: u64,
    ) -> Result<Self> {
        if m_fine == 0 {
            return Err(Error::InvalidConfig("lattice needs at least one step".into()));
        }
        if !(t_horizon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "time horizon must be positive, got {t_horizon}"
            )));
        }
        let modes = spec.mode_count();
        let std = (t_horizon / m_fine as f64).sqrt();
        let mut fine = Array2::<f64>::zeros((modes, m_fine));
        for mode in 0..modes {
            for step in 0..m_fine {
                fine[[mode, step]] =
                    std * rng::standard_normal(master_seed, realization_id, mode as u64, step as u64);
            }
        }
        Ok(Self {
            fine: Arc::new(fine),
            t_horizon,
            factor: 1,
            master_seed,
            realization_id,
        })
    }

    /// Wrap explicit increments; used by tests that need a deterministic
    /// path such as all zeros or a single unit kick.
    pub fn from_increments(
        increments: Array2<f64>,
        t_horizon: f64,
        master_seed: u64,
        realization_id: u64,
    ) -> Self {
        Self {
            fine: Arc::new(increments),
            t_horizon,
            factor: 1,
            master_seed,
            realization_id,
        }
    }

    pub fn modes(&self) -> usize {
        self.fine.nrows()
    }

    /// Fine (master) resolution.
    pub fn m_fine(&self) -> usize {
        self.fine.ncols()
    }

    /// Steps visible at the current coarsening factor.
    pub fn steps(&self) -> usize {
        self.fine.ncols() / self.factor
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn t_horizon(&self) -> f64 {
        self.t_horizon
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn realization_id(&self) -> u64 {
        self.realization_id
    }

    /// View of the same path with `factor` times fewer steps. Factors
    /// accumulate multiplicatively, so coarsen(f1) then coarsen(f2) is
    /// exactly coarsen(f1·f2).
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.steps() % factor != 0 {
            return Err(Error::BadCoarsenFactor {
                factor,
                m_fine: self.steps(),
            });
        }
        Ok(Self {
            fine: Arc::clone(&self.fine),
            t_horizon: self.t_horizon,
            factor: self.factor * factor,
            master_seed: self.master_seed,
            realization_id: self.realization_id,
        })
    }

    /// Increment of one mode over coarse step k: the left-to-right sum of
    /// the underlying fine increments.
    pub fn increment(&self, mode: usize, k: usize) -> Result<f64> {
        if mode >= self.modes() || k >= self.steps() {
            return Err(Error::IndexOutOfRange(format!(
                "mode {mode} step {k} outside lattice {}x{}",
                self.modes(),
                self.steps()
            )));
        }
        Ok(self.sum_block(mode, k))
    }

    fn sum_block(&self, mode: usize, k: usize) -> f64 {
        let start = k * self.factor;
        let mut acc = 0.0;
        for i in start..start + self.factor {
            acc += self.fine[[mode, i]];
        }
        acc
    }

    /// All mode increments for coarse step k, in ascending mode order.
    pub fn increments_at(&self, k: usize) -> Result<Array1<f64>> {
        if k >= self.steps() {
            return Err(Error::IndexOutOfRange(format!(
                "step {k} outside lattice with {} steps",
                self.steps()
            )));
        }
        Ok(Array1::from_iter(
            (0..self.modes()).map(|mode| self.sum_block(mode, k)),
        ))
    }

    /// Materialized coarse increments, modes x steps.
    pub fn coarse_matrix(&self) -> Array2<f64> {
        let mut out = Array2::<f64>::zeros((self.modes(), self.steps()));
        for mode in 0..self.modes() {
            for k in 0..self.steps() {
                out[[mode, k]] = self.sum_block(mode, k);
            }
        }
        out
    }
}

/// Cached values of every retained mode factor at the quadrature nodes,
/// with √q folded in separately.
#[derive(Debug, Clone)]
pub struct ModeValues {
    modes_per_direction: usize,
    dimension: Dim,
    sqrt_q: Vec<f64>,
    /// First-direction factors, J x (Np+1).
    ex: Array2<f64>,
    /// Second-direction factors in 2-d.
    ey: Option<Array2<f64>>,
}

/// Evaluate every retained mode at the rule's nodes (per direction in 2-d).
pub fn mode_values(spec: &QWienerSpec, rule: &QuadratureRule) -> ModeValues {
    let j_max = spec.modes_per_direction;
    let nn = rule.len();
    let mut ex = Array2::<f64>::zeros((j_max, nn));
    for j in 1..=j_max {
        for (i, &x) in rule.nodes().iter().enumerate() {
            ex[[j - 1, i]] = spec.mode_kind.factor(0, j, x);
        }
    }
    let ey = match spec.dimension {
        Dim::One => None,
        Dim::Two => {
            let mut ey = Array2::<f64>::zeros((j_max, nn));
            for j in 1..=j_max {
                for (i, &y) in rule.nodes().iter().enumerate() {
                    ey[[j - 1, i]] = spec.mode_kind.factor(1, j, y);
                }
            }
            Some(ey)
        }
    };
    ModeValues {
        modes_per_direction: j_max,
        dimension: spec.dimension,
        sqrt_q: spec.q_values().iter().map(|q| q.sqrt()).collect(),
        ex,
        ey,
    }
}

impl ModeValues {
    pub fn dimension(&self) -> Dim {
        self.dimension
    }

    pub fn node_count(&self) -> usize {
        self.ex.ncols()
    }

    pub fn mode_count(&self) -> usize {
        self.sqrt_q.len()
    }

    /// Cached first-direction factor of mode `j` (0-based) at node index `a`.
    pub fn factor_at(&self, j: usize, a: usize) -> f64 {
        self.ex[[j, a]]
    }
}

/// Nodal values of ΔW^Q(t_k) = Σ_j √q_j e_j Δβ_j(t_k) in 1-d.
///
/// The mode sum runs in ascending index order so the result does not depend
/// on how realizations are scheduled across threads.
pub fn increment_field_1d(
    lattice: &BrownianLattice,
    modes: &ModeValues,
    k: usize,
) -> Result<Array1<f64>> {
    if lattice.modes() != modes.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "lattice has {} modes, cache has {}",
            lattice.modes(),
            modes.mode_count()
        )));
    }
    let db = lattice.increments_at(k)?;
    let nn = modes.node_count();
    let mut out = Array1::<f64>::zeros(nn);
    for j in 0..modes.mode_count() {
        let scale = modes.sqrt_q[j] * db[j];
        for a in 0..nn {
            out[a] += scale * modes.ex[[j, a]];
        }
    }
    Ok(out)
}

/// Nodal values of ΔW^Q(t_k) on the tensor grid in 2-d, contracting the
/// first mode index and then the second, each in ascending order.
pub fn increment_field_2d(
    lattice: &BrownianLattice,
    modes: &ModeValues,
    k: usize,
) -> Result<Array2<f64>> {
    let ey = modes.ey.as_ref().ok_or_else(|| {
        Error::DimensionMismatch("2-d increment field requires a 2-d mode cache".into())
    })?;
    if lattice.modes() != modes.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "lattice has {} modes, cache has {}",
            lattice.modes(),
            modes.mode_count()
        )));
    }
    let db = lattice.increments_at(k)?;
    let j_max = modes.modes_per_direction;
    let nn = modes.node_count();

    // tmp[j2][a] = Σ_{j1} √q Δβ e_{j1}(x_a)
    let mut tmp = Array2::<f64>::zeros((j_max, nn));
    for j1 in 0..j_max {
        for j2 in 0..j_max {
            let idx = j1 * j_max + j2;
            let scale = modes.sqrt_q[idx] * db[idx];
            for a in 0..nn {
                tmp[[j2, a]] += scale * modes.ex[[j1, a]];
            }
        }
    }
    let mut out = Array2::<f64>::zeros((nn, nn));
    for j2 in 0..j_max {
        for a in 0..nn {
            let t = tmp[[j2, a]];
            for b in 0..nn {
                out[[a, b]] += t * ey[[j2, b]];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_1d(j: usize, s: f64) -> QWienerSpec {
        QWienerSpec::new(Dim::One, j, s, ModeKind::Sine).unwrap()
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = spec_1d(4, 2.5);
        let a = BrownianLattice::sample(&spec, 64, 1.0, 99, 3).unwrap();
        let b = BrownianLattice::sample(&spec, 64, 1.0, 99, 3).unwrap();
        assert_eq!(a.fine.as_slice().unwrap(), b.fine.as_slice().unwrap());

        let c = BrownianLattice::sample(&spec, 64, 1.0, 99, 4).unwrap();
        assert!(a
            .fine
            .iter()
            .zip(c.fine.iter())
            .any(|(x, y)| x != y));
    }

    #[test]
    fn increment_variance_close_to_tau() {
        let spec = spec_1d(1, 2.5);
        let m_fine = 100_000;
        let t = 2.0;
        let lat = BrownianLattice::sample(&spec, m_fine, t, 5, 0).unwrap();
        let tau = t / m_fine as f64;
        let mean: f64 = lat.fine.iter().sum::<f64>() / m_fine as f64;
        let var: f64 = lat.fine.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / m_fine as f64;
        assert!((var - tau).abs() / tau < 0.02, "var={var} tau={tau}");
        assert!(mean.abs() < 4.0 * tau.sqrt() / (m_fine as f64).sqrt());
    }

    #[test]
    fn mode_streams_are_uncorrelated() {
        let spec = spec_1d(2, 2.0);
        let m_fine = 100_000;
        let lat = BrownianLattice::sample(&spec, m_fine, 1.0, 11, 0).unwrap();
        let a = lat.fine.row(0);
        let b = lat.fine.row(1);
        let mean_a = a.sum() / m_fine as f64;
        let mean_b = b.sum() / m_fine as f64;
        let mut cov = 0.0;
        let mut var_a = 0.0;
        let mut var_b = 0.0;
        for i in 0..m_fine {
            let da = a[i] - mean_a;
            let db = b[i] - mean_b;
            cov += da * db;
            var_a += da * da;
            var_b += db * db;
        }
        let corr = cov / (var_a * var_b).sqrt();
        assert!(corr.abs() <= 0.02, "corr={corr}");
    }

    #[test]
    fn coarsen_factor_one_is_identity() {
        let spec = spec_1d(2, 2.0);
        let lat = BrownianLattice::sample(&spec, 16, 1.0, 1, 0).unwrap();
        let same = lat.coarsen(1).unwrap();
        assert_eq!(same.steps(), 16);
        for k in 0..16 {
            assert_eq!(lat.increment(0, k).unwrap(), same.increment(0, k).unwrap());
        }
    }

    #[test]
    fn coarsen_rejects_non_divisors() {
        let spec = spec_1d(1, 2.0);
        let lat = BrownianLattice::sample(&spec, 10, 1.0, 1, 0).unwrap();
        assert!(matches!(
            lat.coarsen(3),
            Err(Error::BadCoarsenFactor { factor: 3, m_fine: 10 })
        ));
    }

    #[test]
    fn coarsening_conserves_block_sums() {
        let spec = spec_1d(3, 2.0);
        let lat = BrownianLattice::sample(&spec, 9216, 1.0, 17, 2).unwrap();
        // 9216 fine steps coarsened for an M = 96 run.
        let coarse = lat.coarsen(96).unwrap();
        assert_eq!(coarse.steps(), 96);
        for mode in 0..3 {
            // Summing the coarse entries left-to-right is bitwise the sum of
            // the fine increments grouped block by block in the same order.
            let coarse_total: f64 = (0..96)
                .map(|k| coarse.increment(mode, k).unwrap())
                .fold(0.0, |acc, v| acc + v);
            let mut grouped = 0.0;
            for k in 0..96 {
                let mut block = 0.0;
                for i in k * 96..(k + 1) * 96 {
                    block += lat.fine[[mode, i]];
                }
                grouped += block;
            }
            assert_eq!(coarse_total.to_bits(), grouped.to_bits());
            // And the flat fine total agrees to rounding.
            let flat: f64 = lat.fine.row(mode).iter().fold(0.0, |acc, v| acc + v);
            assert!((coarse_total - flat).abs() < 1e-12);
        }
    }

    #[test]
    fn coarsening_chain_composes_exactly() {
        let spec = spec_1d(2, 2.0);
        let lat = BrownianLattice::sample(&spec, 144, 1.0, 8, 1).unwrap();
        let chained = lat.coarsen(4).unwrap().coarsen(3).unwrap();
        let direct = lat.coarsen(12).unwrap();
        let a = chained.coarse_matrix();
        let b = direct.coarse_matrix();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn mode_factor_examples() {
        assert!((ModeKind::Sine.factor(0, 1, 0.5) - 1.0).abs() < 1e-15);
        for j in 1..6 {
            assert!(ModeKind::Sine.factor(0, j, 0.0).abs() < 1e-15);
        }
        let expect = (std::f64::consts::PI * 0.5 + basis_fn(1, 0.5)).sin();
        assert!((ModeKind::SinePlusBasisPhase.factor(0, 1, 0.5) - expect).abs() < 1e-15);
        // The 2-d product kind mixes a phase factor in x with an additive
        // factor in y.
        let add = (2.0 * std::f64::consts::PI * 0.5).sin() + basis_fn(2, 0.5);
        assert!((ModeKind::ProductSineBasis.factor(1, 2, 0.5) - add).abs() < 1e-15);
        let phase = (2.0 * std::f64::consts::PI * 0.5 + basis_fn(2, 0.5)).sin();
        assert!((ModeKind::ProductSineBasis.factor(0, 2, 0.5) - phase).abs() < 1e-15);
    }

    #[test]
    fn increment_field_single_mode() {
        let spec = spec_1d(1, 2.0);
        let rule = QuadratureRule::gauss_lobatto(12).unwrap();
        let cache = mode_values(&spec, &rule);

        let zero = BrownianLattice::from_increments(Array2::zeros((1, 4)), 1.0, 0, 0);
        let field = increment_field_1d(&zero, &cache, 2).unwrap();
        assert!(field.iter().all(|v| *v == 0.0));

        let mut inc = Array2::zeros((1, 4));
        inc[[0, 1]] = 1.0;
        let kick = BrownianLattice::from_increments(inc, 1.0, 0, 0);
        let field = increment_field_1d(&kick, &cache, 1).unwrap();
        for (i, &x) in rule.nodes().iter().enumerate() {
            let expect = 1.0 * (std::f64::consts::PI * x).sin(); // √q_1 = 1
            assert!((field[i] - expect).abs() < 1e-14);
        }
        assert!(increment_field_1d(&kick, &cache, 4).is_err());
    }

    #[test]
    fn two_dim_field_matches_naive_sum() {
        let spec = QWienerSpec::new(Dim::Two, 3, 3.0, ModeKind::ProductSineBasis).unwrap();
        let rule = QuadratureRule::gauss_lobatto(8).unwrap();
        let cache = mode_values(&spec, &rule);
        let lat = BrownianLattice::sample(&spec, 4, 0.5, 21, 0).unwrap();
        let field = increment_field_2d(&lat, &cache, 3).unwrap();

        let db = lat.increments_at(3).unwrap();
        let q = spec.q_values();
        for (a, &x) in rule.nodes().iter().enumerate() {
            for (b, &y) in rule.nodes().iter().enumerate() {
                let mut expect = 0.0;
                for j1 in 1..=3usize {
                    for j2 in 1..=3usize {
                        let idx = (j1 - 1) * 3 + (j2 - 1);
                        expect += q[idx].sqrt()
                            * db[idx]
                            * spec.mode_kind.factor(0, j1, x)
                            * spec.mode_kind.factor(1, j2, y);
                    }
                }
                assert!((field[[a, b]] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn q_decay_and_trace() {
        let spec = spec_1d(100, 5.001);
        let q = spec.q_values();
        assert_eq!(q.len(), 100);
        assert!(q.windows(2).all(|w| w[0] >= w[1] && w[1] > 0.0));
        // Σ j^{-5.001} over 100 terms is within a hair of ζ(5).
        assert!((spec.trace() - 1.03692).abs() < 1e-3);

        let spec2 = QWienerSpec::new(Dim::Two, 10, 3.0, ModeKind::Sine).unwrap();
        assert_eq!(spec2.mode_count(), 100);
        let q2 = spec2.q_values();
        assert!((q2[0] - 2.0_f64.powf(-1.5)).abs() < 1e-15);
        assert!((spec2.predicted_gamma() - 1.5).abs() < 1e-15);
        assert!((spec_1d(4, 5.001).predicted_gamma() - 3.0005).abs() < 1e-12);
    }
}
