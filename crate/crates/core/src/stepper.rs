//! Tamed semi-implicit Euler stepping in the diagonalizing eigenbasis, for
//! one and two space dimensions, plus full-trajectory driving and L² error
//! evaluation between fields of different resolutions.
//!
//! One step in the Dirichlet basis solves
//!
//!   (B + τ A) c^{k+1} = B c^k + τ F^k / (1 + τ‖f(u^k)‖²) + W^k,
//!
//! where F^k_m = ∫ I(f(u^k)) φ_m and W^k_m = ∫ I(g(u^k) ΔW^Q) φ_m; the noise
//! load enters once, with no extra factor of τ. The pencil eigenvectors
//! satisfy B H = A H Λ with Hᵀ A H = I, hence Hᵀ B H = Λ. Substituting
//! c = H v and multiplying by Hᵀ decouples the modes:
//!
//!   (λ_m + τ) v_m^{k+1} = λ_m v_m^k + [Hᵀ(τ F / (1 + τ‖f‖²) + W)]_m.
//!
//! In 2-d the mass acts on both tensor indices; with C = H V Hᵀ the same
//! identities give
//!
//!   (λ_m λ_n + τ(λ_m + λ_n)) V_mn^{k+1}
//!       = λ_m λ_n V_mn^k + [Hᵀ(τ F / (1 + τ‖f‖²) + W) H]_mn.

use ndarray::{Array1, Array2};

use crate::basis::{BasisSet, QuadratureRule};
use crate::dynamics::{
    f_eval_1d, f_eval_2d, g_eval_1d, g_eval_2d, l2_norm_1d, l2_norm_2d, taming_factor,
    DiffusionSpec, ReactionSpec,
};
use crate::error::{Error, Result};
use crate::noise::{
    increment_field_1d, increment_field_2d, mode_values, BrownianLattice, ModeValues, QWienerSpec,
};
use crate::operators::{
    assemble_mass, assemble_stiffness, generalized_eigendecomposition, project_initial_1d,
    project_initial_2d, EigenSystem, MassSolver, OperatorSpec,
};
use crate::Dim;

/// Over-integration margin: the reaction polynomial of a degree-N field is
/// sampled on Np = N + 8 Gauss-Lobatto points so aliasing stays subdominant.
pub const QUADRATURE_MARGIN: usize = 8;

/// Order of the rule carrying the noise term. A rule of order Np only
/// represents covariance modes up to j ≈ Np/2; beyond that sin(jπx)
/// aliases to an O(1) polynomial and feeds spurious energy into every
/// resolution, flooring the spatial convergence. 2J + 8 keeps the highest
/// retained mode inside the resolving range.
pub fn noise_rule_order(n_cut: usize, modes_per_direction: usize) -> usize {
    (n_cut + QUADRATURE_MARGIN).max(2 * modes_per_direction + QUADRATURE_MARGIN)
}

/// Initial-condition catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// sin(πx), or sin(πx) sin(πy) in 2-d.
    SineProduct,
    /// x(1−x), tensorized in 2-d; lies in the basis span for every N ≥ 3.
    Parabola,
    Zero,
}

impl InitialCondition {
    pub fn eval_1d(self, x: f64) -> f64 {
        match self {
            InitialCondition::SineProduct => (std::f64::consts::PI * x).sin(),
            InitialCondition::Parabola => x * (1.0 - x),
            InitialCondition::Zero => 0.0,
        }
    }

    pub fn eval_2d(self, x: f64, y: f64) -> f64 {
        match self {
            InitialCondition::Zero => 0.0,
            _ => self.eval_1d(x) * self.eval_1d(y),
        }
    }
}

impl std::fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InitialCondition::SineProduct => "sine",
            InitialCondition::Parabola => "parabola",
            InitialCondition::Zero => "zero",
        };
        write!(f, "{s}")
    }
}

/// Full description of one run: operator, reaction, diffusion, noise,
/// discretization sizes, initial condition, and seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub operator: OperatorSpec,
    pub reaction: ReactionSpec,
    pub diffusion: DiffusionSpec,
    pub noise: QWienerSpec,
    /// Spatial cutoff N (the basis has N−1 functions per direction).
    pub n_cut: usize,
    /// Time steps M; τ = T / M.
    pub m_steps: usize,
    pub t_horizon: f64,
    pub u0: InitialCondition,
    pub master_seed: u64,
    pub realization_id: u64,
}

impl RunConfig {
    pub fn tau(&self) -> f64 {
        self.t_horizon / self.m_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cut < 3 {
            return Err(Error::InvalidConfig(format!(
                "spatial cutoff N must be >= 3, got {}",
                self.n_cut
            )));
        }
        if self.m_steps == 0 {
            return Err(Error::InvalidConfig("time steps M must be >= 1".into()));
        }
        if !(self.t_horizon > 0.0) || !self.t_horizon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "horizon T must be positive, got {}",
                self.t_horizon
            )));
        }
        if self.operator.dimension != self.noise.dimension {
            return Err(Error::InvalidConfig(format!(
                "operator is {}-d but noise is {}-d",
                self.operator.dimension, self.noise.dimension
            )));
        }
        Ok(())
    }
}

/// Solution data in either dimension.
#[derive(Debug, Clone)]
pub enum Field {
    One(Array1<f64>),
    Two(Array2<f64>),
}

impl Field {
    pub fn dim(&self) -> Dim {
        match self {
            Field::One(_) => Dim::One,
            Field::Two(_) => Dim::Two,
        }
    }

    pub fn as_1d(&self) -> Option<&Array1<f64>> {
        match self {
            Field::One(a) => Some(a),
            Field::Two(_) => None,
        }
    }

    pub fn as_2d(&self) -> Option<&Array2<f64>> {
        match self {
            Field::One(_) => None,
            Field::Two(a) => Some(a),
        }
    }
}

/// Trajectory recording switches; everything is off by default.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record ‖u^k‖² for every step, including the initial state.
    pub record_norms: bool,
    /// Record the nodal field every ⌈M/100⌉ steps.
    pub record_snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub l2_norm: f64,
    pub nodal: Field,
}

/// Result of driving a trajectory to the final time.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub steps: usize,
    /// Final eigen-coordinates V.
    pub final_modal: Field,
    /// Final coefficients in the Dirichlet basis, C = H V (· Hᵀ in 2-d).
    pub final_phi: Field,
    /// Final values at the quadrature nodes.
    pub final_nodal: Field,
    pub norm_sq_history: Option<Vec<f64>>,
    pub snapshots: Option<Vec<Snapshot>>,
}

/// One-dimensional solver context: immutable caches shared by every
/// realization of a configuration.
#[derive(Debug, Clone)]
pub struct Sim1d {
    tau: f64,
    m_steps: usize,
    reaction: ReactionSpec,
    diffusion: DiffusionSpec,
    basis: BasisSet,
    /// Same cutoff on the mode-resolving rule; carries the noise load.
    noise_basis: BasisSet,
    eigen: EigenSystem,
    mass: Array2<f64>,
    stiffness: Array2<f64>,
    modes: ModeValues,
    v0: Array1<f64>,
}

impl Sim1d {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.operator.dimension != Dim::One {
            return Err(Error::InvalidConfig("Sim1d needs a 1-d configuration".into()));
        }
        let rule = QuadratureRule::gauss_lobatto(cfg.n_cut + QUADRATURE_MARGIN)?;
        let basis = BasisSet::new(cfg.n_cut, &rule)?;
        let noise_rule = QuadratureRule::gauss_lobatto(noise_rule_order(
            cfg.n_cut,
            cfg.noise.modes_per_direction,
        ))?;
        let noise_basis = BasisSet::new(cfg.n_cut, &noise_rule)?;
        let mass = assemble_mass(cfg.n_cut);
        let stiffness = assemble_stiffness(cfg.n_cut, cfg.operator.diffusivity);
        let eigen = generalized_eigendecomposition(&mass, &stiffness)?;
        let mass_solver = MassSolver::new(&mass)?;
        let modes = mode_values(&cfg.noise, &noise_rule);

        let u0 = cfg.u0;
        let c0 = project_initial_1d(|x| u0.eval_1d(x), &basis, &mass_solver)?;
        // v = H⁻¹ c with H⁻¹ = Hᵀ A.
        let v0 = eigen.h.t().dot(&stiffness.dot(&c0));

        Ok(Self {
            tau: cfg.tau(),
            m_steps: cfg.m_steps,
            reaction: cfg.reaction.clone(),
            diffusion: cfg.diffusion,
            basis,
            noise_basis,
            eigen,
            mass,
            stiffness,
            modes,
            v0,
        })
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    /// Basis caches on the noise-resolving rule; the noise increment field
    /// and its load live on these nodes.
    pub fn noise_basis(&self) -> &BasisSet {
        &self.noise_basis
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn mass(&self) -> &Array2<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &Array2<f64> {
        &self.stiffness
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn initial_modal(&self) -> &Array1<f64> {
        &self.v0
    }

    pub fn nodal_from_modal(&self, v: &Array1<f64>) -> Result<Array1<f64>> {
        self.basis.synthesize_1d(&self.eigen.h.dot(v))
    }

    /// One tamed step from eigen-coordinates `v` with the noise increment
    /// field sampled at the noise-rule nodes; `step_index` only labels a
    /// potential divergence.
    pub fn step(
        &self,
        v: &Array1<f64>,
        dw_nodal: &Array1<f64>,
        step_index: usize,
    ) -> Result<Array1<f64>> {
        let c = self.eigen.h.dot(v);
        let u = self.basis.synthesize_1d(&c)?;
        let u_noise = self.noise_basis.synthesize_1d(&c)?;
        let (v1, _, _) = self.advance(v, &u, &u_noise, dw_nodal, step_index)?;
        Ok(v1)
    }

    fn advance(
        &self,
        v: &Array1<f64>,
        u: &Array1<f64>,
        u_noise: &Array1<f64>,
        dw: &Array1<f64>,
        step_index: usize,
    ) -> Result<(Array1<f64>, Array1<f64>, Array1<f64>)> {
        let f_nodal = f_eval_1d(&self.reaction, u);
        let f_norm = l2_norm_1d(&f_nodal, self.basis.rule());
        let tame = taming_factor(self.tau, f_norm * f_norm);
        debug_assert!(
            self.tau * f_norm * tame <= self.tau.sqrt() / 2.0 + 1e-12,
            "tamed drift bound violated"
        );
        let f_load = self.basis.load_vector_1d(&f_nodal)?;

        // g(u)·ΔW^Q is formed as one nodal field and projected once.
        let mut w_nodal = g_eval_1d(&self.diffusion, u_noise);
        w_nodal.zip_mut_with(dw, |g, d| *g *= d);
        let w_load = self.noise_basis.load_vector_1d(&w_nodal)?;

        let f_hat = self.eigen.h.t().dot(&f_load);
        let w_hat = self.eigen.h.t().dot(&w_load);

        let n = v.len();
        let mut v1 = Array1::<f64>::zeros(n);
        for m in 0..n {
            let lam = self.eigen.lambda[m];
            v1[m] = (lam * v[m] + self.tau * tame * f_hat[m] + w_hat[m]) / (lam + self.tau);
        }
        if !v1.iter().all(|x| x.is_finite()) {
            return Err(Error::Divergence {
                step: step_index,
                realization: None,
            });
        }
        let c1 = self.eigen.h.dot(&v1);
        let u1 = self.basis.synthesize_1d(&c1)?;
        let u1_noise = self.noise_basis.synthesize_1d(&c1)?;
        Ok((v1, u1, u1_noise))
    }

    pub fn solve_path(
        &self,
        lattice: &BrownianLattice,
        factor: usize,
        opts: &RunOptions,
    ) -> Result<RunOutput> {
        let lat = lattice.coarsen(factor)?;
        check_lattice(lat.steps(), self.m_steps, lat.modes(), self.modes.mode_count())?;

        let snapshot_stride = snapshot_stride(self.m_steps);
        let mut norms = opts.record_norms.then(|| Vec::with_capacity(self.m_steps + 1));
        let mut snaps = opts.record_snapshots.then(Vec::new);

        let mut v = self.v0.clone();
        let c0 = self.eigen.h.dot(&v);
        let mut u = self.basis.synthesize_1d(&c0)?;
        let mut u_noise = self.noise_basis.synthesize_1d(&c0)?;
        if let Some(ns) = norms.as_mut() {
            ns.push(l2_norm_1d(&u, self.basis.rule()).powi(2));
        }
        if let Some(sn) = snaps.as_mut() {
            sn.push(Snapshot {
                step: 0,
                time: 0.0,
                l2_norm: l2_norm_1d(&u, self.basis.rule()),
                nodal: Field::One(u.clone()),
            });
        }

        for k in 0..self.m_steps {
            let dw = increment_field_1d(&lat, &self.modes, k)?;
            let (v1, u1, u1_noise) = self.advance(&v, &u, &u_noise, &dw, k + 1)?;
            v = v1;
            u = u1;
            u_noise = u1_noise;
            if let Some(ns) = norms.as_mut() {
                ns.push(l2_norm_1d(&u, self.basis.rule()).powi(2));
            }
            if let Some(sn) = snaps.as_mut() {
                let step = k + 1;
                if step % snapshot_stride == 0 || step == self.m_steps {
                    sn.push(Snapshot {
                        step,
                        time: step as f64 * self.tau,
                        l2_norm: l2_norm_1d(&u, self.basis.rule()),
                        nodal: Field::One(u.clone()),
                    });
                }
            }
        }

        let phi = self.eigen.h.dot(&v);
        Ok(RunOutput {
            steps: self.m_steps,
            final_modal: Field::One(v),
            final_phi: Field::One(phi),
            final_nodal: Field::One(u),
            norm_sq_history: norms,
            snapshots: snaps,
        })
    }
}

/// Two-dimensional solver context.
#[derive(Debug, Clone)]
pub struct Sim2d {
    tau: f64,
    m_steps: usize,
    reaction: ReactionSpec,
    diffusion: DiffusionSpec,
    basis: BasisSet,
    noise_basis: BasisSet,
    eigen: EigenSystem,
    mass: Array2<f64>,
    stiffness: Array2<f64>,
    modes: ModeValues,
    v0: Array2<f64>,
}

impl Sim2d {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.operator.dimension != Dim::Two {
            return Err(Error::InvalidConfig("Sim2d needs a 2-d configuration".into()));
        }
        let rule = QuadratureRule::gauss_lobatto(cfg.n_cut + QUADRATURE_MARGIN)?;
        let basis = BasisSet::new(cfg.n_cut, &rule)?;
        let noise_rule = QuadratureRule::gauss_lobatto(noise_rule_order(
            cfg.n_cut,
            cfg.noise.modes_per_direction,
        ))?;
        let noise_basis = BasisSet::new(cfg.n_cut, &noise_rule)?;
        let mass = assemble_mass(cfg.n_cut);
        let stiffness = assemble_stiffness(cfg.n_cut, cfg.operator.diffusivity);
        let eigen = generalized_eigendecomposition(&mass, &stiffness)?;
        let mass_solver = MassSolver::new(&mass)?;
        let modes = mode_values(&cfg.noise, &noise_rule);

        let u0 = cfg.u0;
        let c0 = project_initial_2d(|x, y| u0.eval_2d(x, y), &basis, &mass_solver)?;
        // V = H⁻¹ C H⁻ᵀ with H⁻¹ = Hᵀ A.
        let ha = eigen.h.t().dot(&stiffness);
        let v0 = ha.dot(&c0).dot(&ha.t());

        Ok(Self {
            tau: cfg.tau(),
            m_steps: cfg.m_steps,
            reaction: cfg.reaction.clone(),
            diffusion: cfg.diffusion,
            basis,
            noise_basis,
            eigen,
            mass,
            stiffness,
            modes,
            v0,
        })
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn noise_basis(&self) -> &BasisSet {
        &self.noise_basis
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn mass(&self) -> &Array2<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &Array2<f64> {
        &self.stiffness
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn initial_modal(&self) -> &Array2<f64> {
        &self.v0
    }

    pub fn nodal_from_modal(&self, v: &Array2<f64>) -> Result<Array2<f64>> {
        let c = self.eigen.h.dot(v).dot(&self.eigen.h.t());
        self.basis.synthesize_2d(&c)
    }

    pub fn step(
        &self,
        v: &Array2<f64>,
        dw_nodal: &Array2<f64>,
        step_index: usize,
    ) -> Result<Array2<f64>> {
        let c = self.eigen.h.dot(v).dot(&self.eigen.h.t());
        let u = self.basis.synthesize_2d(&c)?;
        let u_noise = self.noise_basis.synthesize_2d(&c)?;
        let (v1, _, _) = self.advance(v, &u, &u_noise, dw_nodal, step_index)?;
        Ok(v1)
    }

    fn advance(
        &self,
        v: &Array2<f64>,
        u: &Array2<f64>,
        u_noise: &Array2<f64>,
        dw: &Array2<f64>,
        step_index: usize,
    ) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>)> {
        let f_nodal = f_eval_2d(&self.reaction, u);
        let f_norm = l2_norm_2d(&f_nodal, self.basis.rule());
        let tame = taming_factor(self.tau, f_norm * f_norm);
        debug_assert!(
            self.tau * f_norm * tame <= self.tau.sqrt() / 2.0 + 1e-12,
            "tamed drift bound violated"
        );
        let f_load = self.basis.load_vector_2d(&f_nodal)?;

        let mut w_nodal = g_eval_2d(&self.diffusion, u_noise);
        w_nodal.zip_mut_with(dw, |g, d| *g *= d);
        let w_load = self.noise_basis.load_vector_2d(&w_nodal)?;

        let ht = self.eigen.h.t();
        let f_hat = ht.dot(&f_load).dot(&self.eigen.h);
        let w_hat = ht.dot(&w_load).dot(&self.eigen.h);

        let n = v.nrows();
        let mut v1 = Array2::<f64>::zeros((n, n));
        for m in 0..n {
            let lm = self.eigen.lambda[m];
            for j in 0..n {
                let ln = self.eigen.lambda[j];
                v1[[m, j]] = (lm * ln * v[[m, j]]
                    + self.tau * tame * f_hat[[m, j]]
                    + w_hat[[m, j]])
                    / (lm * ln + self.tau * (lm + ln));
            }
        }
        if !v1.iter().all(|x| x.is_finite()) {
            return Err(Error::Divergence {
                step: step_index,
                realization: None,
            });
        }
        let c1 = self.eigen.h.dot(&v1).dot(&self.eigen.h.t());
        let u1 = self.basis.synthesize_2d(&c1)?;
        let u1_noise = self.noise_basis.synthesize_2d(&c1)?;
        Ok((v1, u1, u1_noise))
    }

    pub fn solve_path(
        &self,
        lattice: &BrownianLattice,
        factor: usize,
        opts: &RunOptions,
    ) -> Result<RunOutput> {
        let lat = lattice.coarsen(factor)?;
        check_lattice(lat.steps(), self.m_steps, lat.modes(), self.modes.mode_count())?;

        let snapshot_stride = snapshot_stride(self.m_steps);
        let mut norms = opts.record_norms.then(|| Vec::with_capacity(self.m_steps + 1));
        let mut snaps = opts.record_snapshots.then(Vec::new);

        let mut v = self.v0.clone();
        let c0 = self.eigen.h.dot(&v).dot(&self.eigen.h.t());
        let mut u = self.basis.synthesize_2d(&c0)?;
        let mut u_noise = self.noise_basis.synthesize_2d(&c0)?;
        if let Some(ns) = norms.as_mut() {
            ns.push(l2_norm_2d(&u, self.basis.rule()).powi(2));
        }
        if let Some(sn) = snaps.as_mut() {
            sn.push(Snapshot {
                step: 0,
                time: 0.0,
                l2_norm: l2_norm_2d(&u, self.basis.rule()),
                nodal: Field::Two(u.clone()),
            });
        }

        for k in 0..self.m_steps {
            let dw = increment_field_2d(&lat, &self.modes, k)?;
            let (v1, u1, u1_noise) = self.advance(&v, &u, &u_noise, &dw, k + 1)?;
            v = v1;
            u = u1;
            u_noise = u1_noise;
            if let Some(ns) = norms.as_mut() {
                ns.push(l2_norm_2d(&u, self.basis.rule()).powi(2));
            }
            if let Some(sn) = snaps.as_mut() {
                let step = k + 1;
                if step % snapshot_stride == 0 || step == self.m_steps {
                    sn.push(Snapshot {
                        step,
                        time: step as f64 * self.tau,
                        l2_norm: l2_norm_2d(&u, self.basis.rule()),
                        nodal: Field::Two(u.clone()),
                    });
                }
            }
        }

        let phi = self.eigen.h.dot(&v).dot(&self.eigen.h.t());
        Ok(RunOutput {
            steps: self.m_steps,
            final_modal: Field::Two(v),
            final_phi: Field::Two(phi),
            final_nodal: Field::Two(u),
            norm_sq_history: norms,
            snapshots: snaps,
        })
    }
}

fn snapshot_stride(m_steps: usize) -> usize {
    m_steps.div_ceil(100).max(1)
}

fn check_lattice(lat_steps: usize, m_steps: usize, lat_modes: usize, modes: usize) -> Result<()> {
    if lat_steps != m_steps {
        return Err(Error::InvalidConfig(format!(
            "lattice provides {lat_steps} coarse steps but the run needs {m_steps}"
        )));
    }
    if lat_modes != modes {
        return Err(Error::DimensionMismatch(format!(
            "lattice has {lat_modes} modes, solver expects {modes}"
        )));
    }
    Ok(())
}

/// Dimension-dispatching solver context.
#[derive(Debug, Clone)]
pub enum Simulation {
    One(Sim1d),
    Two(Sim2d),
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        match cfg.operator.dimension {
            Dim::One => Ok(Simulation::One(Sim1d::new(cfg)?)),
            Dim::Two => Ok(Simulation::Two(Sim2d::new(cfg)?)),
        }
    }

    pub fn basis(&self) -> &BasisSet {
        match self {
            Simulation::One(s) => s.basis(),
            Simulation::Two(s) => s.basis(),
        }
    }

    pub fn eigen(&self) -> &EigenSystem {
        match self {
            Simulation::One(s) => s.eigen(),
            Simulation::Two(s) => s.eigen(),
        }
    }

    /// Drive the trajectory over all M steps.
    ///
    /// The lattice is coarsened by `factor` on entry; passing a fine lattice
    /// with a factor or the pre-coarsened lattice with factor 1 produces
    /// bitwise-identical trajectories.
    pub fn solve_path(
        &self,
        lattice: &BrownianLattice,
        factor: usize,
        opts: &RunOptions,
    ) -> Result<RunOutput> {
        match self {
            Simulation::One(s) => s.solve_path(lattice, factor, opts),
            Simulation::Two(s) => s.solve_path(lattice, factor, opts),
        }
    }
}

/// One-shot trajectory: build the solver context for the configuration and
/// drive the given lattice, coarsened by `factor`.
pub fn solve_path(
    cfg: &RunConfig,
    lattice: &BrownianLattice,
    factor: usize,
    opts: &RunOptions,
) -> Result<RunOutput> {
    Simulation::new(cfg)?.solve_path(lattice, factor, opts)
}

/// Sample the lattice described by the configuration at the run's own
/// resolution and solve a single trajectory.
pub fn run_single(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutput> {
    let sim = Simulation::new(cfg)?;
    let lattice = BrownianLattice::sample(
        &cfg.noise,
        cfg.m_steps,
        cfg.t_horizon,
        cfg.master_seed,
        cfg.realization_id,
    )?;
    sim.solve_path(&lattice, 1, opts)
}

/// L² distance between two fields given in Dirichlet-basis coefficients,
/// synthesized on a shared quadrature rule.
pub fn l2_error(a: &Field, basis_a: &BasisSet, b: &Field, basis_b: &BasisSet) -> Result<f64> {
    if basis_a.rule() != basis_b.rule() {
        return Err(Error::DimensionMismatch(
            "l2_error requires both bases on one shared quadrature rule".into(),
        ));
    }
    match (a, b) {
        (Field::One(ca), Field::One(cb)) => {
            let va = basis_a.synthesize_1d(ca)?;
            let vb = basis_b.synthesize_1d(cb)?;
            Ok(l2_norm_1d(&(&va - &vb), basis_a.rule()))
        }
        (Field::Two(ca), Field::Two(cb)) => {
            let va = basis_a.synthesize_2d(ca)?;
            let vb = basis_b.synthesize_2d(cb)?;
            Ok(l2_norm_2d(&(&va - &vb), basis_a.rule()))
        }
        _ => Err(Error::DimensionMismatch(
            "cannot compare fields of different dimensions".into(),
        )),
    }
}
