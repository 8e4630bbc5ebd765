//! Monte Carlo strong-error studies: spatial and temporal convergence
//! tables against a fine-resolution surrogate on the same Brownian paths,
//! log-log rate fitting, and stability sweeps over large time steps.
//!
//! Every realization is an independent unit of work identified by its
//! realization id; workers share only immutable solver contexts. Results
//! are aggregated in realization order after all workers finish, so study
//! output is bitwise identical for any worker count.

use ndarray::Array1;

use crate::basis::{BasisSet, QuadratureRule};
use crate::dynamics::{DiffusionSpec, ReactionSpec};
use crate::error::{Error, Result};
use crate::noise::{BrownianLattice, QWienerSpec};
use crate::operators::OperatorSpec;
use crate::stepper::{l2_error, InitialCondition, RunConfig, RunOptions, Simulation};

/// How realizations are distributed over workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Rayon worker pool; `workers: None` uses the global pool.
    #[cfg(feature = "parallel")]
    Rayon { workers: Option<usize> },
}

impl Default for Parallelism {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Parallelism::Rayon { workers: None }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Parallelism::Sequential
        }
    }
}

/// Run `f` for realization ids 0..count and collect results in id order.
pub fn map_realizations<T, F>(count: usize, par: Parallelism, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    match par {
        Parallelism::Sequential => (0..count as u64).map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon { workers } => {
            use rayon::prelude::*;
            let run = || {
                (0..count as u64)
                    .into_par_iter()
                    .map(&f)
                    .collect::<Result<Vec<T>>>()
            };
            match workers {
                Some(w) => rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
                    .install(run),
                None => run(),
            }
        }
    }
}

/// The physics of a study: everything except discretization sizes and seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub operator: OperatorSpec,
    pub reaction: ReactionSpec,
    pub diffusion: DiffusionSpec,
    pub noise: QWienerSpec,
    pub u0: InitialCondition,
}

impl ProblemSpec {
    pub fn run_config(&self, n_cut: usize, m_steps: usize, t_horizon: f64, seed: u64) -> RunConfig {
        RunConfig {
            operator: self.operator,
            reaction: self.reaction.clone(),
            diffusion: self.diffusion,
            noise: self.noise,
            n_cut,
            m_steps,
            t_horizon,
            u0: self.u0,
            master_seed: seed,
            realization_id: 0,
        }
    }
}

/// RMS strong error over K realizations plus its jackknife standard error.
#[derive(Debug, Clone, Copy)]
pub struct StrongErrorEstimate {
    pub rms: f64,
    pub std_error: f64,
    /// False when K = 1 and the standard error is reported as 0.
    pub se_defined: bool,
    pub samples: usize,
}

fn rms_with_jackknife(errors: &[f64]) -> StrongErrorEstimate {
    let k = errors.len();
    let sum_sq: f64 = errors.iter().map(|e| e * e).sum();
    let rms = (sum_sq / k as f64).sqrt();
    if k < 2 {
        return StrongErrorEstimate {
            rms,
            std_error: 0.0,
            se_defined: false,
            samples: k,
        };
    }
    // Leave-one-out RMS estimates.
    let thetas: Vec<f64> = errors
        .iter()
        .map(|e| (((sum_sq - e * e) / (k - 1) as f64).max(0.0)).sqrt())
        .collect();
    let mean = thetas.iter().sum::<f64>() / k as f64;
    let dev_sq: f64 = thetas.iter().map(|t| (t - mean) * (t - mean)).sum();
    let std_error = ((k - 1) as f64 / k as f64 * dev_sq).sqrt();
    StrongErrorEstimate {
        rms,
        std_error,
        se_defined: true,
        samples: k,
    }
}

fn check_same_problem(cfg: &RunConfig, reference: &RunConfig) -> Result<()> {
    let same = cfg.operator == reference.operator
        && cfg.reaction == reference.reaction
        && cfg.diffusion == reference.diffusion
        && cfg.noise == reference.noise
        && cfg.u0 == reference.u0
        && cfg.t_horizon == reference.t_horizon;
    if !same {
        return Err(Error::InvalidConfig(
            "reference run must differ from the coarse run only in N and/or M".into(),
        ));
    }
    if reference.m_steps % cfg.m_steps != 0 {
        return Err(Error::InvalidConfig(format!(
            "reference M = {} must be a multiple of M = {}",
            reference.m_steps, cfg.m_steps
        )));
    }
    Ok(())
}

fn tag_realization(err: Error, realization: u64) -> Error {
    match err {
        Error::Divergence { step, .. } => Error::Divergence {
            step,
            realization: Some(realization),
        },
        other => other,
    }
}

/// Path-coupled strong error at final time between a coarse run and its
/// surrogate reference: both are driven by the same Brownian lattice,
/// sampled at the reference resolution and coarsened by summation.
pub fn strong_error(
    cfg: &RunConfig,
    reference: &RunConfig,
    k_realizations: usize,
    master_seed: u64,
    par: Parallelism,
) -> Result<StrongErrorEstimate> {
    if k_realizations == 0 {
        return Err(Error::InvalidConfig("K must be >= 1".into()));
    }
    check_same_problem(cfg, reference)?;
    let factor = reference.m_steps / cfg.m_steps;

    let sim = Simulation::new(cfg)?;
    let sim_ref = Simulation::new(reference)?;
    let eval_rule = QuadratureRule::gauss_lobatto(cfg.n_cut.max(reference.n_cut) + 2)?;
    let eval_basis = BasisSet::new(cfg.n_cut, &eval_rule)?;
    let eval_basis_ref = BasisSet::new(reference.n_cut, &eval_rule)?;
    let opts = RunOptions::default();

    let errors = map_realizations(k_realizations, par, |i| {
        let lattice = BrownianLattice::sample(
            &cfg.noise,
            reference.m_steps,
            cfg.t_horizon,
            master_seed,
            i,
        )?;
        let fine = sim_ref
            .solve_path(&lattice, 1, &opts)
            .map_err(|e| tag_realization(e, i))?;
        let coarse = sim
            .solve_path(&lattice, factor, &opts)
            .map_err(|e| tag_realization(e, i))?;
        l2_error(
            &coarse.final_phi,
            &eval_basis,
            &fine.final_phi,
            &eval_basis_ref,
        )
    })?;
    Ok(rms_with_jackknife(&errors))
}

/// Convergence-table axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    SpatialN,
    TemporalM,
}

impl std::fmt::Display for AxisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AxisKind::SpatialN => write!(f, "spatial_N"),
            AxisKind::TemporalM => write!(f, "temporal_M"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ErrorRow {
    pub axis_value: f64,
    pub samples: usize,
    pub rms_error: f64,
    pub std_error: f64,
    pub se_defined: bool,
}

/// The surrogate resolution a table was measured against.
#[derive(Debug, Clone, Copy)]
pub struct SurrogateRef {
    pub n_ref: usize,
    pub m_ref: usize,
}

impl std::fmt::Display for SurrogateRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "surrogate N={} M={}", self.n_ref, self.m_ref)
    }
}

/// Least-squares fit of log(rms) against the log axis, reported as a
/// positive decay order: error ∝ N^(−slope) spatially, ∝ τ^(slope) in time.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    /// Intercept of the fit in (ln axis, ln err) coordinates.
    pub intercept: f64,
    /// Largest |ln err − fit| over the used rows.
    pub max_residual: f64,
    pub used_rows: usize,
    pub excluded_rows: usize,
}

impl RateFit {
    /// A fit that had to drop zero, non-finite, or machine-floor rows says
    /// nothing trustworthy about the rate.
    pub fn reliable(&self) -> bool {
        self.excluded_rows == 0
    }
}

/// One strong-error row per axis value, path-coupled across rows, plus the
/// fitted rate when at least three rows were usable.
#[derive(Debug, Clone)]
pub struct ErrorTable {
    pub axis: AxisKind,
    pub rows: Vec<ErrorRow>,
    pub fit: Option<RateFit>,
    pub reference: SurrogateRef,
}

/// Fit the decay order of a table; rows with zero, non-finite, or
/// machine-floor errors are excluded and counted in the result.
pub fn fit_rate(table: &ErrorTable) -> Result<RateFit> {
    fit_rows(&table.rows)
}

const ERROR_FLOOR: f64 = 1e-13;

fn fit_rows(rows: &[ErrorRow]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.rms_error.is_finite() && r.rms_error > ERROR_FLOOR)
        .map(|r| (r.axis_value.ln(), r.rms_error.ln()))
        .collect();
    let excluded = rows.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::TooFewRows(usable.len()));
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|(x, _)| x).sum();
    let sy: f64 = usable.iter().map(|(_, y)| y).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = usable.iter().map(|(x, y)| x * y).sum();
    let raw_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - raw_slope * sx) / n;
    let max_residual = usable
        .iter()
        .map(|(x, y)| (y - (intercept + raw_slope * x)).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        slope: -raw_slope,
        intercept,
        max_residual,
        used_rows: usable.len(),
        excluded_rows: excluded,
    })
}

/// Spatial study: vary N at fixed M, error against an N_ref surrogate on
/// shared paths.
#[derive(Debug, Clone)]
pub struct SpatialStudySpec {
    pub ns: Vec<usize>,
    pub m_steps: usize,
    pub t_horizon: f64,
    pub k_realizations: usize,
    pub n_ref: usize,
}

pub fn spatial_study(
    problem: &ProblemSpec,
    study: &SpatialStudySpec,
    master_seed: u64,
    par: Parallelism,
) -> Result<ErrorTable> {
    if study.ns.is_empty() {
        return Err(Error::InvalidConfig(
            "spatial study needs at least one N".into(),
        ));
    }
    if study.k_realizations == 0 {
        return Err(Error::InvalidConfig("K must be >= 1".into()));
    }
    let mut ns = study.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    let max_n = *ns.last().expect("non-empty");
    if study.n_ref <= max_n {
        return Err(Error::InvalidConfig(format!(
            "reference cutoff N_ref = {} must exceed every study N (max {max_n})",
            study.n_ref
        )));
    }

    let sims: Vec<Simulation> = ns
        .iter()
        .map(|&n| {
            Simulation::new(&problem.run_config(n, study.m_steps, study.t_horizon, master_seed))
        })
        .collect::<Result<_>>()?;
    let sim_ref = Simulation::new(&problem.run_config(
        study.n_ref,
        study.m_steps,
        study.t_horizon,
        master_seed,
    ))?;
    let eval_rule = QuadratureRule::gauss_lobatto(study.n_ref + 2)?;
    let eval_bases: Vec<BasisSet> = ns
        .iter()
        .map(|&n| BasisSet::new(n, &eval_rule))
        .collect::<Result<_>>()?;
    let eval_basis_ref = BasisSet::new(study.n_ref, &eval_rule)?;
    let opts = RunOptions::default();

    // One reference solve per realization, shared by every row.
    let per_realization = map_realizations(study.k_realizations, par, |i| {
        let lattice = BrownianLattice::sample(
            &problem.noise,
            study.m_steps,
            study.t_horizon,
            master_seed,
            i,
        )?;
        let fine = sim_ref
            .solve_path(&lattice, 1, &opts)
            .map_err(|e| tag_realization(e, i))?;
        let mut errs = Vec::with_capacity(sims.len());
        for (sim, basis) in sims.iter().zip(&eval_bases) {
            let coarse = sim
                .solve_path(&lattice, 1, &opts)
                .map_err(|e| tag_realization(e, i))?;
            errs.push(l2_error(
                &coarse.final_phi,
                basis,
                &fine.final_phi,
                &eval_basis_ref,
            )?);
        }
        Ok(errs)
    })?;

    let rows = collect_rows(&ns, &per_realization);
    let fit = fit_rows(&rows).ok();
    Ok(ErrorTable {
        axis: AxisKind::SpatialN,
        rows,
        fit,
        reference: SurrogateRef {
            n_ref: study.n_ref,
            m_ref: study.m_steps,
        },
    })
}

/// Temporal study: vary M at fixed N, lattices sampled at M_ref and
/// coarsened so all resolutions share one path.
#[derive(Debug, Clone)]
pub struct TemporalStudySpec {
    pub ms: Vec<usize>,
    pub n_cut: usize,
    pub t_horizon: f64,
    pub k_realizations: usize,
    pub m_ref: usize,
}

pub fn temporal_study(
    problem: &ProblemSpec,
    study: &TemporalStudySpec,
    master_seed: u64,
    par: Parallelism,
) -> Result<ErrorTable> {
    if study.ms.is_empty() {
        return Err(Error::InvalidConfig(
            "temporal study needs at least one M".into(),
        ));
    }
    if study.k_realizations == 0 {
        return Err(Error::InvalidConfig("K must be >= 1".into()));
    }
    let mut ms = study.ms.clone();
    ms.sort_unstable();
    ms.dedup();
    for &m in &ms {
        if m == 0 || study.m_ref % m != 0 || m >= study.m_ref {
            return Err(Error::InvalidConfig(format!(
                "every study M must divide M_ref = {} and be smaller; got {m}",
                study.m_ref
            )));
        }
    }

    let sims: Vec<Simulation> = ms
        .iter()
        .map(|&m| {
            Simulation::new(&problem.run_config(study.n_cut, m, study.t_horizon, master_seed))
        })
        .collect::<Result<_>>()?;
    let sim_ref = Simulation::new(&problem.run_config(
        study.n_cut,
        study.m_ref,
        study.t_horizon,
        master_seed,
    ))?;
    // All runs share one cutoff, so one evaluation basis serves both sides.
    let eval_rule = QuadratureRule::gauss_lobatto(study.n_cut + 2)?;
    let eval_basis = BasisSet::new(study.n_cut, &eval_rule)?;
    let opts = RunOptions::default();

    let per_realization = map_realizations(study.k_realizations, par, |i| {
        let lattice = BrownianLattice::sample(
            &problem.noise,
            study.m_ref,
            study.t_horizon,
            master_seed,
            i,
        )?;
        let fine = sim_ref
            .solve_path(&lattice, 1, &opts)
            .map_err(|e| tag_realization(e, i))?;
        let mut errs = Vec::with_capacity(sims.len());
        for (sim, &m) in sims.iter().zip(&ms) {
            let coarse = sim
                .solve_path(&lattice, study.m_ref / m, &opts)
                .map_err(|e| tag_realization(e, i))?;
            errs.push(l2_error(
                &coarse.final_phi,
                &eval_basis,
                &fine.final_phi,
                &eval_basis,
            )?);
        }
        Ok(errs)
    })?;

    let rows = collect_rows(&ms, &per_realization);
    let fit = fit_rows(&rows).ok();
    Ok(ErrorTable {
        axis: AxisKind::TemporalM,
        rows,
        fit,
        reference: SurrogateRef {
            n_ref: study.n_cut,
            m_ref: study.m_ref,
        },
    })
}

fn collect_rows(axis_values: &[usize], per_realization: &[Vec<f64>]) -> Vec<ErrorRow> {
    axis_values
        .iter()
        .enumerate()
        .map(|(col, &axis)| {
            let errs: Vec<f64> = per_realization.iter().map(|r| r[col]).collect();
            let est = rms_with_jackknife(&errs);
            ErrorRow {
                axis_value: axis as f64,
                samples: est.samples,
                rms_error: est.rms,
                std_error: est.std_error,
                se_defined: est.se_defined,
            }
        })
        .collect()
}

/// Largest sample-mean of ‖u^k‖² over a sweep of time steps, against the
/// moment bound exp((2K + 2c²TrQ)T)·‖u0‖² + exp((2K + 2c²TrQ)T)/(K + c²TrQ).
#[derive(Debug, Clone, Copy)]
pub struct StabilityRow {
    pub tau: f64,
    pub m_steps: usize,
    pub max_mean_norm_sq: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// One-sided constant of the reaction entering the bound.
    pub coercivity: f64,
    /// Growth constant of the diffusion entry.
    pub lipschitz: f64,
    pub trace_q: f64,
}

pub fn stability_sweep(
    problem: &ProblemSpec,
    taus: &[f64],
    t_horizon: f64,
    n_cut: usize,
    k_realizations: usize,
    master_seed: u64,
    par: Parallelism,
) -> Result<StabilityReport> {
    if taus.is_empty() || taus.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidConfig(
            "stability sweep needs positive step sizes".into(),
        ));
    }
    let coercivity = problem.reaction.one_sided_constant();
    let lipschitz = problem.diffusion.lipschitz_constant();
    let trace_q = problem.noise.trace();
    let damping = coercivity + lipschitz * lipschitz * trace_q;
    let growth = (2.0 * damping * t_horizon).exp();

    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let m_steps = (t_horizon / tau).round() as usize;
        if m_steps == 0 || ((m_steps as f64) * tau - t_horizon).abs() > 1e-9 * t_horizon {
            return Err(Error::InvalidConfig(format!(
                "step size {tau} does not divide the horizon {t_horizon}"
            )));
        }
        let cfg = problem.run_config(n_cut, m_steps, t_horizon, master_seed);
        let sim = Simulation::new(&cfg)?;
        let opts = RunOptions {
            record_norms: true,
            ..Default::default()
        };
        let traces = map_realizations(k_realizations, par, |i| {
            let lattice =
                BrownianLattice::sample(&problem.noise, m_steps, t_horizon, master_seed, i)?;
            let out = sim
                .solve_path(&lattice, 1, &opts)
                .map_err(|e| tag_realization(e, i))?;
            Ok(out.norm_sq_history.expect("norms recorded"))
        })?;

        let u0_norm_sq = traces[0][0];
        let mut max_mean: f64 = 0.0;
        for step in 0..=m_steps {
            let mean = traces.iter().map(|tr| tr[step]).sum::<f64>() / k_realizations as f64;
            max_mean = max_mean.max(mean);
        }
        let bound = if damping > 0.0 {
            growth * u0_norm_sq + growth / damping
        } else {
            f64::INFINITY
        };
        rows.push(StabilityRow {
            tau,
            m_steps,
            max_mean_norm_sq: max_mean,
            bound,
            within_bound: max_mean <= bound,
        });
    }
    Ok(StabilityReport {
        rows,
        coercivity,
        lipschitz,
        trace_q,
    })
}

/// Spatial decay order a study is expected to show, from the noise decay.
pub fn expected_spatial_rate(noise: &QWienerSpec) -> f64 {
    noise.predicted_gamma()
}

/// Temporal order: min(γ/2, 1) for additive noise, min(γ/2, 1/2) for
/// state-dependent noise, and first order when the noise is switched off.
pub fn expected_temporal_rate(noise: &QWienerSpec, diffusion: &DiffusionSpec) -> f64 {
    let gamma = noise.predicted_gamma();
    match diffusion {
        DiffusionSpec::Linear(c) if *c == 0.0 => 1.0,
        DiffusionSpec::ConstantOne => (gamma / 2.0).min(1.0),
        _ => (gamma / 2.0).min(0.5),
    }
}

/// Second-moment recursion for the linear additive-noise scheme (f ≡ 0,
/// g ≡ 1): per mode, E[(v')²] = (λ² E[v²] + E[ŵ²]) / (λ + τ)², where ŵ is
/// the projected noise load with E[ŵ ŵᵀ] = τ Σ_j q_j (Hᵀ p_j)(Hᵀ p_j)ᵀ and
/// p_j the load vector of e_j. Returns E‖u^k‖² = Σ_m λ_m E[v_m²] per step;
/// an exact oracle for the stability machinery.
pub fn additive_second_moment_oracle(
    sim: &crate::stepper::Sim1d,
    noise: &QWienerSpec,
    m_steps: usize,
    tau: f64,
) -> Result<Vec<f64>> {
    let basis = sim.noise_basis();
    let eigen = sim.eigen();
    let modes = crate::noise::mode_values(noise, basis.rule());
    let n = eigen.lambda.len();
    let nn = basis.rule().len();

    let q = noise.q_values();
    let mut w_var = Array1::<f64>::zeros(n);
    for (j, &qj) in q.iter().enumerate() {
        let e_nodal = Array1::from_iter((0..nn).map(|a| modes.factor_at(j, a)));
        let p = basis.load_vector_1d(&e_nodal)?;
        let hp = eigen.h.t().dot(&p);
        for m in 0..n {
            w_var[m] += tau * qj * hp[m] * hp[m];
        }
    }

    let mut second = sim.initial_modal().mapv(|v| v * v);
    let norm_sq = |sec: &Array1<f64>| -> f64 {
        sec.iter()
            .zip(eigen.lambda.iter())
            .map(|(s, l)| l * s)
            .sum()
    };
    let mut norms = Vec::with_capacity(m_steps + 1);
    norms.push(norm_sq(&second));
    for _ in 0..m_steps {
        for m in 0..n {
            let lam = eigen.lambda[m];
            second[m] = (lam * lam * second[m] + w_var[m]) / ((lam + tau) * (lam + tau));
        }
        norms.push(norm_sq(&second));
    }
    Ok(norms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::ModeKind;
    use crate::Dim;

    fn small_problem() -> ProblemSpec {
        ProblemSpec {
            operator: OperatorSpec::new(
                Dim::One,
                1.0 / (std::f64::consts::PI * std::f64::consts::PI),
            )
            .unwrap(),
            reaction: ReactionSpec::allen_cahn(),
            diffusion: DiffusionSpec::ConstantOne,
            noise: QWienerSpec::new(Dim::One, 8, 5.001, ModeKind::Sine).unwrap(),
            u0: InitialCondition::SineProduct,
        }
    }

    #[test]
    fn identical_configs_give_zero_error() {
        let prob = small_problem();
        let cfg = prob.run_config(8, 8, 0.25, 3);
        let est = strong_error(&cfg, &cfg, 3, 3, Parallelism::Sequential).unwrap();
        assert_eq!(est.rms, 0.0);
        assert_eq!(est.std_error, 0.0);
        assert!(est.se_defined);
    }

    #[test]
    fn single_realization_flags_undefined_se() {
        let prob = small_problem();
        let cfg = prob.run_config(6, 8, 0.25, 3);
        let reference = prob.run_config(12, 16, 0.25, 3);
        let est = strong_error(&cfg, &reference, 1, 3, Parallelism::Sequential).unwrap();
        assert!(!est.se_defined);
        assert_eq!(est.std_error, 0.0);
        assert!(est.rms > 0.0);
    }

    #[test]
    fn deterministic_problem_has_zero_variance() {
        let mut prob = small_problem();
        prob.reaction = ReactionSpec::zero();
        prob.diffusion = DiffusionSpec::Linear(0.0);
        let cfg = prob.run_config(6, 8, 0.5, 1);
        let reference = prob.run_config(16, 32, 0.5, 1);
        let a = strong_error(&cfg, &reference, 1, 1, Parallelism::Sequential).unwrap();
        let b = strong_error(&cfg, &reference, 5, 1, Parallelism::Sequential).unwrap();
        assert!(a.rms > 0.0);
        assert_eq!(a.rms.to_bits(), b.rms.to_bits());
        assert!(b.std_error < 1e-15);
    }

    #[test]
    fn mismatched_problems_are_rejected() {
        let prob = small_problem();
        let cfg = prob.run_config(6, 8, 0.25, 3);
        let mut reference = prob.run_config(12, 16, 0.25, 3);
        reference.diffusion = DiffusionSpec::Sine;
        assert!(strong_error(&cfg, &reference, 2, 3, Parallelism::Sequential).is_err());

        // M = 12 is not a multiple of 8.
        let bad_m = prob.run_config(12, 12, 0.25, 3);
        assert!(strong_error(&cfg, &bad_m, 2, 3, Parallelism::Sequential).is_err());
    }

    fn synthetic_table(axis: AxisKind, values: &[(f64, f64)]) -> ErrorTable {
        ErrorTable {
            axis,
            rows: values
                .iter()
                .map(|&(axis_value, rms_error)| ErrorRow {
                    axis_value,
                    samples: 10,
                    rms_error,
                    std_error: 0.0,
                    se_defined: true,
                })
                .collect(),
            fit: None,
            reference: SurrogateRef { n_ref: 64, m_ref: 1 },
        }
    }

    #[test]
    fn fit_rate_recovers_exact_power_laws() {
        // err = 7 N^{-3}
        let rows: Vec<(f64, f64)> = [12.0f64, 14.0, 16.0, 18.0, 20.0]
            .iter()
            .map(|&n| (n, 7.0 * n.powf(-3.0)))
            .collect();
        let fit = fit_rate(&synthetic_table(AxisKind::SpatialN, &rows)).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!(fit.max_residual < 1e-12);
        assert!(fit.reliable());

        // err = 2 τ^{1/2} with τ = T/M, T = 1.
        let rows: Vec<(f64, f64)> = [96.0f64, 144.0, 192.0, 256.0]
            .iter()
            .map(|&m| (m, 2.0 * (1.0 / m).sqrt()))
            .collect();
        let fit = fit_rate(&synthetic_table(AxisKind::TemporalM, &rows)).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_rate_needs_three_usable_rows() {
        let rows = [(12.0, 1e-2), (14.0, 8e-3)];
        assert!(matches!(
            fit_rate(&synthetic_table(AxisKind::SpatialN, &rows)),
            Err(Error::TooFewRows(2))
        ));
        // Zero rows are excluded, not fitted.
        let rows = [(12.0, 1e-2), (14.0, 8e-3), (16.0, 0.0), (18.0, 5e-3)];
        let fit = fit_rate(&synthetic_table(AxisKind::SpatialN, &rows)).unwrap();
        assert_eq!(fit.excluded_rows, 1);
        assert!(!fit.reliable());
    }

    #[test]
    fn spatial_study_row_matches_direct_strong_error() {
        let prob = small_problem();
        let study = SpatialStudySpec {
            ns: vec![6, 8],
            m_steps: 16,
            t_horizon: 0.25,
            k_realizations: 4,
            n_ref: 12,
        };
        let table = spatial_study(&prob, &study, 11, Parallelism::Sequential).unwrap();
        assert_eq!(table.rows.len(), 2);

        let cfg = prob.run_config(6, 16, 0.25, 11);
        let reference = prob.run_config(12, 16, 0.25, 11);
        let est = strong_error(&cfg, &reference, 4, 11, Parallelism::Sequential).unwrap();
        assert_eq!(table.rows[0].rms_error.to_bits(), est.rms.to_bits());
        assert_eq!(table.rows[0].std_error.to_bits(), est.std_error.to_bits());
    }

    #[test]
    fn temporal_study_rejects_non_divisors() {
        let prob = small_problem();
        let study = TemporalStudySpec {
            ms: vec![100],
            n_cut: 8,
            t_horizon: 1.0,
            k_realizations: 2,
            m_ref: 9216,
        };
        assert!(temporal_study(&prob, &study, 1, Parallelism::Sequential).is_err());
    }

    #[test]
    fn parabola_initial_data_gives_tiny_spectral_errors() {
        // x(1−x) lies in every V_N; the only spatial discrepancy is the
        // leakage the projected heat flow produces, which drops spectrally
        // fast in N.
        let mut prob = small_problem();
        prob.reaction = ReactionSpec::zero();
        prob.diffusion = DiffusionSpec::Linear(0.0);
        prob.u0 = InitialCondition::Parabola;
        let study = SpatialStudySpec {
            ns: vec![4, 8, 12],
            m_steps: 8,
            t_horizon: 0.25,
            k_realizations: 1,
            n_ref: 16,
        };
        let table = spatial_study(&prob, &study, 5, Parallelism::Sequential).unwrap();
        assert!(table.rows[0].rms_error < 1e-3);
        assert!(table.rows[2].rms_error < 1e-7);
        assert!(table.rows[2].rms_error < table.rows[0].rms_error);
    }

    #[test]
    fn floor_rows_leave_the_fit_unreliable_or_absent() {
        // Zero initial data with f(0) = 0 and g = 0 keeps every resolution
        // exactly at zero, so all rows sit on the floor and no trustworthy
        // rate can be fitted.
        let mut prob = small_problem();
        prob.reaction = ReactionSpec::zero();
        prob.diffusion = DiffusionSpec::Linear(0.0);
        prob.u0 = InitialCondition::Zero;
        let study = SpatialStudySpec {
            ns: vec![4, 5, 6, 7],
            m_steps: 8,
            t_horizon: 0.25,
            k_realizations: 1,
            n_ref: 16,
        };
        let table = spatial_study(&prob, &study, 5, Parallelism::Sequential).unwrap();
        for row in &table.rows {
            assert_eq!(row.rms_error, 0.0);
        }
        assert!(table.fit.is_none() || !table.fit.unwrap().reliable());
    }

    #[test]
    fn stability_row_for_contraction() {
        // f = 0, g = 0: the scheme contracts per mode, so the norm never
        // grows.
        let mut prob = small_problem();
        prob.reaction = ReactionSpec::zero();
        prob.diffusion = DiffusionSpec::Linear(0.0);
        let report =
            stability_sweep(&prob, &[0.25], 1.0, 8, 2, 7, Parallelism::Sequential).unwrap();
        let row = &report.rows[0];
        assert!(row.within_bound || row.bound.is_infinite());

        let cfg = prob.run_config(8, 4, 1.0, 7);
        let sim = Simulation::new(&cfg).unwrap();
        let lat = BrownianLattice::sample(&prob.noise, 4, 1.0, 7, 0).unwrap();
        let out = sim
            .solve_path(
                &lat,
                1,
                &RunOptions {
                    record_norms: true,
                    ..Default::default()
                },
            )
            .unwrap();
        let norms = out.norm_sq_history.unwrap();
        for w in norms.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn expected_rates_match_catalog() {
        let noise = QWienerSpec::new(Dim::One, 100, 5.001, ModeKind::Sine).unwrap();
        assert!((expected_spatial_rate(&noise) - 3.0005).abs() < 1e-12);
        assert!((expected_temporal_rate(&noise, &DiffusionSpec::ConstantOne) - 1.0).abs() < 1e-12);
        assert!((expected_temporal_rate(&noise, &DiffusionSpec::Rational) - 0.5).abs() < 1e-12);
        assert!((expected_temporal_rate(&noise, &DiffusionSpec::Linear(0.0)) - 1.0).abs() < 1e-12);
        let rough = QWienerSpec::new(Dim::One, 100, 1.001, ModeKind::Sine).unwrap();
        assert!((expected_spatial_rate(&rough) - 1.0005).abs() < 1e-12);
    }
}
