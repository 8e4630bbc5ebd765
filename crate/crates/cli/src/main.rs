//! Command-line driver: parse a declarative config, run a single simulation
//! or a Monte Carlo study, and emit CSV tables plus optional SVG log-log
//! plots.
//!
//! Exit codes: 0 success, 2 config rejection, 3 runtime divergence,
//! 4 I/O failure.

mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use spde_core::experiments::{
    expected_spatial_rate, expected_temporal_rate, spatial_study, stability_sweep, temporal_study,
    Parallelism, SpatialStudySpec, TemporalStudySpec,
};
use spde_core::stepper::{run_single, RunOptions};

use config::{parse_config, FileConfig, StudyKind};

const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "spde", about = "Spectral-Galerkin solver for stochastic reaction-diffusion equations", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the study described by a config file.
    Run {
        /// Path to the sectioned key=value config.
        config: PathBuf,
        /// Cap the worker pool (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the seed from config and SPDE_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Override the SVG output path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            workers,
            seed,
            csv,
            svg,
        } => run_command(&config, workers, seed, csv, svg),
    }
}

fn run_command(
    config_path: &PathBuf,
    workers: Option<usize>,
    seed_flag: Option<u64>,
    csv_flag: Option<PathBuf>,
    svg_flag: Option<PathBuf>,
) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(EXIT_IO);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(cfg) => cfg,
        Err(violations) => {
            eprintln!("error: config rejected with {} violation(s):", violations.len());
            for v in &violations {
                eprintln!("  - {v}");
            }
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    // Seed precedence: --seed, then SPDE_SEED, then the config.
    match (seed_flag, std::env::var("SPDE_SEED").ok()) {
        (Some(s), _) => cfg.seed = s,
        (None, Some(env)) => match env.parse::<u64>() {
            Ok(s) => cfg.seed = s,
            Err(_) => {
                eprintln!("error: SPDE_SEED = '{env}' is not an unsigned integer");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        (None, None) => {}
    }
    let csv_path = csv_flag
        .or_else(|| cfg.csv.clone().map(PathBuf::from));
    let svg_path = svg_flag.or_else(|| cfg.svg.clone().map(PathBuf::from));
    let Some(csv_path) = csv_path else {
        eprintln!("error: no CSV output path: set [output] csv or pass --csv");
        return ExitCode::from(EXIT_CONFIG);
    };

    let par = match workers {
        Some(w) => Parallelism::Rayon { workers: Some(w) },
        None => Parallelism::default(),
    };

    let start = Instant::now();
    let rendered = execute(&cfg, par, workers, start);
    let (csv_text, svg_text) = match rendered {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                spde_core::Error::Divergence { .. } => EXIT_DIVERGENCE,
                _ => EXIT_CONFIG,
            };
            return ExitCode::from(code);
        }
    };

    if let Err(e) = std::fs::write(&csv_path, &csv_text) {
        eprintln!("error: cannot write {}: {e}", csv_path.display());
        return ExitCode::from(EXIT_IO);
    }
    eprintln!("wrote {}", csv_path.display());
    if let (Some(path), Some(body)) = (svg_path, svg_text) {
        if let Err(e) = std::fs::write(&path, body) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_IO);
        }
        eprintln!("wrote {}", path.display());
    }
    ExitCode::SUCCESS
}

/// Run the configured study and render its CSV (and SVG when applicable).
fn execute(
    cfg: &FileConfig,
    par: Parallelism,
    workers: Option<usize>,
    start: Instant,
) -> spde_core::Result<(String, Option<String>)> {
    let meta = |wall: f64| output::Meta {
        config: cfg,
        seed: cfg.seed,
        workers,
        wall_time_s: wall,
    };
    match &cfg.study {
        StudyKind::Single => {
            let mut run_cfg = cfg
                .problem
                .run_config(cfg.n_cut, cfg.m_steps, cfg.t_horizon, cfg.seed);
            run_cfg.master_seed = cfg.seed;
            let opts = RunOptions {
                record_norms: true,
                ..Default::default()
            };
            let out = run_single(&run_cfg, &opts)?;
            let norms = out.norm_sq_history.expect("norms recorded");
            let stride = cfg.m_steps.div_ceil(100).max(1);
            let csv = output::single_run_csv(
                &norms,
                run_cfg.tau(),
                stride,
                &meta(start.elapsed().as_secs_f64()),
            );
            Ok((csv, None))
        }
        StudyKind::Spatial { ns, k, n_ref } => {
            let study = SpatialStudySpec {
                ns: ns.clone(),
                m_steps: cfg.m_steps,
                t_horizon: cfg.t_horizon,
                k_realizations: *k,
                n_ref: *n_ref,
            };
            let table = spatial_study(&cfg.problem, &study, cfg.seed, par)?;
            let rate = expected_spatial_rate(&cfg.problem.noise);
            let csv = output::table_csv(&table, &meta(start.elapsed().as_secs_f64()), rate);
            let svg = svg::render(&table, Some(rate));
            Ok((csv, Some(svg)))
        }
        StudyKind::Temporal { ms, k, m_ref } => {
            let study = TemporalStudySpec {
                ms: ms.clone(),
                n_cut: cfg.n_cut,
                t_horizon: cfg.t_horizon,
                k_realizations: *k,
                m_ref: *m_ref,
            };
            let table = temporal_study(&cfg.problem, &study, cfg.seed, par)?;
            let rate = expected_temporal_rate(&cfg.problem.noise, &cfg.problem.diffusion);
            let csv = output::table_csv(&table, &meta(start.elapsed().as_secs_f64()), rate);
            let svg = svg::render(&table, Some(rate));
            Ok((csv, Some(svg)))
        }
        StudyKind::Stability { taus, k } => {
            let report = stability_sweep(
                &cfg.problem,
                taus,
                cfg.t_horizon,
                cfg.n_cut,
                *k,
                cfg.seed,
                par,
            )?;
            let csv = output::stability_csv(&report, &meta(start.elapsed().as_secs_f64()));
            Ok((csv, None))
        }
    }
}
