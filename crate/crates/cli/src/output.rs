//! CSV emission. Metadata lines all start with '#'; data rows are stable,
//! fixed-column, and byte-identical across runs with the same seed (wall
//! time lives only in the metadata).

use std::fmt::Write as _;

use spde_core::experiments::{ErrorTable, StabilityReport};

use crate::config::FileConfig;

pub struct Meta<'a> {
    pub config: &'a FileConfig,
    pub seed: u64,
    pub workers: Option<usize>,
    pub wall_time_s: f64,
}

fn header(meta: &Meta) -> String {
    let mut s = String::new();
    for line in meta.config.echo_lines() {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "# seed = {}", meta.seed);
    match meta.workers {
        Some(w) => {
            let _ = writeln!(s, "# workers = {w}");
        }
        None => {
            let _ = writeln!(s, "# workers = default");
        }
    }
    let _ = writeln!(s, "# wall_time_s = {:.3}", meta.wall_time_s);
    s
}

/// Convergence table CSV: `axis_kind,axis_value,K,rms_error,std_error`.
pub fn table_csv(table: &ErrorTable, meta: &Meta, expected_rate: f64) -> String {
    let mut s = header(meta);
    let _ = writeln!(s, "# reference = {}", table.reference);
    let _ = writeln!(s, "# expected_rate = {expected_rate}");
    match table.fit {
        Some(fit) => {
            let _ = writeln!(s, "# fitted_slope = {}", fit.slope);
            let _ = writeln!(s, "# fitted_intercept = {}", fit.intercept);
            let _ = writeln!(s, "# fitted_max_residual = {}", fit.max_residual);
            let _ = writeln!(s, "# fit_reliable = {}", fit.reliable());
            if fit.excluded_rows > 0 {
                let _ = writeln!(
                    s,
                    "# warning: {} row(s) at or below the error floor were excluded from the fit",
                    fit.excluded_rows
                );
            }
        }
        None => {
            let _ = writeln!(s, "# fitted_slope = none (fewer than 3 usable rows)");
        }
    }
    let _ = writeln!(s, "axis_kind,axis_value,K,rms_error,std_error");
    for row in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.16e},{:.16e}",
            table.axis, row.axis_value, row.samples, row.rms_error, row.std_error
        );
    }
    s
}

/// Single-trajectory CSV of L² norms over time: `step,time,l2_norm`.
pub fn single_run_csv(
    norm_sq: &[f64],
    tau: f64,
    stride: usize,
    meta: &Meta,
) -> String {
    let mut s = header(meta);
    let _ = writeln!(s, "step,time,l2_norm");
    let last = norm_sq.len() - 1;
    for (step, &nsq) in norm_sq.iter().enumerate() {
        if step % stride == 0 || step == last {
            let _ = writeln!(s, "{},{:.16e},{:.16e}", step, step as f64 * tau, nsq.sqrt());
        }
    }
    s
}

/// Stability sweep CSV: `tau,M,max_mean_norm_sq,bound,within_bound`.
pub fn stability_csv(report: &StabilityReport, meta: &Meta) -> String {
    let mut s = header(meta);
    let _ = writeln!(s, "# coercivity_constant = {}", report.coercivity);
    let _ = writeln!(s, "# lipschitz_constant = {}", report.lipschitz);
    let _ = writeln!(s, "# trace_q = {}", report.trace_q);
    let _ = writeln!(s, "tau,M,max_mean_norm_sq,bound,within_bound");
    for row in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{:.16e},{:.16e},{}",
            row.tau, row.m_steps, row.max_mean_norm_sq, row.bound, row.within_bound
        );
    }
    s
}
