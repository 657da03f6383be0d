//! The `run`, `compare`, and `rates` commands.

use crate::config_file::CliError;
use crate::output::{compare_table_csv, summary_json, trace_to_csv, CompareRow};
use npg_core::diagnostics::{estimate_rate, RateReport};
use npg_core::problems::{l0_bruteforce_oracle, L0Quadratic, ProblemKind, ProblemSpec};
use npg_core::trace::{RunResult, RunStatus};
use npg_core::{solve, CompositeProblem, SolverConfig, Variant};
use std::path::{Path, PathBuf};

/// Everything needed to execute one run.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub spec: ProblemSpec,
    pub config: SolverConfig,
    pub csv_path: Option<PathBuf>,
    pub json_path: Option<PathBuf>,
}

/// Exit code for a finished run: 0 converged, 2 iteration cap, 3 merit
/// stall. Front-end errors exit with 1.
pub fn status_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::Converged => 0,
        RunStatus::MaxIter => 2,
        RunStatus::MeritStall => 3,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn execute(plan: &RunPlan) -> Result<(CompositeProblem, RunResult), CliError> {
    let problem = plan.spec.build()?;
    let result = solve(&problem, &plan.config)?;
    Ok((problem, result))
}

/// Builds the problem, runs the configured variant, writes the CSV trace
/// and JSON summary when paths are given, and prints a one-line digest.
pub fn cmd_run(plan: &RunPlan) -> Result<u8, CliError> {
    let (problem, result) = execute(plan)?;
    if let Some(path) = &plan.csv_path {
        write_file(path, &trace_to_csv(&result.trace))?;
    }
    if let Some(path) = &plan.json_path {
        write_file(path, &summary_json(&plan.spec, &plan.config, &problem, &result))?;
    }
    println!(
        "status={:?} iterations={} final_q={:.12e} final_residual={:.6e} wall_time_ms={}",
        result.status,
        result.iterations(),
        problem.q(&result.x_final),
        result.final_residual(),
        result.wall_time.as_millis()
    );
    Ok(status_code(result.status))
}

/// Runs all three variants on the same problem with shared step-size
/// initialization and emits a comparison table. When the sweep includes the
/// degenerate settings `p_min = 1` and `m = 0`, the three traces are checked
/// for bitwise equality.
pub fn cmd_compare(plan: &RunPlan) -> Result<u8, CliError> {
    let problem = plan.spec.build()?;
    let variants = [Variant::Monotone, Variant::Average, Variant::Max];
    let mut rows = Vec::new();
    let mut csvs = Vec::new();
    let mut code = 0u8;
    for variant in variants {
        let config = SolverConfig {
            variant,
            ..plan.config.clone()
        };
        let result = solve(&problem, &config)?;
        rows.push(CompareRow {
            variant,
            iterations: result.iterations(),
            total_backtracks: result.trace.iter().map(|r| r.backtracks).sum(),
            final_q: problem.q(&result.x_final),
            final_residual: result.final_residual(),
        });
        code = code.max(status_code(result.status));
        csvs.push(trace_to_csv(&result.trace));
    }

    let table = compare_table_csv(&rows);
    match &plan.csv_path {
        Some(path) => write_file(path, &table)?,
        None => print!("{table}"),
    }

    if plan.config.p_min == 1.0 && plan.config.m == 0 {
        if csvs[0] == csvs[1] && csvs[1] == csvs[2] {
            println!("degeneracy equivalence: identical traces for p=1, m=0, monotone");
        } else {
            return Err(CliError::Other(
                "degeneracy equivalence violated: p=1, m=0, and monotone traces differ".into(),
            ));
        }
    }
    Ok(code)
}

/// Where the reference value `q*` for rate estimation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QStarSource {
    /// The problem's recorded optimal value.
    Known,
    /// The exhaustive support oracle (l0 problems only).
    Oracle,
    /// A high-accuracy monotone reference run (tol 1e-14, up to 1e6
    /// iterations) on the same problem.
    LongRun,
}

fn resolve_q_star(
    source: QStarSource,
    plan: &RunPlan,
    problem: &CompositeProblem,
) -> Result<f64, CliError> {
    match source {
        QStarSource::Known => problem.known_optimum.ok_or_else(|| {
            CliError::InvalidArgument(format!(
                "problem kind {:?} records no known optimum; use oracle or longrun",
                plan.spec.kind
            ))
        }),
        QStarSource::Oracle => match plan.spec.kind {
            ProblemKind::L0Quad => {
                let inst = L0Quadratic::ramp(plan.spec.cols, plan.spec.lam)?;
                Ok(l0_bruteforce_oracle(&inst).1)
            }
            other => Err(CliError::InvalidArgument(format!(
                "no brute-force oracle for problem kind {other:?}; use known or longrun"
            ))),
        },
        QStarSource::LongRun => {
            let config = SolverConfig {
                variant: Variant::Monotone,
                tol: 1e-14,
                max_iter: 1_000_000,
                ..plan.config.clone()
            };
            let reference = solve(problem, &config)?;
            Ok(problem.q(&reference.x_final))
        }
    }
}

/// Runs the configured variant, then classifies its merit convergence rate
/// against a reference value. Inconclusive classification still exits 0.
pub fn cmd_rates(plan: &RunPlan, source: QStarSource) -> Result<(u8, RateReport), CliError> {
    let (problem, result) = execute(plan)?;
    if result.trace.len() < 30 {
        return Err(CliError::TraceTooShort {
            len: result.trace.len(),
        });
    }
    let q_star = resolve_q_star(source, plan, &problem)?;
    let min_merit = result
        .trace
        .iter()
        .map(|r| r.merit)
        .fold(f64::INFINITY, f64::min);
    if q_star > min_merit + 1e-12 * q_star.abs().max(1.0) {
        return Err(CliError::Other(format!(
            "reference value q* = {q_star} exceeds the smallest observed merit {min_merit}; \
             the run found a better point than the reference"
        )));
    }
    let report = estimate_rate(&result.trace, q_star);
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    match &plan.json_path {
        Some(path) => write_file(path, &json)?,
        None => print!("{json}"),
    }
    Ok((0, report))
}
