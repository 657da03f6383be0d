//! Trace, summary, and comparison serialization.
//!
//! Floats are written with Rust's shortest round-trip formatting, so golden
//! files are stable and values re-parse exactly.

use npg_core::problems::ProblemSpec;
use npg_core::trace::{IterationRecord, RunResult, RunStatus};
use npg_core::{CompositeProblem, SolverConfig, StepInit, Variant};
use serde::Serialize;

pub const CSV_HEADER: &str = "iter,q,merit,gamma,backtracks,step_norm,residual,partition";

/// Renders a trace as CSV, one row per iteration. The partition column is 1
/// when the iteration belongs to the variant's named index set.
pub fn trace_to_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.k,
            r.q,
            r.merit,
            r.gamma,
            r.backtracks,
            r.step_norm,
            r.residual,
            u8::from(r.partition)
        ));
    }
    out
}

#[derive(Serialize)]
struct ProblemEcho<'a> {
    kind: &'a npg_core::problems::ProblemKind,
    seed: u64,
    m: usize,
    n: usize,
    lam: f64,
}

#[derive(Serialize)]
struct SolverEcho {
    variant: Variant,
    tau: f64,
    gamma_min: f64,
    gamma_max: f64,
    delta: f64,
    p_min: f64,
    m: usize,
    step_init: StepInit,
    tol: f64,
    max_iter: usize,
    mu: f64,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    status: RunStatus,
    iterations: usize,
    final_q: f64,
    final_residual: f64,
    wall_time_ms: u128,
    config: ConfigEcho<'a>,
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    problem: ProblemEcho<'a>,
    solver: SolverEcho,
}

/// JSON run summary echoing the fully resolved configuration, defaults
/// included.
pub fn summary_json(
    spec: &ProblemSpec,
    config: &SolverConfig,
    problem: &CompositeProblem,
    result: &RunResult,
) -> String {
    let doc = SummaryDoc {
        status: result.status,
        iterations: result.iterations(),
        final_q: problem.q(&result.x_final),
        final_residual: result.final_residual(),
        wall_time_ms: result.wall_time.as_millis(),
        config: ConfigEcho {
            problem: ProblemEcho {
                kind: &spec.kind,
                seed: spec.seed,
                m: spec.rows,
                n: spec.cols,
                lam: spec.lam,
            },
            solver: SolverEcho {
                variant: config.variant,
                tau: config.tau,
                gamma_min: config.gamma_min,
                gamma_max: config.gamma_max,
                delta: config.delta,
                p_min: config.p_min,
                m: config.m,
                step_init: config.step_init,
                tol: config.tol,
                max_iter: config.max_iter,
                mu: config.resolved_mu(),
            },
        },
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("summary serializes");
    json.push('\n');
    json
}

/// One comparison row per variant.
pub struct CompareRow {
    pub variant: Variant,
    pub iterations: usize,
    pub total_backtracks: usize,
    pub final_q: f64,
    pub final_residual: f64,
}

pub fn compare_table_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("variant,iterations,total_backtracks,final_q,final_residual\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.variant, r.iterations, r.total_backtracks, r.final_q, r.final_residual
        ));
    }
    out
}
