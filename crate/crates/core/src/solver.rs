//! Backtracking drivers for both merit rules.
//!
//! A single driver implements the loop; the variants differ only through the
//! [`MeritState`] they carry. This is what makes the degenerate settings
//! (`p ≡ 1`, `m = 0`, monotone) produce bitwise-identical traces.

use crate::config::{SolverConfig, StepInit, Variant};
use crate::merit::MeritState;
use crate::problem::{evaluate_q, CompositeProblem};
use crate::prox::{subproblem_solve, SubproblemError};
use crate::trace::{IterationRecord, RunResult, RunStatus};
use crate::vecmath;
use std::time::Instant;

/// Iterations of no merit progress before the run is declared stalled.
const STALL_LIMIT: usize = 50;

/// Failures during a solver run.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("start point has nonfinite objective value q(x0) = {q0}")]
    NonFiniteStart { q0: f64 },
    #[error(
        "backtracking gave up at iteration {iteration} after {cap} trials \
         (gamma reached {gamma:.3e}); the regularizer may violate the \
         affine-minorant assumption"
    )]
    BacktrackExhausted {
        iteration: usize,
        cap: usize,
        gamma: f64,
    },
    #[error("at iteration {iteration}: {source}")]
    Subproblem {
        iteration: usize,
        #[source]
        source: SubproblemError,
    },
}

/// Result of one backtracking sweep: the accepted candidate and the step
/// size that produced it.
#[derive(Clone, Debug)]
pub struct BacktrackOutcome {
    pub x_next: Vec<f64>,
    /// `γ_k = τ^backtracks · γ_k⁰`.
    pub gamma_accepted: f64,
    /// Terminal trial index `i_k`.
    pub backtracks: usize,
    /// `q(x_next)`, evaluated once and reused for the merit update so the
    /// acceptance certificate and the merit see the same value.
    pub q_next: f64,
}

/// Iterate/gradient pair history for spectral step-size estimation.
#[derive(Clone, Copy)]
pub struct StepHistory<'a> {
    pub x_prev: &'a [f64],
    pub grad_prev: &'a [f64],
    pub x: &'a [f64],
    pub grad: &'a [f64],
}

/// Chooses the trial step size `γ_k⁰ ∈ [γ_min, γ_max]`.
///
/// The constant rule returns `γ_min`. The Barzilai–Borwein rule returns
/// `clamp(⟨s, y⟩ / ⟨s, s⟩, γ_min, γ_max)` with `s = x^k − x^{k−1}` and
/// `y = ∇f(x^k) − ∇f(x^{k−1})`, falling back to `γ_min` when there is no
/// history, `⟨s, s⟩ = 0`, or `⟨s, y⟩ ≤ 0`.
pub fn initial_stepsize(history: Option<StepHistory>, config: &SolverConfig) -> f64 {
    match config.step_init {
        StepInit::Constant => config.gamma_min,
        StepInit::BarzilaiBorwein => {
            let Some(h) = history else {
                return config.gamma_min;
            };
            let s = vecmath::sub(h.x, h.x_prev);
            let y = vecmath::sub(h.grad, h.grad_prev);
            let ss = vecmath::dot(&s, &s);
            let sy = vecmath::dot(&s, &y);
            if ss == 0.0 || sy <= 0.0 {
                return config.gamma_min;
            }
            (sy / ss).clamp(config.gamma_min, config.gamma_max)
        }
    }
}

/// Runs the backtracking sweep from `x` against the given merit value:
/// for `i = 0, 1, 2, …` solves the subproblem with `γ = τ^i γ⁰` and accepts
/// the first candidate with
/// `q(candidate) ≤ merit − δ τ^i γ⁰ / 2 · ‖candidate − x‖²`.
///
/// A nonfinite `q(candidate)` is never accepted. Exceeding the trial cap
/// aborts with a diagnostic.
pub fn backtrack(
    x: &[f64],
    grad: &[f64],
    merit: f64,
    gamma0: f64,
    problem: &CompositeProblem,
    config: &SolverConfig,
) -> Result<BacktrackOutcome, SolverError> {
    debug_assert!(gamma0 >= config.gamma_min && gamma0 <= config.gamma_max);
    let mut gamma = gamma0;
    for i in 0..=config.backtrack_cap {
        gamma = config.tau.powi(i as i32) * gamma0;
        let candidate =
            subproblem_solve(x, grad, gamma, &problem.reg).map_err(|source| {
                SolverError::Subproblem {
                    iteration: 0,
                    source,
                }
            })?;
        let q_cand = evaluate_q(problem, &candidate);
        let decrease = 0.5 * config.delta * gamma * vecmath::dist_sq(&candidate, x);
        if q_cand <= merit - decrease {
            return Ok(BacktrackOutcome {
                x_next: candidate,
                gamma_accepted: gamma,
                backtracks: i,
                q_next: q_cand,
            });
        }
    }
    Err(SolverError::BacktrackExhausted {
        iteration: 0,
        cap: config.backtrack_cap,
        gamma,
    })
}

/// Residual surrogate `γ_k · ‖x^{k+1} − x^k‖`; the computable driver of the
/// subgradient distance bound
/// `dist(0, ∂q(x^{k+1})) ≤ (γ̄_ρ + L_ρ) ‖x^{k+1} − x^k‖`.
pub fn residual(gamma_k: f64, step_norm: f64) -> f64 {
    debug_assert!(gamma_k >= 0.0 && step_norm >= 0.0);
    gamma_k * step_norm
}

/// Nonmonotone proximal gradient method with the average merit
/// `Φ_{k+1} = (1 − p_k) Φ_k + p_k q(x^{k+1})`. Also runs the monotone
/// variant, which is the same loop with `p_k ≡ 1`.
pub fn npg_average(
    problem: &CompositeProblem,
    config: &SolverConfig,
) -> Result<RunResult, SolverError> {
    assert!(
        matches!(config.variant, Variant::Average | Variant::Monotone),
        "npg_average requires the average or monotone variant"
    );
    run_loop(problem, config)
}

/// Nonmonotone proximal gradient method with the max merit
/// `q(x^{l(k)}) = max_{j=0..min(k,m)} q(x^{k−j})`. With `m = 0` this
/// reproduces the monotone method exactly.
pub fn npg_max(problem: &CompositeProblem, config: &SolverConfig) -> Result<RunResult, SolverError> {
    assert!(
        matches!(config.variant, Variant::Max),
        "npg_max requires the max variant"
    );
    run_loop(problem, config)
}

/// Dispatches on `config.variant`.
pub fn solve(problem: &CompositeProblem, config: &SolverConfig) -> Result<RunResult, SolverError> {
    match config.variant {
        Variant::Average | Variant::Monotone => npg_average(problem, config),
        Variant::Max => npg_max(problem, config),
    }
}

/// The shared driver. Every iteration:
/// choose `γ_k⁰`, backtrack against the current merit value, update the
/// merit, record telemetry, then stop once the residual reaches the
/// tolerance (status `Converged`), the iteration cap is hit (`MaxIter`), or
/// the merit makes no progress for [`STALL_LIMIT`] iterations (`MeritStall`).
fn run_loop(problem: &CompositeProblem, config: &SolverConfig) -> Result<RunResult, SolverError> {
    config.validate()?;
    let started = Instant::now();

    let q0 = evaluate_q(problem, &problem.x0);
    if !q0.is_finite() {
        return Err(SolverError::NonFiniteStart { q0 });
    }
    let scale = q0.abs().max(1.0);
    let check_tol = 1e-12 * scale;
    let mu = config.resolved_mu();

    let mut merit = MeritState::init(q0, config);
    let mut x = problem.x0.clone();
    let mut q_x = q0;
    let mut grad = problem.smooth.gradient(&x);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut stall = 0usize;
    let mut status = RunStatus::MaxIter;

    for k in 0..config.max_iter {
        let gamma0 = initial_stepsize(
            prev.as_ref().map(|(x_prev, grad_prev)| StepHistory {
                x_prev,
                grad_prev,
                x: &x,
                grad: &grad,
            }),
            config,
        );
        let merit_k = merit.value();
        let out = backtrack(&x, &grad, merit_k, gamma0, problem, config).map_err(|e| match e {
            SolverError::BacktrackExhausted { cap, gamma, .. } => {
                SolverError::BacktrackExhausted {
                    iteration: k,
                    cap,
                    gamma,
                }
            }
            SolverError::Subproblem { source, .. } => SolverError::Subproblem {
                iteration: k,
                source,
            },
            other => other,
        })?;

        let step_norm = vecmath::dist(&out.x_next, &x);
        let res = residual(out.gamma_accepted, step_norm);

        // Acceptance certificate (machine check of the line-search criterion).
        assert!(
            out.q_next
                <= merit_k - 0.5 * config.delta * out.gamma_accepted * step_norm * step_norm
                    + check_tol,
            "acceptance certificate violated at k = {k}"
        );
        // Sublevel containment: q(x^{k+1}) <= q(x^0).
        assert!(
            out.q_next <= q0 + check_tol,
            "iterate left the initial sublevel set at k = {k}"
        );

        let p_k = config.p_value(k);
        merit.update(out.q_next, p_k);
        let merit_next = merit.value();

        // Merit monotonicity (both variants).
        assert!(
            merit_next <= merit_k + check_tol,
            "merit increased at k = {k}: {merit_k} -> {merit_next}"
        );
        // Average variant: two-sided sandwich around the new merit value,
        // which also certifies merit >= q at the new iterate.
        if matches!(config.variant, Variant::Average | Variant::Monotone) {
            let d = 0.5 * config.delta * out.gamma_accepted * step_norm * step_norm;
            assert!(
                out.q_next + (1.0 - p_k) * d <= merit_next + check_tol,
                "merit sandwich lower bound violated at k = {k}"
            );
            assert!(
                merit_next <= merit_k - p_k * d + check_tol,
                "merit sandwich upper bound violated at k = {k}"
            );
        }
        debug_assert!(merit.len() <= config.m + 1);

        // Index-set flag: S-membership for the average merit, K-membership
        // for the max merit.
        let half_mu_step = 0.5 * mu * step_norm * step_norm;
        let partition = match config.variant {
            Variant::Average | Variant::Monotone => q_x - merit_next <= half_mu_step,
            Variant::Max => merit_next - out.q_next > half_mu_step,
        };

        trace.push(IterationRecord {
            k,
            q: q_x,
            merit: merit_k,
            gamma: out.gamma_accepted,
            backtracks: out.backtracks,
            step_norm,
            residual: res,
            partition,
        });

        let made_progress = merit_k - merit_next > 1e-15 * scale;
        prev = Some((std::mem::replace(&mut x, out.x_next), std::mem::take(&mut grad)));
        q_x = out.q_next;

        if res <= config.tol {
            status = RunStatus::Converged;
            break;
        }
        if made_progress {
            stall = 0;
        } else {
            stall += 1;
            if stall >= STALL_LIMIT {
                status = RunStatus::MeritStall;
                break;
            }
        }
        grad = problem.smooth.gradient(&x);
    }

    Ok(RunResult {
        x_final: x,
        status,
        trace,
        wall_time: started.elapsed(),
    })
}
