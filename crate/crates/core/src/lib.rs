//! Solvers for composite minimization `q(x) = f(x) + g(x)` where `f` is
//! continuously differentiable (gradient only locally Lipschitz) and `g` is
//! merely lower semicontinuous, possibly extended-valued.
//!
//! Two nonmonotone proximal gradient variants are provided, differing in the
//! merit value that a trial iterate must undercut during backtracking:
//!
//! * [`solver::npg_average`] — the merit is a weighted average
//!   `Φ_{k+1} = (1 − p_k) Φ_k + p_k q(x^{k+1})` of past objective values
//!   (Zhang–Hager style),
//! * [`solver::npg_max`] — the merit is the maximum objective value over a
//!   sliding window of the `m + 1` most recent iterates (Grippo style).
//!
//! Setting `p ≡ 1` or `m = 0` degenerates both into the classical monotone
//! proximal gradient method; all three share a single driver so degenerate
//! runs produce bitwise-identical traces.
//!
//! The [`diagnostics`] module post-processes run traces: it partitions
//! iterations into the sufficient-decrease index sets used by the convergence
//! theory, estimates the Kurdyka–Łojasiewicz exponent from the merit decay,
//! and certifies stationarity of the final iterate via a prox fixed-point
//! residual. The [`problems`] module ships deterministic, seedable test
//! problems (including one whose gradient is locally but not globally
//! Lipschitz) together with brute-force oracles.

pub mod config;
pub mod diagnostics;
pub mod merit;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod solver;
pub mod trace;
pub mod vecmath;

pub use config::{ConfigError, MuRule, PSchedule, SolverConfig, StepInit, Variant};
pub use merit::MeritState;
pub use problem::{evaluate_q, CompositeProblem, ProblemError, Regularizer, SmoothObjective};
pub use solver::{npg_average, npg_max, solve, BacktrackOutcome, SolverError};
pub use trace::{IterationRecord, RateClass, RateModel, RunResult, RunStatus};
