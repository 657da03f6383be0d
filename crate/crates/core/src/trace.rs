//! Per-iteration telemetry and run results.

use serde::{Deserialize, Serialize};
use std::time::Duration;

/// One row of solver telemetry, describing the step from `x^k` to `x^{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    /// Iteration index `k`.
    pub k: usize,
    /// Objective value `q(x^k)` before the step.
    pub q: f64,
    /// Merit value used in the acceptance test: `Φ_k` or `q(x^{l(k)})`.
    pub merit: f64,
    /// Accepted step size `γ_k = τ^{i_k} γ_k⁰`.
    pub gamma: f64,
    /// Number of rejected trials `i_k`.
    pub backtracks: usize,
    /// `‖x^{k+1} − x^k‖`.
    pub step_norm: f64,
    /// Residual surrogate `γ_k ‖x^{k+1} − x^k‖`.
    pub residual: f64,
    /// Whether `k` belongs to the variant's named index set: `S` for the
    /// average/monotone merit, `K` for the max merit.
    pub partition: bool,
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Residual `γ_k ‖x^{k+1} − x^k‖` fell to the tolerance.
    Converged,
    /// Iteration cap reached.
    MaxIter,
    /// Merit stopped decreasing for 50 consecutive iterations while the
    /// residual stayed above the tolerance.
    MeritStall,
}

/// Outcome of one solver run.
#[derive(Debug)]
pub struct RunResult {
    pub x_final: Vec<f64>,
    pub status: RunStatus,
    pub trace: Vec<IterationRecord>,
    pub wall_time: Duration,
}

impl RunResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().map_or(f64::INFINITY, |r| r.residual)
    }
}

/// Convergence-rate classes induced by the power-form desingularization
/// `χ(t) = κ t^θ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateClass {
    /// `θ = 1`: merit reaches its limit in finitely many steps.
    Finite,
    /// `θ ∈ [½, 1)`: merit converges Q-linearly.
    QLinear,
    /// `θ ∈ (0, ½)`: merit decays like `k^{−1/(1−2θ)}`.
    Sublinear,
    /// Estimation could not decide (empirical classification only).
    Inconclusive,
}

/// Power-form desingularization parameters `χ(t) = κ t^θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateModel {
    pub kappa: f64,
    pub theta: f64,
}

impl RateModel {
    pub fn new(kappa: f64, theta: f64) -> Self {
        assert!(kappa > 0.0, "kappa must be positive, got {kappa}");
        assert!(
            theta > 0.0 && theta <= 1.0,
            "theta must lie in (0, 1], got {theta}"
        );
        Self { kappa, theta }
    }

    /// The rate class dictated by the exponent θ.
    pub fn rate_class(&self) -> RateClass {
        if self.theta == 1.0 {
            RateClass::Finite
        } else if self.theta >= 0.5 {
            RateClass::QLinear
        } else {
            RateClass::Sublinear
        }
    }
}
