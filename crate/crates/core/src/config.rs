//! Solver configuration and validation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Which merit rule drives the backtracking acceptance test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Weighted-average merit `Φ_{k+1} = (1 − p_k) Φ_k + p_k q(x^{k+1})`.
    Average,
    /// Sliding-window maximum over the `m + 1` most recent objective values.
    Max,
    /// Classical monotone method: the average loop with `p_k ≡ 1`.
    Monotone,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Average => write!(f, "average"),
            Variant::Max => write!(f, "max"),
            Variant::Monotone => write!(f, "monotone"),
        }
    }
}

/// How the trial step size `γ_k⁰ ∈ [γ_min, γ_max]` is chosen each iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepInit {
    /// `γ_k⁰ = γ_min` every iteration.
    Constant,
    /// Barzilai–Borwein spectral estimate `⟨s, y⟩ / ⟨s, s⟩` clamped to
    /// `[γ_min, γ_max]`, falling back to `γ_min` without usable history.
    BarzilaiBorwein,
}

/// Schedule producing the averaging weight `p_k ∈ [p_min, 1]`.
#[derive(Clone)]
pub enum PSchedule {
    /// `p_k = p_min` for every `k` (the default; keeps the nonmonotonicity
    /// level explicit and runs reproducible).
    Constant,
    /// User-supplied rule; values are clamped into `[p_min, 1]`.
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl fmt::Debug for PSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PSchedule::Constant => write!(f, "Constant"),
            PSchedule::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Choice of the partition constant μ used to flag iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuRule {
    /// Average/monotone: `μ = ½ δ p_min γ_min` (upper end of the admissible
    /// interval). Max: `μ = ½ δ γ_min` (strictly inside `(0, δ γ_min)`).
    Auto,
    /// Explicit value; must lie in the variant's admissible interval.
    Value(f64),
}

/// Configuration invalidity reasons.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("tau must be > 1, got {0}")]
    Tau(f64),
    #[error("step-size bounds must satisfy 0 < gamma_min <= gamma_max, got [{0}, {1}]")]
    GammaBounds(f64, f64),
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("p_min must be strictly greater than 4/5 (and <= 1), got {0}")]
    PMin(f64),
    #[error("tol must be positive, got {0}")]
    Tol(f64),
    #[error("max_iter must be positive")]
    MaxIter,
    #[error("mu must lie in {interval}, got {value}")]
    Mu { value: f64, interval: String },
}

/// All parameters of the backtracking drivers.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Step-size amplification factor, `> 1`.
    pub tau: f64,
    /// Lower bound for the trial step size, `> 0`.
    pub gamma_min: f64,
    /// Upper bound for the trial step size, `>= gamma_min`.
    pub gamma_max: f64,
    /// Sufficient-decrease factor in `(0, 1)`.
    pub delta: f64,
    /// Merit rule.
    pub variant: Variant,
    /// Lower bound for the averaging weights; must exceed 4/5 so the
    /// contraction constant `½ − √((1 − p_min)/p_min)` stays positive.
    pub p_min: f64,
    /// Rule producing `p_k` (average variant only).
    pub p_schedule: PSchedule,
    /// Window memory for the max variant: the merit is the maximum over the
    /// most recent `min(k, m) + 1` objective values.
    pub m: usize,
    /// Trial step-size initialization rule.
    pub step_init: StepInit,
    /// Termination threshold on the residual `γ_k ‖x^{k+1} − x^k‖`.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Partition constant for per-iteration index-set flags.
    pub mu_diag: MuRule,
    /// Backtracking trial cap per iteration; exceeding it aborts the run.
    pub backtrack_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: 2.0,
            gamma_min: 1e-8,
            gamma_max: 1e8,
            delta: 1e-4,
            variant: Variant::Average,
            p_min: 0.85,
            p_schedule: PSchedule::Constant,
            m: 5,
            step_init: StepInit::BarzilaiBorwein,
            tol: 1e-8,
            max_iter: 10_000,
            mu_diag: MuRule::Auto,
            backtrack_cap: 100,
        }
    }
}

impl SolverConfig {
    /// Checks every parameter constraint. `p_min = 4/5` is rejected even
    /// though it is the boundary of the admissible averaging range, because
    /// the contraction constant `½ − √((1 − p_min)/p_min)` vanishes there.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tau > 1.0) {
            return Err(ConfigError::Tau(self.tau));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min <= self.gamma_max) {
            return Err(ConfigError::GammaBounds(self.gamma_min, self.gamma_max));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::Delta(self.delta));
        }
        if !(self.p_min > 0.8 && self.p_min <= 1.0) {
            return Err(ConfigError::PMin(self.p_min));
        }
        if !(self.tol > 0.0) {
            return Err(ConfigError::Tol(self.tol));
        }
        if self.max_iter == 0 {
            return Err(ConfigError::MaxIter);
        }
        if let MuRule::Value(mu) = self.mu_diag {
            let (lo_open, hi, inclusive) = self.mu_interval();
            let ok = mu > lo_open && if inclusive { mu <= hi } else { mu < hi };
            if !ok {
                return Err(ConfigError::Mu {
                    value: mu,
                    interval: if inclusive {
                        format!("(0, {hi}]")
                    } else {
                        format!("(0, {hi})")
                    },
                });
            }
        }
        Ok(())
    }

    /// Averaging weight used at iteration `k`. The monotone variant pins
    /// `p_k = 1`; custom schedules are clamped into `[p_min, 1]`.
    pub fn p_value(&self, k: usize) -> f64 {
        match self.variant {
            Variant::Monotone => 1.0,
            _ => match &self.p_schedule {
                PSchedule::Constant => self.p_min,
                PSchedule::Custom(rule) => rule(k).clamp(self.p_min, 1.0),
            },
        }
    }

    /// Admissible μ interval for this variant as `(0, hi]` or `(0, hi)`.
    fn mu_interval(&self) -> (f64, f64, bool) {
        match self.variant {
            Variant::Average | Variant::Monotone => {
                (0.0, 0.5 * self.delta * self.p_min * self.gamma_min, true)
            }
            Variant::Max => (0.0, self.delta * self.gamma_min, false),
        }
    }

    /// The μ actually used for partition flags.
    pub fn resolved_mu(&self) -> f64 {
        match self.mu_diag {
            MuRule::Value(mu) => mu,
            MuRule::Auto => match self.variant {
                Variant::Average | Variant::Monotone => {
                    0.5 * self.delta * self.p_min * self.gamma_min
                }
                Variant::Max => 0.5 * self.delta * self.gamma_min,
            },
        }
    }
}
