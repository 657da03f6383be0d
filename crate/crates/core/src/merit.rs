//! Merit-function engines: the scalar a trial iterate must undercut.

use crate::config::{SolverConfig, Variant};
use std::collections::VecDeque;

/// Either the weighted-average scalar `Φ_k` or the sliding window of recent
/// objective values whose maximum is `q(x^{l(k)})`.
#[derive(Clone, Debug, PartialEq)]
pub enum MeritState {
    Average {
        phi: f64,
    },
    MaxWindow {
        /// Objective values of the most recent iterates, oldest first;
        /// holds at most `m + 1` entries.
        recent_q: VecDeque<f64>,
        m: usize,
    },
}

impl MeritState {
    /// State at `k = 0`: `Φ_0 = q(x⁰)` or a one-element window.
    pub fn init(q0: f64, config: &SolverConfig) -> Self {
        assert!(q0.is_finite(), "merit initialization needs finite q(x0)");
        match config.variant {
            Variant::Average | Variant::Monotone => MeritState::Average { phi: q0 },
            Variant::Max => {
                let mut recent_q = VecDeque::with_capacity(config.m + 1);
                recent_q.push_back(q0);
                MeritState::MaxWindow {
                    recent_q,
                    m: config.m,
                }
            }
        }
    }

    /// The merit value used in the acceptance criterion: `Φ_k`, or the
    /// maximum over the window.
    pub fn value(&self) -> f64 {
        match self {
            MeritState::Average { phi } => *phi,
            MeritState::MaxWindow { recent_q, .. } => {
                recent_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Folds the accepted objective value in: `Φ' = (1 − p_k) Φ + p_k q`,
    /// or push `q` and evict the oldest entry once the window would exceed
    /// `m + 1` values. `p_k` is ignored by the window variant.
    pub fn update(&mut self, q_next: f64, p_k: f64) {
        match self {
            MeritState::Average { phi } => {
                *phi = (1.0 - p_k) * *phi + p_k * q_next;
            }
            MeritState::MaxWindow { recent_q, m } => {
                recent_q.push_back(q_next);
                if recent_q.len() > *m + 1 {
                    recent_q.pop_front();
                }
            }
        }
    }

    /// Window occupancy (1 for the average variant).
    pub fn len(&self) -> usize {
        match self {
            MeritState::Average { .. } => 1,
            MeritState::MaxWindow { recent_q, .. } => recent_q.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
