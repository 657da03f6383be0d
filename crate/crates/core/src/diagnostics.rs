//! Post-hoc trace analysis: index-set partitions, empirical convergence-rate
//! classification, and a stationarity certificate for final iterates.

use crate::config::{SolverConfig, Variant};
use crate::merit::MeritState;
use crate::problem::CompositeProblem;
use crate::trace::{IterationRecord, RateClass, RunResult};
use crate::vecmath;
use serde::Serialize;

/// Per-iteration index-set membership for a finished run.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    /// `in_set[k]` is true when iteration `k` belongs to the named set
    /// (`S` for the average merit, `K` for the max merit).
    pub in_set: Vec<bool>,
    pub set_count: usize,
    pub complement_count: usize,
    pub mu_used: f64,
}

impl PartitionReport {
    fn from_flags(in_set: Vec<bool>, mu_used: f64) -> Self {
        let set_count = in_set.iter().filter(|b| **b).count();
        let complement_count = in_set.len() - set_count;
        PartitionReport {
            in_set,
            set_count,
            complement_count,
            mu_used,
        }
    }
}

/// Empirical convergence-rate classification from the merit decay.
#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    /// Estimated KL exponent, when one is identifiable.
    pub theta_hat: Option<f64>,
    pub rate_class: RateClass,
    /// R² of the regression backing the classification.
    pub fit_quality: f64,
    pub q_star_used: f64,
}

/// Objective values along a run including the final iterate:
/// `q(x⁰), …, q(x^{K+1})`, length `trace.len() + 1`.
pub fn q_sequence(problem: &CompositeProblem, result: &RunResult) -> Vec<f64> {
    let mut qs: Vec<f64> = result.trace.iter().map(|r| r.q).collect();
    qs.push(problem.q(&result.x_final));
    qs
}

/// Merit values `merit_0, …, merit_{K+1}` replayed from the objective
/// sequence with the run's own update rule, length `q_values.len()`.
/// Entries `0..=K` agree bitwise with the trace's merit column.
pub fn merit_sequence(config: &SolverConfig, q_values: &[f64]) -> Vec<f64> {
    assert!(!q_values.is_empty());
    let mut state = MeritState::init(q_values[0], config);
    let mut merits = Vec::with_capacity(q_values.len());
    merits.push(state.value());
    for (k, &q_next) in q_values.iter().enumerate().skip(1) {
        state.update(q_next, config.p_value(k - 1));
        merits.push(state.value());
    }
    merits
}

/// Flags each iteration of an average-variant run with its membership in
/// `S = {k : q(x^k) − Φ_{k+1} ≤ μ/2 ‖x^{k+1} − x^k‖²}` (ties fall in `S`).
///
/// `q_values` and `merits` must have length `trace.len() + 1` (see
/// [`q_sequence`] and [`merit_sequence`]); `mu` must lie in the admissible
/// interval `(0, ½ δ p_min γ_min]` of the run's configuration.
pub fn partition_average(
    trace: &[IterationRecord],
    q_values: &[f64],
    merits: &[f64],
    mu: f64,
    config: &SolverConfig,
) -> PartitionReport {
    assert!(
        matches!(config.variant, Variant::Average | Variant::Monotone),
        "partition_average requires an average or monotone run"
    );
    let bound = 0.5 * config.delta * config.p_min * config.gamma_min;
    assert!(
        mu > 0.0 && mu <= bound,
        "mu must lie in (0, {bound}], got {mu}"
    );
    assert_eq!(q_values.len(), trace.len() + 1);
    assert_eq!(merits.len(), trace.len() + 1);
    let in_set = trace
        .iter()
        .enumerate()
        .map(|(k, r)| q_values[k] - merits[k + 1] <= 0.5 * mu * r.step_norm * r.step_norm)
        .collect();
    PartitionReport::from_flags(in_set, mu)
}

/// Flags each iteration of a max-variant run with its membership in
/// `K = {k : q(x^{l(k+1)}) − q(x^{k+1}) > μ/2 ‖x^{k+1} − x^k‖²}` (strict).
///
/// `window_merits[k] = q(x^{l(k)})` must include the post-run entry, length
/// `trace.len() + 1`; `mu` must lie in `(0, δ γ_min)`.
pub fn partition_max(
    trace: &[IterationRecord],
    q_values: &[f64],
    window_merits: &[f64],
    mu: f64,
    config: &SolverConfig,
) -> PartitionReport {
    assert!(
        matches!(config.variant, Variant::Max),
        "partition_max requires a max-variant run"
    );
    let bound = config.delta * config.gamma_min;
    assert!(
        mu > 0.0 && mu < bound,
        "mu must lie in (0, {bound}), got {mu}"
    );
    assert_eq!(q_values.len(), trace.len() + 1);
    assert_eq!(window_merits.len(), trace.len() + 1);
    let in_set = trace
        .iter()
        .enumerate()
        .map(|(k, r)| {
            window_merits[k + 1] - q_values[k + 1] > 0.5 * mu * r.step_norm * r.step_norm
        })
        .collect();
    PartitionReport::from_flags(in_set, mu)
}

/// Least-squares line fit returning `(slope, r_squared)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 || syy == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    (slope, (sxy * sxy) / (sxx * syy))
}

/// Minimum usable points after discarding resolution-limited errors.
const MIN_FIT_POINTS: usize = 8;
/// R² gate for accepting a regression model.
const FIT_GATE: f64 = 0.98;

/// Classifies the merit decay of a run against the power-form rate taxonomy.
///
/// Uses `e_k = merit_k − q_star` over the last half of the trace, discarding
/// entries at or below the double-precision resolution floor
/// `1e-14 · max(1, |q_star|)`. If every tail entry sits at the floor the run
/// reached its limit in finitely many steps. Otherwise both a geometric
/// model (`log e` vs `k`) and a power model (`log e` vs `log k`) are fitted;
/// the better-fitting model above the R² gate decides between Q-linear
/// (reported exponent ½, the class floor) and sublinear decay, where the
/// power slope `−β` maps back to the exponent via `θ = (β − 1)/(2β)`.
///
/// Panics when the trace is shorter than 30 rows or `q_star` exceeds the
/// smallest recorded merit (beyond rounding): both are contract violations.
pub fn estimate_rate(trace: &[IterationRecord], q_star: f64) -> RateReport {
    assert!(
        trace.len() >= 30,
        "rate estimation needs a trace of length >= 30, got {}",
        trace.len()
    );
    let scale = q_star.abs().max(1.0);
    let min_merit = trace.iter().map(|r| r.merit).fold(f64::INFINITY, f64::min);
    assert!(
        q_star <= min_merit + 1e-12 * scale,
        "q_star = {q_star} exceeds the smallest recorded merit {min_merit}"
    );

    let floor = 1e-14 * scale;
    let tail = &trace[trace.len() / 2..];
    if tail.iter().all(|r| r.merit - q_star <= floor) {
        return RateReport {
            theta_hat: Some(1.0),
            rate_class: RateClass::Finite,
            fit_quality: 1.0,
            q_star_used: q_star,
        };
    }

    let points: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.merit - q_star > floor)
        .map(|r| (r.k as f64, (r.merit - q_star).ln()))
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return RateReport {
            theta_hat: None,
            rate_class: RateClass::Inconclusive,
            fit_quality: 0.0,
            q_star_used: q_star,
        };
    }

    let ks: Vec<f64> = points.iter().map(|p| p.0).collect();
    let log_ks: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let log_es: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope_geo, r2_geo) = linear_fit(&ks, &log_es);
    let (slope_pow, r2_pow) = linear_fit(&log_ks, &log_es);

    let geometric_ok = slope_geo < 0.0 && r2_geo >= FIT_GATE;
    let power_ok = slope_pow < 0.0 && r2_pow >= FIT_GATE;

    if geometric_ok && (!power_ok || r2_geo >= r2_pow) {
        RateReport {
            theta_hat: Some(0.5),
            rate_class: RateClass::QLinear,
            fit_quality: r2_geo,
            q_star_used: q_star,
        }
    } else if power_ok {
        let beta = -slope_pow;
        RateReport {
            theta_hat: (beta > 1.0).then(|| (beta - 1.0) / (2.0 * beta)),
            rate_class: RateClass::Sublinear,
            fit_quality: r2_pow,
            q_star_used: q_star,
        }
    } else {
        RateReport {
            theta_hat: None,
            rate_class: RateClass::Inconclusive,
            fit_quality: r2_geo.max(r2_pow),
            q_star_used: q_star,
        }
    }
}

/// Prox fixed-point residual `‖prox_g(x − ∇f(x), 1) − x‖`; zero certifies
/// stationarity of `x` under the problem's prox selection.
pub fn stationarity_check(problem: &CompositeProblem, x: &[f64]) -> f64 {
    let grad = problem.smooth.gradient(x);
    let v = vecmath::sub(x, &grad);
    let y = problem.reg.prox(&v, 1.0);
    vecmath::dist(&y, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{SolverConfig, StepInit};
    use crate::problem::{Regularizer, SmoothObjective};
    use crate::problems::make_box_rosenbrock;
    use crate::solver::{npg_average, npg_max};
    use crate::trace::RunStatus;

    fn row(k: usize, q: f64, merit: f64, step_norm: f64) -> IterationRecord {
        IterationRecord {
            k,
            q,
            merit,
            gamma: 1.0,
            backtracks: 0,
            step_norm,
            residual: step_norm,
            partition: false,
        }
    }

    fn avg_config() -> SolverConfig {
        SolverConfig {
            delta: 0.5,
            p_min: 1.0,
            gamma_min: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn average_membership_follows_inequality() {
        // μ/2·step² = 0.002 against gaps 0.001 (in S) and 0.003 (not)
        let cfg = avg_config();
        let mu = 0.1;
        let trace = vec![row(0, 1.001, 1.1, 0.2), row(1, 1.003, 1.0, 0.2)];
        let q_values = vec![1.001, 1.003, 0.9];
        let merits = vec![1.1, 1.0, 1.0];
        let report = partition_average(&trace, &q_values, &merits, mu, &cfg);
        assert_eq!(report.in_set, vec![true, false]);
        assert_eq!(report.set_count, 1);
        assert_eq!(report.complement_count, 1);
        assert_eq!(report.set_count + report.complement_count, trace.len());
        assert_eq!(report.mu_used, mu);
    }

    #[test]
    fn monotone_run_sits_in_complement_until_zero_step() {
        // p ≡ 1 on the 1-D quadratic: the single proper step overshoots the
        // μ-threshold, the zero-step tail row lands in S
        let p = CompositeProblem::new(
            SmoothObjective::new(1, |x| 0.5 * x[0] * x[0], |x| vec![x[0]]),
            Regularizer::zero(),
            vec![1.0],
        )
        .unwrap();
        let cfg = SolverConfig {
            step_init: StepInit::Constant,
            tol: 1e-10,
            ..avg_config()
        };
        let result = npg_average(&p, &cfg).unwrap();
        assert_eq!(result.status, RunStatus::Converged);
        let q_values = q_sequence(&p, &result);
        let merits = merit_sequence(&cfg, &q_values);
        // replayed merits agree with the recorded column
        for (k, r) in result.trace.iter().enumerate() {
            assert_eq!(merits[k], r.merit);
        }
        let report =
            partition_average(&result.trace, &q_values, &merits, cfg.resolved_mu(), &cfg);
        assert_eq!(report.in_set, vec![false, true]);
        // the solver recorded the same flags inline
        let inline: Vec<bool> = result.trace.iter().map(|r| r.partition).collect();
        assert_eq!(report.in_set, inline);
    }

    #[test]
    fn max_membership_follows_strict_inequality() {
        let cfg = SolverConfig {
            variant: Variant::Max,
            delta: 0.5,
            gamma_min: 1.0,
            ..Default::default()
        };
        let mu = 0.25;
        // rhs = μ/2·step² = 0.125 with step 1 (dyadic, so exact); gaps are
        // 0.5 (in K) and exactly 0.125 (tie, excluded by strictness)
        let trace = vec![row(0, 2.5, 2.5, 1.0), row(1, 2.0, 2.5, 1.0)];
        let q_values = vec![2.5, 2.0, 2.0];
        let window_merits = vec![2.5, 2.5, 2.125];
        let report = partition_max(&trace, &q_values, &window_merits, mu, &cfg);
        assert_eq!(report.in_set, vec![true, false]);
    }

    #[test]
    fn max_with_zero_memory_never_enters_k() {
        let p = CompositeProblem::new(
            SmoothObjective::new(1, |x| 0.5 * x[0] * x[0], |x| vec![x[0]]),
            Regularizer::zero(),
            vec![1.0],
        )
        .unwrap();
        let cfg = SolverConfig {
            variant: Variant::Max,
            m: 0,
            step_init: StepInit::Constant,
            delta: 0.5,
            gamma_min: 1.0,
            tol: 1e-10,
            ..Default::default()
        };
        let result = npg_max(&p, &cfg).unwrap();
        let q_values = q_sequence(&p, &result);
        let merits = merit_sequence(&cfg, &q_values);
        let report = partition_max(&result.trace, &q_values, &merits, cfg.resolved_mu(), &cfg);
        assert!(report.in_set.iter().all(|flag| !flag));
        assert_eq!(report.complement_count, result.trace.len());
    }

    #[test]
    #[should_panic(expected = "mu must lie in")]
    fn average_partition_rejects_mu_out_of_range() {
        let cfg = avg_config();
        let trace = vec![row(0, 1.0, 1.0, 0.1)];
        partition_average(&trace, &[1.0, 0.9], &[1.0, 0.9], 0.5, &cfg);
    }

    fn synthetic_trace(len: usize, merit_at: impl Fn(usize) -> f64) -> Vec<IterationRecord> {
        (0..len).map(|k| row(k, merit_at(k), merit_at(k), 0.1)).collect()
    }

    #[test]
    fn geometric_decay_classified_q_linear() {
        let trace = synthetic_trace(60, |k| 0.5f64.powi(k as i32));
        let report = estimate_rate(&trace, 0.0);
        assert_eq!(report.rate_class, RateClass::QLinear);
        assert_eq!(report.theta_hat, Some(0.5));
        assert!(report.fit_quality >= 0.999);
    }

    #[test]
    fn power_decay_classified_sublinear_with_recovered_exponent() {
        // e_k = k^{-2}: row 0 carries a large sentinel value outside the tail
        let trace = synthetic_trace(61, |k| {
            if k == 0 {
                2.0
            } else {
                (k as f64).powi(-2)
            }
        });
        let report = estimate_rate(&trace, 0.0);
        assert_eq!(report.rate_class, RateClass::Sublinear);
        let theta = report.theta_hat.unwrap();
        let beta = 1.0 / (1.0 - 2.0 * theta);
        assert!((beta - 2.0).abs() <= 0.05, "beta = {beta}");
        assert!((theta - 0.25).abs() <= 0.01, "theta = {theta}");
    }

    #[test]
    fn exactly_converged_tail_classified_finite() {
        let trace = synthetic_trace(40, |k| if k < 10 { 1.0 / (k + 1) as f64 } else { 0.0 });
        let report = estimate_rate(&trace, 0.0);
        assert_eq!(report.rate_class, RateClass::Finite);
        assert_eq!(report.theta_hat, Some(1.0));
    }

    #[test]
    fn noise_classified_inconclusive() {
        // deterministic bounded wiggle that fits neither model
        let trace = synthetic_trace(60, |k| 1.0 + 0.1 * ((k as f64 * 12.9898).sin()).abs());
        let report = estimate_rate(&trace, 0.0);
        assert_eq!(report.rate_class, RateClass::Inconclusive);
        assert!(report.theta_hat.is_none());
    }

    #[test]
    #[should_panic(expected = "length >= 30")]
    fn rate_estimation_rejects_short_traces() {
        let trace = synthetic_trace(29, |k| 0.5f64.powi(k as i32));
        estimate_rate(&trace, 0.0);
    }

    #[test]
    #[should_panic(expected = "exceeds the smallest recorded merit")]
    fn rate_estimation_rejects_q_star_above_merits() {
        let trace = synthetic_trace(40, |k| 0.5f64.powi(k as i32));
        estimate_rate(&trace, 10.0);
    }

    #[test]
    fn stationarity_zero_at_quadratic_minimizer() {
        let p = CompositeProblem::new(
            SmoothObjective::new(1, |x| 0.5 * x[0] * x[0], |x| vec![x[0]]),
            Regularizer::zero(),
            vec![1.0],
        )
        .unwrap();
        assert_eq!(stationarity_check(&p, &[0.0]), 0.0);
    }

    #[test]
    fn stationarity_zero_at_rosenbrock_minimum() {
        let p = make_box_rosenbrock();
        assert_eq!(stationarity_check(&p, &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn stationarity_positive_away_from_minimizers() {
        let p = make_box_rosenbrock();
        assert!(stationarity_check(&p, &[-1.2, 1.0]) > 1.0);
    }
}
