//! Closed-form proximal operators and the linearized subproblem they solve.
//!
//! All prox maps here take the weight `w` of `min_x w·g(x) + ½‖x − v‖²`, so
//! the backtracking subproblem with curvature `γ` reduces to a single prox
//! call with `w = 1/γ`.

use crate::problem::Regularizer;

/// Soft thresholding: prox of `w‖·‖₁`, componentwise
/// `sign(v_i) · max(|v_i| − w, 0)`.
pub fn prox_l1(v: &[f64], w: f64) -> Vec<f64> {
    assert!(w > 0.0, "prox weight must be positive, got {w}");
    v.iter()
        .map(|&vi| vi.signum() * (vi.abs() - w).max(0.0))
        .collect()
}

/// Hard thresholding: prox of `w‖·‖₀`, keeping `v_i` when `v_i²/2 > w` and
/// zeroing it otherwise. The prox is set-valued at `v_i²/2 = w`; the tie is
/// resolved to `0`, giving a deterministic, idempotent selection.
pub fn prox_l0(v: &[f64], w: f64) -> Vec<f64> {
    assert!(w > 0.0, "prox weight must be positive, got {w}");
    v.iter()
        .map(|&vi| if 0.5 * vi * vi > w { vi } else { 0.0 })
        .collect()
}

/// Euclidean projection onto the box `[lo, hi]` (the prox of its indicator,
/// independent of the weight).
pub fn project_box(v: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    assert_eq!(v.len(), lo.len());
    assert_eq!(v.len(), hi.len());
    for i in 0..v.len() {
        assert!(
            lo[i] <= hi[i],
            "box bounds inverted at component {i}: lo = {}, hi = {}",
            lo[i],
            hi[i]
        );
    }
    v.iter()
        .enumerate()
        .map(|(i, &vi)| vi.clamp(lo[i], hi[i]))
        .collect()
}

/// Errors from the backtracking subproblem.
#[derive(Debug, thiserror::Error)]
pub enum SubproblemError {
    #[error("prox returned a nonfinite component at index {index}")]
    NonFinite { index: usize },
}

/// Solves the linearized subproblem
/// `min_y ⟨grad, y − x⟩ + γ/2 ‖y − x‖² + g(y)`
/// by one prox evaluation at `x − grad/γ` with weight `1/γ`.
pub fn subproblem_solve(
    x: &[f64],
    grad: &[f64],
    gamma: f64,
    reg: &Regularizer,
) -> Result<Vec<f64>, SubproblemError> {
    assert!(gamma > 0.0, "gamma must be positive, got {gamma}");
    assert_eq!(x.len(), grad.len());
    let v: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi - gi / gamma).collect();
    let y = reg.prox(&v, 1.0 / gamma);
    if let Some(index) = y.iter().position(|c| !c.is_finite()) {
        return Err(SubproblemError::NonFinite { index });
    }
    Ok(y)
}

impl Regularizer {
    /// `g(x) = λ‖x‖₁`, affinely minorized by 0. `λ = 0` degenerates to the
    /// identity prox.
    pub fn l1(lam: f64) -> Self {
        assert!(lam >= 0.0, "l1 weight must be nonnegative");
        Regularizer::new(
            "l1",
            move |x: &[f64]| lam * x.iter().map(|c| c.abs()).sum::<f64>(),
            move |v: &[f64], w: f64| {
                if lam == 0.0 {
                    v.to_vec()
                } else {
                    prox_l1(v, w * lam)
                }
            },
        )
    }

    /// `g(x) = λ‖x‖₀` (number of nonzeros), lower semicontinuous and
    /// affinely minorized by 0. `λ = 0` degenerates to the identity prox.
    pub fn l0(lam: f64) -> Self {
        assert!(lam >= 0.0, "l0 weight must be nonnegative");
        Regularizer::new(
            "l0",
            move |x: &[f64]| lam * x.iter().filter(|c| **c != 0.0).count() as f64,
            move |v: &[f64], w: f64| {
                if lam == 0.0 {
                    v.to_vec()
                } else {
                    prox_l0(v, w * lam)
                }
            },
        )
    }

    /// Indicator of the box `[lo, hi]`: 0 inside, `+∞` outside.
    pub fn box_indicator(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        for i in 0..lo.len() {
            assert!(lo[i] <= hi[i], "box bounds inverted at component {i}");
        }
        let (lo_v, hi_v) = (lo.clone(), hi.clone());
        Regularizer::new(
            "box",
            move |x: &[f64]| {
                let inside = x
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| c >= lo_v[i] && c <= hi_v[i]);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            },
            move |v: &[f64], _w: f64| project_box(v, &lo, &hi),
        )
    }

    /// `g ≡ 0` (smooth unconstrained minimization).
    pub fn zero() -> Self {
        Regularizer::new("zero", |_: &[f64]| 0.0, |v: &[f64], _w: f64| v.to_vec())
    }
}
