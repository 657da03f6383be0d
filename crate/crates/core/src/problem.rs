//! Problem abstraction: a smooth term with gradient, a lower semicontinuous
//! regularizer with a proximal map, and a feasible start point.

use crate::vecmath;
use std::fmt;
use std::sync::Arc;

/// Errors raised while constructing or validating a problem instance.
#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("start point has nonfinite objective value q(x0) = {q0}")]
    NonFiniteStart { q0: f64 },
    #[error("start point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("l0 problems require dimension <= {max}, got {got}")]
    DimensionTooLarge { max: usize, got: usize },
    #[error("gradient check failed: max relative deviation {deviation:.3e} exceeds {tol:.3e}")]
    GradientCheck { deviation: f64, tol: f64 },
    #[error("{0}")]
    Invalid(String),
}

/// The continuously differentiable part `f` of the objective, with its
/// gradient. Both callbacks must be total: `f` is finite at every point of
/// the given dimension.
pub struct SmoothObjective {
    dimension: usize,
    value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    gradient: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl SmoothObjective {
    pub fn new(
        dimension: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        Self {
            dimension,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Evaluates `f(x)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dimension, "dimension mismatch in f(x)");
        (self.value)(x)
    }

    /// Evaluates `∇f(x)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dimension, "dimension mismatch in ∇f(x)");
        let g = (self.gradient)(x);
        assert_eq!(g.len(), self.dimension, "gradient has wrong dimension");
        g
    }

    /// Max relative deviation between the analytic gradient and central
    /// finite differences of `value` at `x`. Relative to `max(1, ‖∇f(x)‖)`.
    pub fn gradient_deviation(&self, x: &[f64]) -> f64 {
        let g = self.gradient(x);
        let mut fd = vec![0.0; x.len()];
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            let h = f64::EPSILON.powf(1.0 / 3.0) * x[i].abs().max(1.0);
            let xi = x[i];
            probe[i] = xi + h;
            let fp = self.value(&probe);
            probe[i] = xi - h;
            let fm = self.value(&probe);
            probe[i] = xi;
            fd[i] = (fp - fm) / (2.0 * h);
        }
        let denom = vecmath::norm(&g).max(1.0);
        vecmath::dist(&fd, &g) / denom
    }
}

impl fmt::Debug for SmoothObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothObjective")
            .field("dimension", &self.dimension)
            .finish_non_exhaustive()
    }
}

/// The lower semicontinuous part `g` of the objective. `value` may return
/// `f64::INFINITY` (extended-valued); `prox(v, w)` must return one global
/// minimizer of `w·g(x) + ½‖x − v‖²` and always land in `dom g`.
///
/// Every shipped regularizer is bounded below by the affine function `0`.
pub struct Regularizer {
    name: String,
    value: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    prox: Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>,
}

impl Regularizer {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        prox: impl Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            prox: Arc::new(prox),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Evaluates `g(x)`; `f64::INFINITY` means `x ∉ dom g`.
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    /// One global minimizer of `w·g(x) + ½‖x − v‖²` for `w > 0`.
    pub fn prox(&self, v: &[f64], w: f64) -> Vec<f64> {
        assert!(w > 0.0, "prox weight must be positive, got {w}");
        let y = (self.prox)(v, w);
        assert_eq!(y.len(), v.len(), "prox output has wrong dimension");
        y
    }
}

impl fmt::Debug for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Regularizer")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// A composite minimization instance `min q(x) = f(x) + g(x)` together with
/// a start point `x0 ∈ dom q`.
#[derive(Debug)]
pub struct CompositeProblem {
    pub smooth: SmoothObjective,
    pub reg: Regularizer,
    pub x0: Vec<f64>,
    /// Optional reference optimal value, used by diagnostics only.
    pub known_optimum: Option<f64>,
}

impl CompositeProblem {
    /// Builds a problem, enforcing that `x0` has the right dimension and a
    /// finite objective value.
    pub fn new(
        smooth: SmoothObjective,
        reg: Regularizer,
        x0: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        if x0.len() != smooth.dimension() {
            return Err(ProblemError::DimensionMismatch {
                expected: smooth.dimension(),
                got: x0.len(),
            });
        }
        let q0 = smooth.value(&x0) + reg.value(&x0);
        if !q0.is_finite() {
            return Err(ProblemError::NonFiniteStart { q0 });
        }
        Ok(Self {
            smooth,
            reg,
            x0,
            known_optimum: None,
        })
    }

    pub fn with_known_optimum(mut self, q_star: f64) -> Self {
        self.known_optimum = Some(q_star);
        self
    }

    pub fn dimension(&self) -> usize {
        self.smooth.dimension()
    }

    /// Evaluates `q(x) = f(x) + g(x)`.
    pub fn q(&self, x: &[f64]) -> f64 {
        evaluate_q(self, x)
    }
}

/// Evaluates the composite objective `q(x) = f(x) + g(x)`.
///
/// Returns `+∞` exactly when `g(x) = +∞` (the smooth part is everywhere
/// finite). Panics on dimension mismatch.
pub fn evaluate_q(problem: &CompositeProblem, x: &[f64]) -> f64 {
    assert_eq!(
        x.len(),
        problem.dimension(),
        "dimension mismatch in q(x): expected {}, got {}",
        problem.dimension(),
        x.len()
    );
    let g = problem.reg.value(x);
    if g == f64::INFINITY {
        return f64::INFINITY;
    }
    problem.smooth.value(x) + g
}
