//! Deterministic, seedable test problems and brute-force oracles.
//!
//! Problem data is generated by SplitMix64 with normals via Box–Muller, so
//! identical specs produce bitwise-identical data on every platform and in
//! every host language that reimplements the same pipeline.

use crate::problem::{CompositeProblem, ProblemError, Regularizer, SmoothObjective};
use serde::{Deserialize, Serialize};

/// Largest dimension for which the l0 oracle enumerates all supports.
pub const L0_ORACLE_MAX_DIM: usize = 12;

/// SplitMix64 generator (Vigna): 64-bit state, fixed increment, two-round
/// finalizer. Trivially portable.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }
}

/// Standard normals via Box–Muller over consecutive 53-bit uniforms. Pairs
/// are consumed in order; the sine mate is cached.
#[derive(Clone, Debug)]
pub struct NormalSource {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            spare: None,
        }
    }

    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = loop {
            let u = self.rng.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.rng.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * angle.sin());
        r * angle.cos()
    }

    pub fn fill(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }
}

/// Which shipped problem family to instantiate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Lasso,
    Quartic,
    L0Quad,
    BoxRosenbrock,
}

/// Deterministic recipe for a test problem. Identical specs produce bitwise
/// identical data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub seed: u64,
    /// Number of residual rows (lasso/quartic).
    pub rows: usize,
    /// Problem dimension.
    pub cols: usize,
    /// Regularization weight.
    pub lam: f64,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<CompositeProblem, ProblemError> {
        match self.kind {
            ProblemKind::Lasso => make_lasso(self),
            ProblemKind::Quartic => make_quartic(self),
            ProblemKind::L0Quad => make_l0_quadratic(self),
            ProblemKind::BoxRosenbrock => Ok(make_box_rosenbrock()),
        }
    }
}

/// Dense row-major matrix, just enough for the residual problems.
#[derive(Clone, Debug)]
struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`.
    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let mut acc = 0.0;
                for j in 0..self.cols {
                    acc += row[j] * x[j];
                }
                acc
            })
            .collect()
    }

    /// `Aᵀ r`.
    fn matvec_t(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            for j in 0..self.cols {
                out[j] += row[j] * r[i];
            }
        }
        out
    }
}

/// Shared data pipeline for the residual problems: draw `A` row-major, plant
/// a 10%-sparse `x*` on evenly spaced support indices, then set
/// `b = A x* + 0.01 · noise`. Draw order is frozen: `A`, then the support
/// values, then the noise.
fn residual_data(spec: &ProblemSpec) -> (DenseMatrix, Vec<f64>) {
    let (m, n) = (spec.rows, spec.cols);
    assert!(m >= 1 && n >= 1, "rows and cols must be >= 1");
    let mut normals = NormalSource::new(spec.seed);
    let a = DenseMatrix {
        rows: m,
        cols: n,
        data: normals.fill(m * n),
    };
    let nnz = (n / 10).max(1);
    let mut x_star = vec![0.0; n];
    for j in 0..nnz {
        x_star[j * n / nnz] = normals.next();
    }
    let mut b = a.matvec(&x_star);
    for bi in &mut b {
        *bi += 0.01 * normals.next();
    }
    (a, b)
}

/// Least squares with l1 regularization:
/// `f(x) = ½‖Ax − b‖²`, `g = λ‖x‖₁`, `x⁰ = 0`. The gradient `Aᵀ(Ax − b)` is
/// globally Lipschitz; this is the baseline problem.
pub fn make_lasso(spec: &ProblemSpec) -> Result<CompositeProblem, ProblemError> {
    let (a, b) = residual_data(spec);
    let n = spec.cols;
    let (a2, b2) = (a.clone(), b.clone());
    let smooth = SmoothObjective::new(
        n,
        move |x| {
            let r = a.matvec(x);
            0.5 * r.iter().zip(&b).map(|(ri, bi)| (ri - bi) * (ri - bi)).sum::<f64>()
        },
        move |x| {
            let mut r = a2.matvec(x);
            for (ri, bi) in r.iter_mut().zip(&b2) {
                *ri -= bi;
            }
            a2.matvec_t(&r)
        },
    );
    CompositeProblem::new(smooth, Regularizer::l1(spec.lam), vec![0.0; n])
}

/// Quartic residuals with l1 regularization:
/// `f(x) = ¼ Σ (a_iᵀx − b_i)⁴`, `g = λ‖x‖₁`, `x⁰ = 0`. The gradient
/// `Σ (a_iᵀx − b_i)³ a_i` is polynomial, hence locally but not globally
/// Lipschitz.
pub fn make_quartic(spec: &ProblemSpec) -> Result<CompositeProblem, ProblemError> {
    let (a, b) = residual_data(spec);
    let n = spec.cols;
    let (a2, b2) = (a.clone(), b.clone());
    let smooth = SmoothObjective::new(
        n,
        move |x| {
            let r = a.matvec(x);
            0.25 * r.iter().zip(&b).map(|(ri, bi)| (ri - bi).powi(4)).sum::<f64>()
        },
        move |x| {
            let mut r = a2.matvec(x);
            for (ri, bi) in r.iter_mut().zip(&b2) {
                *ri = (*ri - bi).powi(3);
            }
            a2.matvec_t(&r)
        },
    );
    CompositeProblem::new(smooth, Regularizer::l1(spec.lam), vec![0.0; n])
}

/// An l0-regularized quadratic with enumerable global optimum:
/// `f(x) = ½‖x − c‖²`, `g = λ‖x‖₀`, `x⁰ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct L0Quadratic {
    pub c: Vec<f64>,
    pub lam: f64,
}

impl L0Quadratic {
    pub fn new(c: Vec<f64>, lam: f64) -> Result<Self, ProblemError> {
        if c.len() > L0_ORACLE_MAX_DIM {
            return Err(ProblemError::DimensionTooLarge {
                max: L0_ORACLE_MAX_DIM,
                got: c.len(),
            });
        }
        if c.is_empty() {
            return Err(ProblemError::Invalid("l0 target c must be nonempty".into()));
        }
        if lam < 0.0 {
            return Err(ProblemError::Invalid(format!(
                "l0 weight must be nonnegative, got {lam}"
            )));
        }
        Ok(Self { c, lam })
    }

    /// The shipped instance family: the fixed ramp `c_i = (10 − 7i)/10`, so
    /// the two-dimensional instance is `c = (1, 0.3)`.
    pub fn ramp(n: usize, lam: f64) -> Result<Self, ProblemError> {
        Self::new(
            (0..n).map(|i| (10.0 - 7.0 * i as f64) / 10.0).collect(),
            lam,
        )
    }

    pub fn problem(&self) -> CompositeProblem {
        let n = self.c.len();
        let (c, c2) = (self.c.clone(), self.c.clone());
        let smooth = SmoothObjective::new(
            n,
            move |x| {
                0.5 * x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum::<f64>()
            },
            move |x| x.iter().zip(&c2).map(|(xi, ci)| xi - ci).collect(),
        );
        let (_, q_star) = l0_bruteforce_oracle(self);
        CompositeProblem::new(smooth, Regularizer::l0(self.lam), vec![0.0; n])
            .expect("q(0) is finite for the l0 quadratic")
            .with_known_optimum(q_star)
    }
}

/// Builds the shipped l0 instance from a spec (`cols` is the dimension;
/// rejected above [`L0_ORACLE_MAX_DIM`] so the oracle stays exhaustive).
pub fn make_l0_quadratic(spec: &ProblemSpec) -> Result<CompositeProblem, ProblemError> {
    Ok(L0Quadratic::ramp(spec.cols, spec.lam)?.problem())
}

/// Exhaustive global minimizer of `½‖x − c‖² + λ‖x‖₀`.
///
/// Enumerates all `2ⁿ` supports; on a support `S` the restricted minimizer
/// is `x_S = c_S` with value `½ Σ_{i∉S} c_i² + λ|S|`. Ties break toward the
/// smaller support, then lexicographically.
pub fn l0_bruteforce_oracle(inst: &L0Quadratic) -> (Vec<f64>, f64) {
    let n = inst.c.len();
    assert!(n <= L0_ORACLE_MAX_DIM);
    let mut supports: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    supports.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));

    let mut best_support: &[usize] = &[];
    let mut best = f64::INFINITY;
    for support in &supports {
        let mut value = inst.lam * support.len() as f64;
        let mut s = support.iter().peekable();
        for i in 0..n {
            if s.peek() == Some(&&i) {
                s.next();
            } else {
                value += 0.5 * inst.c[i] * inst.c[i];
            }
        }
        if value < best {
            best = value;
            best_support = support;
        }
    }
    let mut x = vec![0.0; n];
    for &i in best_support {
        x[i] = inst.c[i];
    }
    (x, best)
}

/// 2-D Rosenbrock restricted to the box `[−2, 2]²`:
/// `f = 100(y − x²)² + (1 − x)²`, `g` the box indicator, `x⁰ = (−1.2, 1)`.
/// The unconstrained minimizer `(1, 1)` lies inside the box, so `q* = 0`.
pub fn make_box_rosenbrock() -> CompositeProblem {
    let smooth = SmoothObjective::new(
        2,
        |x| {
            let (a, b) = (x[0], x[1]);
            100.0 * (b - a * a) * (b - a * a) + (1.0 - a) * (1.0 - a)
        },
        |x| {
            let (a, b) = (x[0], x[1]);
            vec![
                -400.0 * a * (b - a * a) - 2.0 * (1.0 - a),
                200.0 * (b - a * a),
            ]
        },
    );
    CompositeProblem::new(
        smooth,
        Regularizer::box_indicator(vec![-2.0, -2.0], vec![2.0, 2.0]),
        vec![-1.2, 1.0],
    )
    .expect("start point is inside the box")
    .with_known_optimum(0.0)
}

/// Checks the problem-validity contract on a built instance: finite `q(x⁰)`,
/// nonnegative regularizer at probes (zero-slope affine minorant), and
/// value/gradient consistency of the smooth part at `probes` random points
/// near `x⁰`.
pub fn check_problem(
    problem: &CompositeProblem,
    seed: u64,
    probes: usize,
    rel_tol: f64,
) -> Result<(), ProblemError> {
    let q0 = problem.q(&problem.x0);
    if !q0.is_finite() {
        return Err(ProblemError::NonFiniteStart { q0 });
    }
    let mut normals = NormalSource::new(seed);
    for _ in 0..probes {
        let x: Vec<f64> = problem
            .x0
            .iter()
            .map(|xi| xi + 0.5 * normals.next())
            .collect();
        let g = problem.reg.value(&x);
        if !(g >= 0.0) {
            return Err(ProblemError::Invalid(format!(
                "regularizer takes negative value {g} at a probe point"
            )));
        }
        let deviation = problem.smooth.gradient_deviation(&x);
        if deviation > rel_tol {
            return Err(ProblemError::GradientCheck {
                deviation,
                tol: rel_tol,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecmath::{dist, norm};

    fn lasso_spec() -> ProblemSpec {
        ProblemSpec {
            kind: ProblemKind::Lasso,
            seed: 42,
            rows: 30,
            cols: 20,
            lam: 0.1,
        }
    }

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(7);
        let mut b = SplitMix64::new(7);
        for _ in 0..32 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn splitmix_known_first_output() {
        // first output for seed 0 of the reference SplitMix64
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220A8397B1DCDAF);
    }

    #[test]
    fn uniforms_live_in_unit_interval() {
        let mut r = SplitMix64::new(3);
        for _ in 0..1000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normals_have_plausible_moments() {
        let mut src = NormalSource::new(11);
        let n = 20_000;
        let xs = src.fill(n);
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn lasso_gradient_matches_finite_differences() {
        let p = make_lasso(&lasso_spec()).unwrap();
        let mut normals = NormalSource::new(5);
        for _ in 0..5 {
            let x = normals.fill(20);
            assert!(p.smooth.gradient_deviation(&x) < 1e-6);
        }
    }

    #[test]
    fn lasso_is_bitwise_reproducible() {
        let p1 = make_lasso(&lasso_spec()).unwrap();
        let p2 = make_lasso(&lasso_spec()).unwrap();
        let mut normals = NormalSource::new(9);
        for _ in 0..3 {
            let x = normals.fill(20);
            assert_eq!(p1.smooth.value(&x), p2.smooth.value(&x));
            assert_eq!(p1.smooth.gradient(&x), p2.smooth.gradient(&x));
        }
    }

    #[test]
    fn scalar_lasso_minimizer_is_least_squares_solution() {
        // n = m = 1, λ = 0: the minimizer of ½(ax − b)² zeroes the residual
        let spec = ProblemSpec {
            kind: ProblemKind::Lasso,
            seed: 1,
            rows: 1,
            cols: 1,
            lam: 0.0,
        };
        let p = make_lasso(&spec).unwrap();
        let cfg = crate::config::SolverConfig {
            tol: 1e-12,
            ..Default::default()
        };
        let result = crate::solver::npg_average(&p, &cfg).unwrap();
        // at x = b/a both the objective and the gradient vanish
        assert!(p.smooth.value(&result.x_final) < 1e-16);
        assert!(norm(&p.smooth.gradient(&result.x_final)) < 1e-8);
    }

    #[test]
    fn quartic_gradient_matches_finite_differences() {
        let spec = ProblemSpec {
            kind: ProblemKind::Quartic,
            seed: 7,
            rows: 30,
            cols: 20,
            lam: 0.1,
        };
        let p = make_quartic(&spec).unwrap();
        let mut normals = NormalSource::new(5);
        for _ in 0..5 {
            let x = normals.fill(20);
            assert!(p.smooth.gradient_deviation(&x) < 1e-5);
        }
    }

    #[test]
    fn quartic_gradient_growth_is_superlinear() {
        // cubic gradient growth along a ray: successive difference
        // quotients strictly increase, so no global Lipschitz constant
        let spec = ProblemSpec {
            kind: ProblemKind::Quartic,
            seed: 7,
            rows: 30,
            cols: 20,
            lam: 0.1,
        };
        let p = make_quartic(&spec).unwrap();
        let at = |t: f64| {
            let mut x = vec![0.0; 20];
            x[0] = t;
            p.smooth.gradient(&x)
        };
        let (g1, g2, g4) = (at(1.0), at(2.0), at(4.0));
        let quot_12 = dist(&g2, &g1) / 1.0;
        let quot_24 = dist(&g4, &g2) / 2.0;
        assert!(quot_24 > quot_12);
    }

    #[test]
    fn quartic_is_bitwise_reproducible() {
        let spec = ProblemSpec {
            kind: ProblemKind::Quartic,
            seed: 7,
            rows: 10,
            cols: 8,
            lam: 0.1,
        };
        let p1 = make_quartic(&spec).unwrap();
        let p2 = make_quartic(&spec).unwrap();
        let x = NormalSource::new(2).fill(8);
        assert_eq!(p1.smooth.value(&x), p2.smooth.value(&x));
        assert_eq!(p1.smooth.gradient(&x), p2.smooth.gradient(&x));
    }

    #[test]
    fn l0_oracle_matches_hand_enumeration() {
        let inst = L0Quadratic::new(vec![1.0, 0.3], 0.25).unwrap();
        let (x, q) = l0_bruteforce_oracle(&inst);
        assert_eq!(x, vec![1.0, 0.0]);
        assert_eq!(q, 0.5 * 0.3 * 0.3 + 0.25);
        assert!((q - 0.295).abs() < 1e-15);
    }

    #[test]
    fn l0_oracle_unregularized_returns_target() {
        let inst = L0Quadratic::new(vec![0.4, -1.0, 2.0], 0.0).unwrap();
        let (x, q) = l0_bruteforce_oracle(&inst);
        assert_eq!(x, vec![0.4, -1.0, 2.0]);
        assert_eq!(q, 0.0);
    }

    #[test]
    fn l0_oracle_zero_target_returns_origin() {
        let inst = L0Quadratic::new(vec![0.0, 0.0], 3.0).unwrap();
        let (x, q) = l0_bruteforce_oracle(&inst);
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(q, 0.0);
    }

    #[test]
    fn l0_oracle_large_lambda_thresholds_everything() {
        let inst = L0Quadratic::new(vec![1.0, 0.3], 0.51).unwrap();
        let (x, q) = l0_bruteforce_oracle(&inst);
        assert_eq!(x, vec![0.0, 0.0]);
        assert!((q - 0.5 * (1.0 + 0.3 * 0.3)).abs() < 1e-15);
    }

    #[test]
    fn l0_oracle_tie_breaks_toward_smaller_support() {
        // every support has value 1.0; the empty support wins
        let inst = L0Quadratic::new(vec![1.0, 1.0], 0.5).unwrap();
        let (x, q) = l0_bruteforce_oracle(&inst);
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(q, 1.0);
    }

    #[test]
    fn l0_oracle_never_beaten_by_grid_search() {
        // exhaustive grid around c on every support, step 1e-3
        let inst = L0Quadratic::new(vec![0.9, -0.4, 0.2], 0.1).unwrap();
        let (_, q_star) = l0_bruteforce_oracle(&inst);
        let n = inst.c.len();
        for mask in 0u32..1 << n {
            let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            // grid each kept coordinate in [c_i - 0.05, c_i + 0.05]
            let mut offsets = vec![-50i64; support.len()];
            loop {
                let mut x = vec![0.0; n];
                for (slot, &i) in support.iter().enumerate() {
                    x[i] = inst.c[i] + offsets[slot] as f64 * 1e-3;
                }
                let fx: f64 = 0.5
                    * x.iter()
                        .zip(&inst.c)
                        .map(|(xi, ci)| (xi - ci) * (xi - ci))
                        .sum::<f64>();
                let nonzero = x.iter().filter(|c| **c != 0.0).count();
                let qx = fx + inst.lam * nonzero as f64;
                assert!(qx >= q_star - 1e-9);
                // advance odometer over [-50, 50] per coordinate
                let mut slot = 0;
                loop {
                    if slot == offsets.len() {
                        break;
                    }
                    offsets[slot] += 1;
                    if offsets[slot] <= 50 {
                        break;
                    }
                    offsets[slot] = -50;
                    slot += 1;
                }
                if slot == offsets.len() {
                    break;
                }
            }
        }
    }

    #[test]
    fn l0_spec_rejects_large_dimension() {
        let spec = ProblemSpec {
            kind: ProblemKind::L0Quad,
            seed: 0,
            rows: 1,
            cols: 13,
            lam: 0.1,
        };
        assert!(matches!(
            make_l0_quadratic(&spec),
            Err(ProblemError::DimensionTooLarge { max: 12, got: 13 })
        ));
    }

    #[test]
    fn l0_ramp_two_dimensional_instance() {
        let inst = L0Quadratic::ramp(2, 0.25).unwrap();
        assert_eq!(inst.c, vec![1.0, 0.3]);
        let p = inst.problem();
        assert_eq!(p.known_optimum, Some(0.5 * 0.3 * 0.3 + 0.25));
    }

    #[test]
    fn box_rosenbrock_values() {
        let p = make_box_rosenbrock();
        assert_eq!(p.q(&[1.0, 1.0]), 0.0);
        assert_eq!(p.q(&[3.0, 0.0]), f64::INFINITY);
        assert!(p.smooth.gradient_deviation(&[-1.2, 1.0]) < 1e-6);
    }

    #[test]
    fn all_shipped_problems_pass_validity_checks() {
        let specs = [
            lasso_spec(),
            ProblemSpec {
                kind: ProblemKind::Quartic,
                seed: 7,
                rows: 30,
                cols: 20,
                lam: 0.1,
            },
            ProblemSpec {
                kind: ProblemKind::L0Quad,
                seed: 0,
                rows: 1,
                cols: 2,
                lam: 0.25,
            },
            ProblemSpec {
                kind: ProblemKind::BoxRosenbrock,
                seed: 0,
                rows: 1,
                cols: 2,
                lam: 0.0,
            },
        ];
        for spec in &specs {
            let p = spec.build().unwrap();
            check_problem(&p, 123, 5, 1e-5).unwrap();
        }
    }
}
