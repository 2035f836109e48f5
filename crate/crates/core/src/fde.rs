//! Fixed-step solver for the Caputo-fractional Cauchy problem
//!
//! ```text
//! (^C D^alpha x)(t) = f(t, x(t)),   x(0) = x0,   t in [0, T],
//! ```
//!
//! via the fractional forward Euler method (explicit product-rectangle rule
//! over the full memory), together with the a-priori state and Hölder bounds
//! that every solution of a right-hand side with linear growth obeys.

use crate::error::{FracError, Result};
use crate::grid::{FracOrder, TimeGrid, Trajectory};
use crate::ops::MemoryQuadrature;
use crate::special::{gamma_positive, mittag_leffler};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Boxed right-hand-side evaluator `f(t, x)`.
pub type RhsEval = Box<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Right-hand side `f(t, x)` with its declared growth constant `c_f`
/// ( `|f(t,x)| <= (1 + |x|) c_f` ) and optional Lipschitz constant.
pub struct RhsFunction {
    eval: RhsEval,
    dim: usize,
    c_f: f64,
    lambda_f: Option<f64>,
}

impl std::fmt::Debug for RhsFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RhsFunction")
            .field("dim", &self.dim)
            .field("c_f", &self.c_f)
            .field("lambda_f", &self.lambda_f)
            .finish_non_exhaustive()
    }
}

impl RhsFunction {
    pub fn new<F>(dim: usize, c_f: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(FracError::DimensionMismatch(
                "rhs dim must be positive".into(),
            ));
        }
        if !(c_f.is_finite() && c_f > 0.0) {
            return Err(FracError::InvalidParameter(format!(
                "growth constant c_f must be positive, got {c_f}"
            )));
        }
        Ok(Self {
            eval: Box::new(eval),
            dim,
            c_f,
            lambda_f: None,
        })
    }

    /// Attach a declared Lipschitz constant.
    pub fn with_lipschitz(mut self, lambda_f: f64) -> Result<Self> {
        if !(lambda_f.is_finite() && lambda_f > 0.0) {
            return Err(FracError::InvalidParameter(format!(
                "lipschitz constant must be positive, got {lambda_f}"
            )));
        }
        self.lambda_f = Some(lambda_f);
        Ok(self)
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.eval)(t, x)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c_f(&self) -> f64 {
        self.c_f
    }

    pub fn lambda_f(&self) -> Option<f64> {
        self.lambda_f
    }

    /// Spot-check of the declared growth bound by random sampling: returns
    /// the worst observed ratio `|f(t,x)| / ((1 + |x|) c_f)`. Values above 1
    /// mean the declaration is violated somewhere.
    pub fn growth_margin(&self, horizon: f64, radius: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let t = rng.gen::<f64>() * horizon;
            let x: Vec<f64> = (0..self.dim)
                .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * radius)
                .collect();
            let fx = self.eval(t, &x);
            let fn_norm = fx.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max(fn_norm / ((1.0 + x_norm) * self.c_f));
        }
        worst
    }
}

/// The Cauchy problem data: right-hand side, order, initial value, horizon.
#[derive(Debug)]
pub struct CauchyProblem {
    rhs: RhsFunction,
    alpha: FracOrder,
    x0: Vec<f64>,
    horizon: f64,
}

impl CauchyProblem {
    pub fn new(rhs: RhsFunction, alpha: FracOrder, x0: Vec<f64>, horizon: f64) -> Result<Self> {
        if x0.len() != rhs.dim() {
            return Err(FracError::DimensionMismatch(format!(
                "x0 has {} components, rhs dim is {}",
                x0.len(),
                rhs.dim()
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(FracError::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self {
            rhs,
            alpha,
            x0,
            horizon,
        })
    }

    pub fn rhs(&self) -> &RhsFunction {
        &self.rhs
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// A-priori bounds for solutions started inside the ball of radius `r0`:
/// state bound `r`, Hölder-constant diagnostic `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriBounds {
    pub r0: f64,
    pub r: f64,
    pub h: f64,
}

/// State and Hölder bounds from the growth constant:
///
/// ```text
/// R = (1 + R0) E_alpha(c_f T^alpha) - 1,
/// H = (1 + R) c_f * T^alpha / Gamma(alpha + 1).
/// ```
///
/// The `H` factor `T^alpha / Gamma(alpha+1)` is the constant-integrand
/// calibration of the (non-constructive) embedding constant; `H` is a
/// diagnostic scale, not a sharp bound.
pub fn apriori_bounds(r0: f64, c_f: f64, alpha: FracOrder, horizon: f64) -> Result<AprioriBounds> {
    if !(r0.is_finite() && r0 >= 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "r0 must be >= 0, got {r0}"
        )));
    }
    if !(c_f.is_finite() && c_f > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "c_f must be > 0, got {c_f}"
        )));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "horizon must be > 0, got {horizon}"
        )));
    }
    let a = alpha.value();
    let e = mittag_leffler(a, c_f * horizon.powf(a))?;
    let r = (1.0 + r0) * e - 1.0;
    let h_cal = horizon.powf(a) / gamma_positive(a + 1.0);
    Ok(AprioriBounds {
        r0,
        r,
        h: (1.0 + r) * c_f * h_cal,
    })
}

/// Fractional forward Euler over the given grid:
///
/// ```text
/// x(t_m) = x0 + 1/Gamma(alpha+1) sum_{j<m} f(t_j, x(t_j)) *
///          [ (t_m - t_j)^alpha - (t_m - t_{j+1})^alpha ]
/// ```
///
/// Node 0 equals `x0` exactly. The full memory sum is recomputed per node
/// (O(N^2) total) so the discrete integral equation holds bit-exactly.
pub fn solve_euler(problem: &CauchyProblem, grid: &TimeGrid) -> Result<Trajectory> {
    if grid.horizon() != problem.horizon() {
        return Err(FracError::InvalidParameter(format!(
            "grid horizon {} differs from problem horizon {}",
            grid.horizon(),
            problem.horizon()
        )));
    }
    let n = grid.len();
    let dim = problem.rhs().dim();
    let quad = MemoryQuadrature::new(grid, problem.alpha());
    let mut states = Vec::with_capacity(n * dim);
    states.extend_from_slice(problem.x0());
    let mut rhs_hist: Vec<f64> = Vec::with_capacity(n * dim);
    let mut buf = vec![0.0; dim];
    for m in 0..n - 1 {
        let t = grid.t(m);
        let f = problem.rhs().eval(t, &states[m * dim..(m + 1) * dim]);
        if f.len() != dim {
            return Err(FracError::DimensionMismatch(format!(
                "rhs returned {} components, expected {dim}",
                f.len()
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(FracError::NonFinite { node: m, t });
        }
        rhs_hist.extend_from_slice(&f);
        buf.fill(0.0);
        quad.accumulate(m + 1, dim, &rhs_hist, &mut buf);
        for (x0_d, acc) in problem.x0().iter().zip(&buf) {
            let v = x0_d + acc;
            if !v.is_finite() {
                return Err(FracError::NonFinite {
                    node: m + 1,
                    t: grid.t(m + 1),
                });
            }
            states.push(v);
        }
    }
    Trajectory::new(grid.clone(), dim, states)
}

/// Discrete defect of the integral equation: the largest node-wise distance
///
/// ```text
/// sup_m | x(t_m) - ( x0 + (I^alpha f(., x(.)))(t_m) ) |
/// ```
///
/// evaluated with the same quadrature the solver uses, so solver output has
/// residual exactly zero.
pub fn check_solution_residual(problem: &CauchyProblem, x: &Trajectory) -> Result<f64> {
    if x.grid().horizon() != problem.horizon() {
        return Err(FracError::InvalidParameter(format!(
            "trajectory horizon {} differs from problem horizon {}",
            x.grid().horizon(),
            problem.horizon()
        )));
    }
    let dim = problem.rhs().dim();
    if x.dim() != dim {
        return Err(FracError::DimensionMismatch(format!(
            "trajectory dim {} differs from rhs dim {dim}",
            x.dim()
        )));
    }
    let grid = x.grid();
    let n = grid.len();
    let mut rhs_samples = Vec::with_capacity(n * dim);
    for m in 0..n {
        let f = problem.rhs().eval(grid.t(m), x.value(m));
        if f.len() != dim {
            return Err(FracError::DimensionMismatch(format!(
                "rhs returned {} components, expected {dim}",
                f.len()
            )));
        }
        rhs_samples.extend_from_slice(&f);
    }
    let quad = MemoryQuadrature::new(grid, problem.alpha());
    let mut buf = vec![0.0; dim];
    let mut worst = 0.0_f64;
    for m in 0..n {
        buf.fill(0.0);
        quad.accumulate(m, dim, &rhs_samples, &mut buf);
        let mut dist2 = 0.0;
        for ((x0_d, acc), x_d) in problem.x0().iter().zip(&buf).zip(x.value(m)) {
            let diff = x_d - (x0_d + acc);
            dist2 += diff * diff;
        }
        worst = worst.max(dist2.sqrt());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    fn relaxation_problem(x0: f64, horizon: f64) -> CauchyProblem {
        let rhs = RhsFunction::new(1, 1.0, |_, x| vec![x[0]])
            .unwrap()
            .with_lipschitz(1.0)
            .unwrap();
        CauchyProblem::new(rhs, order(0.5), vec![x0], horizon).unwrap()
    }

    #[test]
    fn zero_rhs_keeps_initial_state() {
        let rhs = RhsFunction::new(2, 0.5, |_, _| vec![0.0, 0.0]).unwrap();
        let problem = CauchyProblem::new(rhs, order(0.5), vec![3.0, -1.0], 1.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let x = solve_euler(&problem, &grid).unwrap();
        for m in 0..x.node_count() {
            assert_eq!(x.value(m), &[3.0, -1.0]);
        }
    }

    #[test]
    fn pure_source_reproduces_power_rule_exactly() {
        // f(t, x) = 1 is constant, so the rectangle quadrature is exact:
        // x(t) = t^0.5 / Gamma(1.5) at every node.
        let rhs = RhsFunction::new(1, 1.0, |_, _| vec![1.0]).unwrap();
        let problem = CauchyProblem::new(rhs, order(0.5), vec![0.0], 1.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 128).unwrap();
        let x = solve_euler(&problem, &grid).unwrap();
        for m in 0..x.node_count() {
            let expected = grid.t(m).sqrt() / gamma_positive(1.5);
            assert_relative_eq!(
                x.value(m)[0],
                expected,
                max_relative = 1e-12,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn relaxation_approaches_mittag_leffler() {
        let problem = relaxation_problem(1.0, 1.0);
        let grid = TimeGrid::uniform(1.0, 4096).unwrap();
        let x = solve_euler(&problem, &grid).unwrap();
        let at_one = x.value(4096)[0];
        assert_relative_eq!(at_one, 5.0089800807622834663, max_relative = 0.02);
    }

    #[test]
    fn solver_is_deterministic() {
        let problem = relaxation_problem(1.0, 1.0);
        let grid = TimeGrid::uniform(1.0, 256).unwrap();
        let a = solve_euler(&problem, &grid).unwrap();
        let b = solve_euler(&problem, &grid).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn solver_rejects_mismatched_horizon() {
        let problem = relaxation_problem(1.0, 1.0);
        let grid = TimeGrid::uniform(2.0, 64).unwrap();
        assert!(solve_euler(&problem, &grid).is_err());
    }

    #[test]
    fn solver_reports_nonfinite_node() {
        // Cubic blow-up reaches infinity quickly from a large start.
        let rhs = RhsFunction::new(1, 1.0, |_, x| vec![x[0] * x[0] * x[0]]).unwrap();
        let problem = CauchyProblem::new(rhs, order(0.5), vec![1e3], 1.0).unwrap();
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        match solve_euler(&problem, &grid) {
            Err(FracError::NonFinite { node, .. }) => assert!(node > 0),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn residual_of_solver_output_is_exactly_zero() {
        let problem = relaxation_problem(1.0, 1.0);
        let grid = TimeGrid::uniform(1.0, 512).unwrap();
        let x = solve_euler(&problem, &grid).unwrap();
        assert_eq!(check_solution_residual(&problem, &x).unwrap(), 0.0);
    }

    #[test]
    fn residual_detects_perturbation() {
        let problem = relaxation_problem(1.0, 1.0);
        let grid = TimeGrid::uniform(1.0, 128).unwrap();
        let x = solve_euler(&problem, &grid).unwrap();
        let mut rows: Vec<Vec<f64>> = (0..x.node_count()).map(|m| x.value(m).to_vec()).collect();
        rows[64][0] += 0.1;
        let perturbed = Trajectory::from_rows(grid, &rows).unwrap();
        let resid = check_solution_residual(&problem, &perturbed).unwrap();
        // The perturbed node itself contributes 0.1 before any quadrature
        // coupling at later nodes.
        assert!(resid >= 0.099, "residual {resid} too small");
    }

    #[test]
    fn apriori_bounds_reference_values() {
        // R0 -> 0, c_f -> 0+ degenerates to R -> 0 (E_alpha(0) = 1).
        let b = apriori_bounds(0.0, 1e-12, order(0.5), 1.0).unwrap();
        assert!(b.r.abs() < 1e-9);

        let b = apriori_bounds(1.0, 1.0, order(0.5), 1.0).unwrap();
        assert_relative_eq!(b.r, 9.0179601615245669326, max_relative = 1e-9);
        assert!(b.r >= b.r0 && b.h > 0.0);

        // Monotone in r0: doubling the initial ball radius raises R.
        let b2 = apriori_bounds(2.0, 1.0, order(0.5), 1.0).unwrap();
        assert_relative_eq!(b2.r, 14.026940242286850399, max_relative = 1e-9);
        assert!(b2.r > b.r);
        assert!(b2.r >= b2.r0 && b2.h > 0.0);
    }

    #[test]
    fn growth_margin_flags_violations() {
        let honest = RhsFunction::new(1, 2.0, |_, x| vec![x[0]]).unwrap();
        assert!(honest.growth_margin(1.0, 10.0, 500, 7) <= 1.0);
        let dishonest = RhsFunction::new(1, 0.1, |_, x| vec![5.0 + x[0]]).unwrap();
        assert!(dishonest.growth_margin(1.0, 10.0, 500, 7) > 1.0);
    }
}
