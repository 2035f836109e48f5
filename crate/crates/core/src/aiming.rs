//! Mutual extremal-shift aiming between a conflict-controlled system and a
//! guide that copies its dynamics.
//!
//! Both states evolve under the same fractional dynamics on a shared
//! partition. At every partition node the procedure aims them at each other
//! through the deviation `s = x - y`: the system plays
//! `u = argmin_u max_v <s, g>` while the guide plays
//! `v-tilde = argmax_v min_u <s, g>`; the disturbance acting on the system
//! and the control acting on the guide are external inputs drawn from
//! configurable policies. One fractional-Euler step per partition cell, full
//! memory retained.
//!
//! # Randomness
//!
//! All stochastic policies share one `ChaCha12` generator seeded from the
//! config seed, split into fixed sub-streams per input slot:
//!
//! | stream | slot                                  |
//! |--------|---------------------------------------|
//! | 1      | system disturbance `v`                |
//! | 2      | guide control `u-tilde`               |
//! | 3      | system control `u` (random override)  |
//! | 4      | guide disturbance `v-tilde` (random override) |
//!
//! Each slot consumes a fixed number of draws per step, so runs are
//! bit-reproducible and the shared streams coincide between an aiming run
//! and its no-aiming counterpart with the same seed.

use crate::error::{FracError, Result};
use crate::fde::apriori_bounds;
use crate::game::{extremal_u, extremal_v, ActionSet, ControlRealization, GameDynamics, Matrix};
use crate::grid::{FracOrder, GridFunction, TimeGrid, Trajectory};
use crate::lyapunov::InequalityReport;
use crate::ops::{caputo_l1, MemoryQuadrature};
use crate::special::{gamma_positive, mittag_leffler};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// Policy for the external input slots (the system's disturbance and the
/// guide's control).
#[derive(Debug, Clone)]
pub enum Policy {
    /// Piecewise-constant values drawn uniformly from the action set, one
    /// draw per partition cell, from the slot's dedicated RNG stream.
    SeededRandom,
    /// A fixed realization on the same partition.
    Fixed(ControlRealization),
    /// Mirror the extremal-shift selector of the opposing slot (worst-case
    /// aligned play).
    AdversarialExtremal,
}

/// Policy for the procedure-owned slots (the system's control and the
/// guide's disturbance). `Extremal` is the aiming procedure itself; the
/// other variants exist for no-aiming baselines.
#[derive(Debug, Clone)]
pub enum AimPolicy {
    Extremal,
    SeededRandom,
    Fixed(ControlRealization),
}

/// Full description of one aiming run.
#[derive(Debug)]
pub struct AimingConfig {
    pub dynamics: GameDynamics,
    pub alpha: FracOrder,
    pub horizon: f64,
    pub p: ActionSet,
    pub q: ActionSet,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub partition: TimeGrid,
    /// Disturbance `v` acting on the system.
    pub disturbance_policy: Policy,
    /// Control `u-tilde` acting on the guide.
    pub guide_u_policy: Policy,
    /// Control `u` of the system; `Extremal` is the aiming procedure.
    pub system_u_policy: AimPolicy,
    /// Disturbance `v-tilde` of the guide; `Extremal` is the aiming
    /// procedure.
    pub guide_v_policy: AimPolicy,
    /// Master seed; the per-slot streams are split from it.
    pub seed: u64,
    /// Epsilon used in the reported diagnostic bound `eps + K |x0 - y0|`.
    pub bound_eps: f64,
}

impl AimingConfig {
    fn validate(&self) -> Result<()> {
        let n = self.dynamics.n();
        if self.x0.len() != n || self.y0.len() != n {
            return Err(FracError::DimensionMismatch(format!(
                "x0/y0 must have {} components, got {} and {}",
                n,
                self.x0.len(),
                self.y0.len()
            )));
        }
        if self.p.dim() != self.dynamics.n_u() || self.q.dim() != self.dynamics.n_v() {
            return Err(FracError::DimensionMismatch(
                "action set dimensions do not match the dynamics".into(),
            ));
        }
        if self.partition.horizon() != self.horizon {
            return Err(FracError::InvalidParameter(format!(
                "partition horizon {} differs from configured horizon {}",
                self.partition.horizon(),
                self.horizon
            )));
        }
        if !(self.bound_eps.is_finite() && self.bound_eps > 0.0) {
            return Err(FracError::InvalidParameter(format!(
                "bound_eps must be positive, got {}",
                self.bound_eps
            )));
        }
        let cells = self.partition.len() - 1;
        let check_fixed = |r: &ControlRealization, slot: &str| -> Result<()> {
            if r.values().len() != cells {
                return Err(FracError::DimensionMismatch(format!(
                    "fixed {slot} realization has {} cells, partition has {cells}",
                    r.values().len()
                )));
            }
            Ok(())
        };
        if let Policy::Fixed(r) = &self.disturbance_policy {
            check_fixed(r, "disturbance")?;
        }
        if let Policy::Fixed(r) = &self.guide_u_policy {
            check_fixed(r, "guide-control")?;
        }
        if let AimPolicy::Fixed(r) = &self.system_u_policy {
            check_fixed(r, "system-control")?;
        }
        if let AimPolicy::Fixed(r) = &self.guide_v_policy {
            check_fixed(r, "guide-disturbance")?;
        }
        Ok(())
    }
}

/// Coupled system/guide run: trajectories, the four realized inputs, and
/// proximity diagnostics.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub x_traj: Trajectory,
    pub y_traj: Trajectory,
    pub u_real: ControlRealization,
    pub v_real: ControlRealization,
    pub u_tilde_real: ControlRealization,
    pub v_tilde_real: ControlRealization,
    /// `max_m |x(t_m) - y(t_m)|`.
    pub deviation_sup: f64,
    /// `sqrt(E_alpha(2 lambda_g T^alpha))`, when representable.
    pub k_constant: Option<f64>,
    /// Diagnostic bound `bound_eps + K |x0 - y0|`; reported only, never
    /// gated on (K grows like exp(2 lambda_g T^alpha)^(1/2)).
    pub bound_rhs: Option<f64>,
    pub bound_eps: f64,
    pub seed: u64,
}

impl SimulationResult {
    /// `|x(t_m) - y(t_m)|` at one node.
    pub fn deviation_at(&self, m: usize) -> f64 {
        self.x_traj
            .value(m)
            .iter()
            .zip(self.y_traj.value(m))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Node-wise deviations.
    pub fn deviations(&self) -> Vec<f64> {
        (0..self.x_traj.node_count())
            .map(|m| self.deviation_at(m))
            .collect()
    }
}

/// RNG stream ids per input slot.
const STREAM_DISTURBANCE: u64 = 1;
const STREAM_GUIDE_CONTROL: u64 = 2;
const STREAM_SYSTEM_CONTROL: u64 = 3;
const STREAM_GUIDE_DISTURBANCE: u64 = 4;

fn slot_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Run the aiming procedure over the configured partition.
///
/// Deterministic: identical configs and seeds produce bit-identical
/// results. Fails on unsupported selector combinations and on non-finite
/// states (reporting the offending node).
pub fn run_aiming(config: &AimingConfig) -> Result<SimulationResult> {
    run_on_partition(config, &config.partition)
}

fn run_on_partition(config: &AimingConfig, partition: &TimeGrid) -> Result<SimulationResult> {
    config.validate()?;
    let dyn_ = &config.dynamics;
    let n_nodes = partition.len();
    let cells = n_nodes - 1;
    let dim = dyn_.n();
    let quad = MemoryQuadrature::new(partition, config.alpha);

    let mut rng_v = slot_rng(config.seed, STREAM_DISTURBANCE);
    let mut rng_ut = slot_rng(config.seed, STREAM_GUIDE_CONTROL);
    let mut rng_u = slot_rng(config.seed, STREAM_SYSTEM_CONTROL);
    let mut rng_vt = slot_rng(config.seed, STREAM_GUIDE_DISTURBANCE);

    let mut x = Vec::with_capacity(n_nodes * dim);
    let mut y = Vec::with_capacity(n_nodes * dim);
    x.extend_from_slice(&config.x0);
    y.extend_from_slice(&config.y0);
    let mut fx: Vec<f64> = Vec::with_capacity(cells * dim);
    let mut fy: Vec<f64> = Vec::with_capacity(cells * dim);
    let mut u_vals = Vec::with_capacity(cells);
    let mut v_vals = Vec::with_capacity(cells);
    let mut ut_vals = Vec::with_capacity(cells);
    let mut vt_vals = Vec::with_capacity(cells);
    let mut buf = vec![0.0; dim];

    for j in 0..cells {
        let t = partition.t(j);
        let xj = x[j * dim..(j + 1) * dim].to_vec();
        let yj = y[j * dim..(j + 1) * dim].to_vec();
        let s: Vec<f64> = xj.iter().zip(&yj).map(|(a, b)| a - b).collect();

        let u = match &config.system_u_policy {
            AimPolicy::Extremal => extremal_u(dyn_, t, &xj, &s, &config.p, &config.q)?,
            AimPolicy::SeededRandom => config.p.sample_uniform(&mut rng_u),
            AimPolicy::Fixed(r) => r.values()[j].clone(),
        };
        let v_tilde = match &config.guide_v_policy {
            AimPolicy::Extremal => extremal_v(dyn_, t, &xj, &s, &config.p, &config.q)?,
            AimPolicy::SeededRandom => config.q.sample_uniform(&mut rng_vt),
            AimPolicy::Fixed(r) => r.values()[j].clone(),
        };
        let v = match &config.disturbance_policy {
            Policy::SeededRandom => config.q.sample_uniform(&mut rng_v),
            Policy::Fixed(r) => r.values()[j].clone(),
            Policy::AdversarialExtremal => extremal_v(dyn_, t, &xj, &s, &config.p, &config.q)?,
        };
        let u_tilde = match &config.guide_u_policy {
            Policy::SeededRandom => config.p.sample_uniform(&mut rng_ut),
            Policy::Fixed(r) => r.values()[j].clone(),
            Policy::AdversarialExtremal => extremal_u(dyn_, t, &xj, &s, &config.p, &config.q)?,
        };

        let gx = dyn_.eval(t, &xj, &u, &v);
        let gy = dyn_.eval(t, &yj, &u_tilde, &v_tilde);
        if gx.len() != dim || gy.len() != dim {
            return Err(FracError::DimensionMismatch(
                "dynamics returned a vector of the wrong length".into(),
            ));
        }
        if gx.iter().chain(gy.iter()).any(|c| !c.is_finite()) {
            return Err(FracError::NonFinite { node: j, t });
        }
        fx.extend_from_slice(&gx);
        fy.extend_from_slice(&gy);

        buf.fill(0.0);
        quad.accumulate(j + 1, dim, &fx, &mut buf);
        for (x0_d, acc) in config.x0.iter().zip(&buf) {
            let val = x0_d + acc;
            if !val.is_finite() {
                return Err(FracError::NonFinite {
                    node: j + 1,
                    t: partition.t(j + 1),
                });
            }
            x.push(val);
        }
        buf.fill(0.0);
        quad.accumulate(j + 1, dim, &fy, &mut buf);
        for (y0_d, acc) in config.y0.iter().zip(&buf) {
            let val = y0_d + acc;
            if !val.is_finite() {
                return Err(FracError::NonFinite {
                    node: j + 1,
                    t: partition.t(j + 1),
                });
            }
            y.push(val);
        }

        u_vals.push(u);
        v_vals.push(v);
        ut_vals.push(u_tilde);
        vt_vals.push(v_tilde);
    }

    let x_traj = Trajectory::new(partition.clone(), dim, x)?;
    let y_traj = Trajectory::new(partition.clone(), dim, y)?;
    let deviation_sup = (0..n_nodes)
        .map(|m| {
            x_traj
                .value(m)
                .iter()
                .zip(y_traj.value(m))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);

    let a = config.alpha.value();
    let k_constant = mittag_leffler(a, 2.0 * dyn_.lambda_g() * config.horizon.powf(a))
        .ok()
        .map(f64::sqrt);
    let s0: f64 = config
        .x0
        .iter()
        .zip(&config.y0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let bound_rhs = k_constant.map(|k| config.bound_eps + k * s0);

    Ok(SimulationResult {
        x_traj,
        y_traj,
        u_real: ControlRealization::new(partition.clone(), u_vals)?,
        v_real: ControlRealization::new(partition.clone(), v_vals)?,
        u_tilde_real: ControlRealization::new(partition.clone(), ut_vals)?,
        v_tilde_real: ControlRealization::new(partition.clone(), vt_vals)?,
        deviation_sup,
        k_constant,
        bound_rhs,
        bound_eps: config.bound_eps,
        seed: config.seed,
    })
}

/// Proximity constants of the aiming guarantee for a given accuracy `eps`
/// and initial ball radius `r0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremConstants {
    /// `K = sqrt(E_alpha(2 lambda_g T^alpha))`.
    pub k: f64,
    /// `eta = Gamma(alpha+1) eps^2 / (2 T^alpha E_alpha(2 lambda_g T^alpha))`.
    pub eta: f64,
    /// Step threshold from the time-modulus of the dynamics; `None` unless
    /// the caller can declare that modulus (it is not derivable from the
    /// declared constants).
    pub delta1: Option<f64>,
    /// `delta2 = min( eta / (8 H (1+R) c_g), eta / (16 R lambda_g H) )^{1/alpha}`.
    pub delta2: f64,
}

impl TheoremConstants {
    /// The usable partition-diameter threshold: `min(delta1, delta2)` when
    /// both exist.
    pub fn delta(&self) -> f64 {
        self.delta1.map_or(self.delta2, |d1| d1.min(self.delta2))
    }
}

/// Evaluate the proximity constants from the declared dynamics constants.
///
/// `holder_modulus` supplies a measured Hölder constant for the trajectory
/// bundle when available; otherwise the structural a-priori diagnostic
/// `H = (1+R) c_g T^alpha / Gamma(alpha+1)` is used. `delta1` is reported
/// as `None`: it depends on a modulus of continuity in time that the
/// declared constants do not determine.
pub fn theorem_constants(
    dynamics: &GameDynamics,
    alpha: FracOrder,
    horizon: f64,
    r0: f64,
    eps: f64,
    holder_modulus: Option<f64>,
) -> Result<TheoremConstants> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let a = alpha.value();
    let lambda_g = dynamics.lambda_g();
    let c_g = dynamics.c_g();
    let e_big = mittag_leffler(a, 2.0 * lambda_g * horizon.powf(a))?;
    let k = e_big.sqrt();
    let eta = gamma_positive(a + 1.0) * eps * eps / (2.0 * horizon.powf(a) * e_big);
    let bounds = apriori_bounds(r0, c_g, alpha, horizon)?;
    let r_bar = bounds.r;
    let h_bar = match holder_modulus {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => {
            return Err(FracError::InvalidParameter(format!(
                "holder modulus must be positive, got {h}"
            )))
        }
        None => bounds.h,
    };
    let cap =
        (eta / (8.0 * h_bar * (1.0 + r_bar) * c_g)).min(eta / (16.0 * r_bar * lambda_g * h_bar));
    let delta2 = cap.powf(1.0 / a);
    Ok(TheoremConstants {
        k,
        eta,
        delta1: None,
        delta2,
    })
}

/// One row of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterPoint {
    pub diameter: f64,
    pub deviation_sup: f64,
}

/// Re-run the same scenario on uniform partitions of decreasing diameter
/// (same seed throughout) and report the deviation per diameter. Runs are
/// independent and execute in parallel.
pub fn deviation_vs_diameter(
    config: &AimingConfig,
    diameters: &[f64],
) -> Result<Vec<DiameterPoint>> {
    if diameters.is_empty() {
        return Err(FracError::InvalidParameter(
            "diameters list is empty".into(),
        ));
    }
    if diameters.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(FracError::InvalidParameter(
            "diameters must be positive".into(),
        ));
    }
    if diameters.windows(2).any(|w| w[1] > w[0]) {
        return Err(FracError::InvalidParameter(
            "diameters must be sorted in descending order".into(),
        ));
    }
    if matches!(config.disturbance_policy, Policy::Fixed(_))
        || matches!(config.guide_u_policy, Policy::Fixed(_))
        || matches!(config.system_u_policy, AimPolicy::Fixed(_))
        || matches!(config.guide_v_policy, AimPolicy::Fixed(_))
    {
        return Err(FracError::InvalidParameter(
            "fixed realizations are tied to one partition; use random or extremal policies".into(),
        ));
    }
    diameters
        .par_iter()
        .map(|&d| {
            let steps = (config.horizon / d).ceil().max(1.0) as usize;
            let partition = TimeGrid::uniform(config.horizon, steps)?;
            let result = run_on_partition(config, &partition)?;
            Ok(DiameterPoint {
                diameter: partition.diameter(),
                deviation_sup: result.deviation_sup,
            })
        })
        .collect()
}

/// Verify the quadratic-superposition inequality along the realized
/// deviation: with `nu(t) = |s(t)|^2 - |s(0)|^2` (anchored at the origin),
/// check node-wise that the L1 estimate of `D^alpha nu` stays below
/// `2 <s, D^alpha s>` up to `tol`. This is the discrete shadow of the
/// mechanism that drives the proximity guarantee.
pub fn deviation_inequality_report(
    result: &SimulationResult,
    alpha: FracOrder,
    tol: f64,
) -> Result<InequalityReport> {
    deviation_report_from_trajectories(&result.x_traj, &result.y_traj, alpha, tol)
}

/// Same check for a system/guide pair loaded from storage.
pub fn deviation_report_from_trajectories(
    x_traj: &Trajectory,
    y_traj: &Trajectory,
    alpha: FracOrder,
    tol: f64,
) -> Result<InequalityReport> {
    if x_traj.grid() != y_traj.grid() || x_traj.dim() != y_traj.dim() {
        return Err(FracError::DimensionMismatch(
            "system and guide trajectories must share grid and dimension".into(),
        ));
    }
    let n = x_traj.node_count();
    let grid = x_traj.grid().clone();
    let dim = x_traj.dim();
    let mut s_data = Vec::with_capacity(n * dim);
    for m in 0..n {
        for (a, b) in x_traj.value(m).iter().zip(y_traj.value(m)) {
            s_data.push(a - b);
        }
    }
    let s_fn = GridFunction::new(grid.clone(), dim, s_data)?;
    let s0_sq: f64 = s_fn.value(0).iter().map(|v| v * v).sum();
    let nu = GridFunction::new(
        grid.clone(),
        1,
        (0..n)
            .map(|m| s_fn.value(m).iter().map(|v| v * v).sum::<f64>() - s0_sq)
            .collect(),
    )?;
    let lhs_fn = caputo_l1(alpha, &nu)?;
    // The L1 scheme differences the samples, so it computes the Caputo
    // derivative of s regardless of s(0).
    let ds = caputo_l1(alpha, &s_fn)?;
    let lhs: Vec<f64> = (0..n).map(|m| lhs_fn.value(m)[0]).collect();
    let rhs: Vec<f64> = (0..n)
        .map(|m| {
            2.0 * s_fn
                .value(m)
                .iter()
                .zip(ds.value(m))
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .collect();
    let max_violation = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| l - r)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(InequalityReport {
        grid,
        lhs,
        rhs,
        max_violation,
        tolerance_used: tol,
    })
}

/// The bundled reference scenario: a planar pendulum-like system under
/// bounded control and disturbance,
///
/// ```text
/// D^0.5 x1 = x2 + 0.3 u1 + 0.4 v1
/// D^0.5 x2 = -sin(x1) + cos(t) + 0.5 u2 + 0.2 v2
/// ```
///
/// on `[0, 5]` with unit-ball action sets, `x0 = (-1, 0)`, `y0 = (0, 1)`,
/// uniform partition step 0.0005 and seeded-random external inputs.
///
/// Declared constants: the drift is 1-Lipschitz in the state (`sin` has
/// unit slope) and `|g| <= |x| + 2.9`, so `lambda_g = 1`, `c_g = 2.9`.
pub fn paper_example() -> AimingConfig {
    let dynamics = GameDynamics::separable_affine(
        |t: f64, x: &[f64]| vec![x[1], -x[0].sin() + t.cos()],
        Matrix::diagonal(&[0.3, 0.5]),
        Matrix::diagonal(&[0.4, 0.2]),
        1.0,
        2.9,
    )
    .expect("reference dynamics are valid");
    AimingConfig {
        dynamics,
        alpha: FracOrder::new(0.5).expect("0.5 is a valid order"),
        horizon: 5.0,
        p: ActionSet::ball(1.0, 2).expect("unit ball"),
        q: ActionSet::ball(1.0, 2).expect("unit ball"),
        x0: vec![-1.0, 0.0],
        y0: vec![0.0, 1.0],
        partition: TimeGrid::uniform_with_step(5.0, 0.0005).expect("5/0.0005 cells"),
        disturbance_policy: Policy::SeededRandom,
        guide_u_policy: Policy::SeededRandom,
        system_u_policy: AimPolicy::Extremal,
        guide_v_policy: AimPolicy::Extremal,
        seed: 42,
        bound_eps: 0.1,
    }
}
