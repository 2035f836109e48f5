//! Numerical toolkit for conflict-controlled dynamical systems of
//! fractional order `alpha in (0, 1)`.
//!
//! The crate builds up in layers:
//!
//! * [`special`] — gamma and Mittag-Leffler functions,
//! * [`grid`] — time grids, orders, and grid-sampled functions,
//! * [`ops`] — discrete fractional operators (Riemann-Liouville integral,
//!   L1 Caputo estimator, Hölder modulus, Gronwall envelope),
//! * [`fde`] — the fractional forward Euler solver for Caputo Cauchy
//!   problems with a-priori bounds and a residual check,
//! * [`lyapunov`] — node-wise verification of the convex-superposition
//!   inequality `D^alpha V(x) <= <grad V(x), D^alpha x>` along
//!   trajectories,
//! * [`game`] — compact action sets, conflict dynamics, and the min-max /
//!   max-min extremal selectors,
//! * [`aiming`] — the mutual aiming procedure that keeps a system and its
//!   guide close, with its proximity constants and refinement studies.
//!
//! Everything is deterministic: stochastic policies run on named, seeded,
//! stream-split generators, and identical inputs produce bit-identical
//! outputs.

// Reference values keep every digit of their arbitrary-precision source.
#![allow(clippy::excessive_precision)]

pub mod aiming;
pub mod error;
pub mod fde;
pub mod game;
pub mod grid;
pub mod lyapunov;
pub mod ops;
pub mod special;

pub use aiming::{
    deviation_inequality_report, deviation_report_from_trajectories, deviation_vs_diameter,
    paper_example, run_aiming, theorem_constants, AimPolicy, AimingConfig, DiameterPoint, Policy,
    SimulationResult, TheoremConstants,
};
pub use error::{FracError, Result};
pub use fde::{
    apriori_bounds, check_solution_residual, solve_euler, AprioriBounds, CauchyProblem, RhsFunction,
};
pub use game::{
    check_saddle, extremal_u, extremal_v, ActionSet, ControlRealization, GameDynamics, Matrix,
    SaddleCheck,
};
pub use grid::{FracOrder, GridFunction, TimeGrid, Trajectory};
pub use lyapunov::{
    check_convex_inequality, check_quadratic_inequality, default_tolerance, InequalityReport,
    LyapunovFn, L1_TOLERANCE_COEFF,
};
pub use ops::{caputo_l1, gronwall_bound, holder_modulus, rl_integral};
pub use special::{gamma, mittag_leffler, ML_MAX_ABS_Z, ML_MIN_ALPHA};
