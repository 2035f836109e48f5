//! Conflict-controlled dynamics `g(t, x, u, v)` over compact action sets,
//! and the min-max / max-min extremal selectors used by the aiming
//! procedure:
//!
//! ```text
//! u*      =  argmin_{u in P} max_{v in Q} < s, g(t, x, u, v) >
//! v-tilde =  argmax_{v in Q} min_{u in P} < s, g(t, x, u, v) >
//! ```
//!
//! Closed forms exist for separable-affine dynamics over Euclidean balls;
//! finite sets are handled by exhaustive enumeration. Unsupported
//! combinations are refused rather than silently approximated.

use crate::error::{FracError, Result};
use crate::grid::TimeGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;

/// Dense row-major matrix, just big enough for `B u` / `C v` terms and
/// their transposed products.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(FracError::DimensionMismatch(
                "matrix must be nonempty".into(),
            ));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(FracError::DimensionMismatch(
                    "matrix rows have inconsistent lengths".into(),
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut data = vec![0.0; n * n];
        for (i, &e) in entries.iter().enumerate() {
            data[i * n + i] = e;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// `A v` for `v` of length `cols`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `A^T s` for `s` of length `rows`.
    pub fn tr_mul_vec(&self, s: &[f64]) -> Vec<f64> {
        debug_assert_eq!(s.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &s_i) in self.data.chunks_exact(self.cols).zip(s) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * s_i;
            }
        }
        out
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Compact action set: a Euclidean ball around the origin or an explicit
/// finite point list.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionSet {
    Ball { radius: f64, dim: usize },
    Finite { points: Vec<Vec<f64>> },
}

impl ActionSet {
    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(FracError::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if dim == 0 {
            return Err(FracError::InvalidParameter(
                "ball dim must be positive".into(),
            ));
        }
        Ok(Self::Ball { radius, dim })
    }

    pub fn finite(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(FracError::InvalidParameter(
                "finite action set must be nonempty".into(),
            ));
        };
        let dim = first.len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(FracError::DimensionMismatch(
                "finite action set points must share a positive dimension".into(),
            ));
        }
        Ok(Self::Finite { points })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { dim, .. } => *dim,
            Self::Finite { points } => points[0].len(),
        }
    }

    /// Membership: balls up to `tol` on the norm, finite sets by exact
    /// sample equality.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.dim() {
            return false;
        }
        match self {
            Self::Ball { radius, .. } => norm(v) <= radius + tol,
            Self::Finite { points } => points.iter().any(|p| p.as_slice() == v),
        }
    }

    /// Uniform draw: uniform density inside the ball (direction uniform on
    /// the sphere, radius `R u^{1/dim}`), uniform choice over finite points.
    /// Consumes a fixed number of RNG draws per call for a given set shape.
    pub(crate) fn sample_uniform(&self, rng: &mut ChaCha12Rng) -> Vec<f64> {
        match self {
            Self::Finite { points } => points[rng.gen_range(0..points.len())].clone(),
            Self::Ball { radius, dim } => {
                let mut gauss = Vec::with_capacity(dim + 1);
                while gauss.len() < *dim {
                    let u1: f64 = rng.gen();
                    let u2: f64 = rng.gen();
                    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
                    let th = 2.0 * PI * u2;
                    gauss.push(r * th.cos());
                    gauss.push(r * th.sin());
                }
                gauss.truncate(*dim);
                let u: f64 = rng.gen();
                let target = radius * u.powf(1.0 / *dim as f64);
                let n = norm(&gauss);
                if n == 0.0 {
                    return vec![0.0; *dim];
                }
                gauss.iter().map(|g| g / n * target).collect()
            }
        }
    }
}

/// Piecewise-constant control samples: value `j` acts on `[t_j, t_{j+1})`,
/// so a grid with `k+1` nodes carries `k` values.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlRealization {
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
}

impl ControlRealization {
    pub fn new(grid: TimeGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() + 1 != grid.len() {
            return Err(FracError::DimensionMismatch(format!(
                "expected {} control values for {} nodes, got {}",
                grid.len() - 1,
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Check that every sample lies in the action set (balls with the given
    /// norm slack, finite sets exactly).
    pub fn validate_membership(&self, set: &ActionSet, tol: f64) -> Result<()> {
        for (j, v) in self.values.iter().enumerate() {
            if !set.contains(v, tol) {
                return Err(FracError::InvalidParameter(format!(
                    "control value at cell {j} lies outside its action set"
                )));
            }
        }
        Ok(())
    }
}

/// Boxed drift evaluator `(t, x) -> vector`.
pub type DriftEval = Box<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
/// Boxed full evaluator `(t, x, u, v) -> vector`.
pub type FullEval = Box<dyn Fn(f64, &[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync>;

/// Structure of the dynamics evaluator.
pub enum DynamicsKind {
    /// `g = drift(t, x) + B u + C v`; the control and disturbance enter
    /// affinely and decoupled.
    SeparableAffine {
        drift: DriftEval,
        b: Matrix,
        c: Matrix,
    },
    /// Opaque evaluator; only finite action sets can be optimized over.
    Blackbox { eval: FullEval },
}

/// Conflict-controlled dynamics with declared Lipschitz (`lambda_g`) and
/// growth (`c_g`) constants.
pub struct GameDynamics {
    kind: DynamicsKind,
    n: usize,
    n_u: usize,
    n_v: usize,
    lambda_g: f64,
    c_g: f64,
}

impl std::fmt::Debug for GameDynamics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GameDynamics")
            .field(
                "kind",
                &match self.kind {
                    DynamicsKind::SeparableAffine { .. } => "separable_affine",
                    DynamicsKind::Blackbox { .. } => "blackbox",
                },
            )
            .field("n", &self.n)
            .field("n_u", &self.n_u)
            .field("n_v", &self.n_v)
            .field("lambda_g", &self.lambda_g)
            .field("c_g", &self.c_g)
            .finish()
    }
}

fn check_constants(lambda_g: f64, c_g: f64) -> Result<()> {
    if !(lambda_g.is_finite() && lambda_g > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "lambda_g must be positive, got {lambda_g}"
        )));
    }
    if !(c_g.is_finite() && c_g > 0.0) {
        return Err(FracError::InvalidParameter(format!(
            "c_g must be positive, got {c_g}"
        )));
    }
    Ok(())
}

impl GameDynamics {
    /// Separable-affine dynamics `g = drift(t,x) + B u + C v`; the state
    /// dimension is `B.rows()` (= `C.rows()`), the action dimensions come
    /// from the matrix column counts.
    pub fn separable_affine<F>(
        drift: F,
        b: Matrix,
        c: Matrix,
        lambda_g: f64,
        c_g: f64,
    ) -> Result<Self>
    where
        F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if b.rows() != c.rows() {
            return Err(FracError::DimensionMismatch(format!(
                "B has {} rows but C has {}",
                b.rows(),
                c.rows()
            )));
        }
        check_constants(lambda_g, c_g)?;
        let (n, n_u, n_v) = (b.rows(), b.cols(), c.cols());
        Ok(Self {
            kind: DynamicsKind::SeparableAffine {
                drift: Box::new(drift),
                b,
                c,
            },
            n,
            n_u,
            n_v,
            lambda_g,
            c_g,
        })
    }

    /// Opaque dynamics evaluator with explicit dimensions.
    pub fn blackbox<F>(
        n: usize,
        n_u: usize,
        n_v: usize,
        eval: F,
        lambda_g: f64,
        c_g: f64,
    ) -> Result<Self>
    where
        F: Fn(f64, &[f64], &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if n == 0 || n_u == 0 || n_v == 0 {
            return Err(FracError::DimensionMismatch(
                "dynamics dimensions must be positive".into(),
            ));
        }
        check_constants(lambda_g, c_g)?;
        Ok(Self {
            kind: DynamicsKind::Blackbox {
                eval: Box::new(eval),
            },
            n,
            n_u,
            n_v,
            lambda_g,
            c_g,
        })
    }

    pub fn eval(&self, t: f64, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        match &self.kind {
            DynamicsKind::SeparableAffine { drift, b, c } => {
                let mut out = drift(t, x);
                let bu = b.mul_vec(u);
                let cv = c.mul_vec(v);
                for i in 0..out.len() {
                    out[i] += bu[i] + cv[i];
                }
                out
            }
            DynamicsKind::Blackbox { eval } => eval(t, x, u, v),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn lambda_g(&self) -> f64 {
        self.lambda_g
    }

    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.kind, DynamicsKind::SeparableAffine { .. })
    }

    pub(crate) fn kind(&self) -> &DynamicsKind {
        &self.kind
    }

    /// Sampling estimate of the state-Lipschitz constant: the largest
    /// finite-difference quotient `|g(t,x,u,v) - g(t,y,u,v)| / |x - y|`
    /// over random probes in the ball of the given radius. A diagnostic
    /// for the declared `lambda_g`, not a proof.
    pub fn estimate_state_lipschitz(
        &self,
        radius: f64,
        horizon: f64,
        p: &ActionSet,
        q: &ActionSet,
        samples: usize,
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let t = rng.gen::<f64>() * horizon;
            let sample_state = |rng: &mut ChaCha12Rng| -> Vec<f64> {
                (0..self.n)
                    .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * radius)
                    .collect()
            };
            let x = sample_state(&mut rng);
            let y = sample_state(&mut rng);
            let u = p.sample_uniform(&mut rng);
            let v = q.sample_uniform(&mut rng);
            let gx = self.eval(t, &x, &u, &v);
            let gy = self.eval(t, &y, &u, &v);
            let dist = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist > 1e-12 {
                let diff = gx
                    .iter()
                    .zip(&gy)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(diff / dist);
            }
        }
        worst
    }

    /// Sampling spot-check of the declared growth constant: worst observed
    /// `|g| / ((1 + |x|) c_g)` over random probes; values above 1 mean the
    /// declaration is violated somewhere.
    pub fn growth_margin(
        &self,
        radius: f64,
        horizon: f64,
        p: &ActionSet,
        q: &ActionSet,
        samples: usize,
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let t = rng.gen::<f64>() * horizon;
            let x: Vec<f64> = (0..self.n)
                .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * radius)
                .collect();
            let u = p.sample_uniform(&mut rng);
            let v = q.sample_uniform(&mut rng);
            let g = self.eval(t, &x, &u, &v);
            worst = worst.max(norm(&g) / ((1.0 + norm(&x)) * self.c_g));
        }
        worst
    }
}

/// Minimizer of a linear objective `< w, u >` over an action set; the
/// degenerate direction `w = 0` resolves to the origin for balls and the
/// lowest index for finite sets.
fn minimize_linear(w: &[f64], set: &ActionSet) -> Vec<f64> {
    match set {
        ActionSet::Ball { radius, dim } => {
            let n = norm(w);
            if n == 0.0 {
                vec![0.0; *dim]
            } else {
                w.iter().map(|c| -radius * c / n).collect()
            }
        }
        ActionSet::Finite { points } => {
            let mut best = 0;
            let mut best_val = dot(w, &points[0]);
            for (i, p) in points.iter().enumerate().skip(1) {
                let val = dot(w, p);
                if val < best_val {
                    best = i;
                    best_val = val;
                }
            }
            points[best].clone()
        }
    }
}

/// Mirror image: maximizer of `< w, v >`.
fn maximize_linear(w: &[f64], set: &ActionSet) -> Vec<f64> {
    match set {
        ActionSet::Ball { radius, dim } => {
            let n = norm(w);
            if n == 0.0 {
                vec![0.0; *dim]
            } else {
                w.iter().map(|c| radius * c / n).collect()
            }
        }
        ActionSet::Finite { points } => {
            let mut best = 0;
            let mut best_val = dot(w, &points[0]);
            for (i, p) in points.iter().enumerate().skip(1) {
                let val = dot(w, p);
                if val > best_val {
                    best = i;
                    best_val = val;
                }
            }
            points[best].clone()
        }
    }
}

fn check_selector_dims(
    dyn_: &GameDynamics,
    x: &[f64],
    s: &[f64],
    p: &ActionSet,
    q: &ActionSet,
) -> Result<()> {
    if x.len() != dyn_.n() || s.len() != dyn_.n() {
        return Err(FracError::DimensionMismatch(format!(
            "state/direction length must be {}, got x: {}, s: {}",
            dyn_.n(),
            x.len(),
            s.len()
        )));
    }
    if p.dim() != dyn_.n_u() || q.dim() != dyn_.n_v() {
        return Err(FracError::DimensionMismatch(format!(
            "action sets must have dims {} and {}, got {} and {}",
            dyn_.n_u(),
            dyn_.n_v(),
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

/// `argmin_{u in P} max_{v in Q} < s, g(t, x, u, v) >`.
///
/// Separable dynamics decouple the players, so the minimizer depends only
/// on `B^T s`: the ball closed form is `-r_P B^T s / |B^T s|` (origin when
/// degenerate), finite sets are enumerated with lowest-index tie-breaking.
/// Blackbox dynamics require both sets finite.
pub fn extremal_u(
    dyn_: &GameDynamics,
    t: f64,
    x: &[f64],
    s: &[f64],
    p: &ActionSet,
    q: &ActionSet,
) -> Result<Vec<f64>> {
    check_selector_dims(dyn_, x, s, p, q)?;
    match dyn_.kind() {
        DynamicsKind::SeparableAffine { b, .. } => Ok(minimize_linear(&b.tr_mul_vec(s), p)),
        DynamicsKind::Blackbox { .. } => {
            let (ActionSet::Finite { points: pu }, ActionSet::Finite { points: qv }) = (p, q)
            else {
                return Err(FracError::UnsupportedCombination(
                    "blackbox dynamics require finite action sets for the selectors".into(),
                ));
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, u) in pu.iter().enumerate() {
                let inner = qv
                    .iter()
                    .map(|v| dot(s, &dyn_.eval(t, x, u, v)))
                    .fold(f64::NEG_INFINITY, f64::max);
                if best.is_none_or(|(_, bv)| inner < bv) {
                    best = Some((i, inner));
                }
            }
            Ok(pu[best.expect("finite sets are nonempty").0].clone())
        }
    }
}

/// `argmax_{v in Q} min_{u in P} < s, g(t, x, u, v) >`: the mirror image of
/// [`extremal_u`]; the ball closed form is `+r_Q C^T s / |C^T s|`.
pub fn extremal_v(
    dyn_: &GameDynamics,
    t: f64,
    x: &[f64],
    s: &[f64],
    p: &ActionSet,
    q: &ActionSet,
) -> Result<Vec<f64>> {
    check_selector_dims(dyn_, x, s, p, q)?;
    match dyn_.kind() {
        DynamicsKind::SeparableAffine { c, .. } => Ok(maximize_linear(&c.tr_mul_vec(s), q)),
        DynamicsKind::Blackbox { .. } => {
            let (ActionSet::Finite { points: pu }, ActionSet::Finite { points: qv }) = (p, q)
            else {
                return Err(FracError::UnsupportedCombination(
                    "blackbox dynamics require finite action sets for the selectors".into(),
                ));
            };
            let mut best: Option<(usize, f64)> = None;
            for (j, v) in qv.iter().enumerate() {
                let inner = pu
                    .iter()
                    .map(|u| dot(s, &dyn_.eval(t, x, u, v)))
                    .fold(f64::INFINITY, f64::min);
                if best.is_none_or(|(_, bv)| inner > bv) {
                    best = Some((j, inner));
                }
            }
            Ok(qv[best.expect("finite sets are nonempty").0].clone())
        }
    }
}

/// Result of the saddle-point check: both one-sided values and their gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleCheck {
    pub minmax: f64,
    pub maxmin: f64,
    /// `minmax - maxmin`; weak duality forces it `>= 0` up to rounding, and
    /// separable dynamics drive it to 0.
    pub gap: f64,
}

/// Compare `min_u max_v < s, g >` against `max_v min_u < s, g >`.
///
/// Supported: finite x finite sets for any dynamics (full enumeration), or
/// separable-affine dynamics where each set is a ball or finite.
pub fn check_saddle(
    dyn_: &GameDynamics,
    t: f64,
    x: &[f64],
    s: &[f64],
    p: &ActionSet,
    q: &ActionSet,
) -> Result<SaddleCheck> {
    check_selector_dims(dyn_, x, s, p, q)?;
    if let (ActionSet::Finite { points: pu }, ActionSet::Finite { points: qv }) = (p, q) {
        let payoff: Vec<Vec<f64>> = pu
            .iter()
            .map(|u| qv.iter().map(|v| dot(s, &dyn_.eval(t, x, u, v))).collect())
            .collect();
        let minmax = payoff
            .iter()
            .map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min);
        let maxmin = (0..qv.len())
            .map(|j| {
                payoff
                    .iter()
                    .map(|row| row[j])
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(SaddleCheck {
            minmax,
            maxmin,
            gap: minmax - maxmin,
        });
    }
    match dyn_.kind() {
        DynamicsKind::SeparableAffine { drift, b, c } => {
            let base = dot(s, &drift(t, x));
            let u_term = dot(&b.tr_mul_vec(s), &minimize_linear(&b.tr_mul_vec(s), p));
            let v_term = dot(&c.tr_mul_vec(s), &maximize_linear(&c.tr_mul_vec(s), q));
            // The two orders of combining the decoupled terms are the two
            // one-sided values.
            let minmax = (base + u_term) + v_term;
            let maxmin = (base + v_term) + u_term;
            Ok(SaddleCheck {
                minmax,
                maxmin,
                gap: minmax - maxmin,
            })
        }
        DynamicsKind::Blackbox { .. } => Err(FracError::UnsupportedCombination(
            "saddle check over balls needs separable-affine dynamics".into(),
        )),
    }
}
