//! Time grids and grid-sampled functions: the discrete carriers for
//! trajectories, control histories and operator outputs.

use crate::error::{FracError, Result};

/// Relative slack (against the horizon) when deciding whether a node list
/// is uniform. Wide enough to absorb nodes that went through a
/// 12-significant-digit text round trip.
const UNIFORMITY_REL_TOL: f64 = 1e-9;

/// Fractional order constrained to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    /// Build an order, rejecting the boundary values 0 and 1.
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(FracError::InvalidOrder(alpha))
        }
    }

    /// The raw order value.
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Partition of `[0, T]`: strictly increasing nodes starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    /// `Some(h)` when all steps equal `h` (up to rounding).
    spacing: Option<f64>,
}

impl TimeGrid {
    /// Uniform grid with `steps >= 1` cells over `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(FracError::InvalidGrid(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(FracError::InvalidGrid(
                "a grid needs at least one step".into(),
            ));
        }
        let n = steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|i| i as f64 * horizon / n).collect();
        // Pin the endpoint so horizon comparisons are exact.
        nodes[steps] = horizon;
        Ok(Self {
            nodes,
            spacing: Some(horizon / n),
        })
    }

    /// Uniform grid whose step divides the horizon (to 1e-9 relative).
    pub fn uniform_with_step(horizon: f64, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(FracError::InvalidGrid(format!(
                "step must be positive and finite, got {step}"
            )));
        }
        let ratio = horizon / step;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(FracError::InvalidGrid(format!(
                "step {step} does not divide horizon {horizon}"
            )));
        }
        Self::uniform(horizon, steps as usize)
    }

    /// Grid from explicit nodes; detects uniform spacing.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(FracError::InvalidGrid("need at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(FracError::InvalidGrid(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        for w in nodes.windows(2) {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(FracError::InvalidGrid(format!(
                    "nodes must be finite and strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        let horizon = *nodes.last().expect("len >= 2");
        let h0 = nodes[1] - nodes[0];
        let uniform = nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h0).abs() <= UNIFORMITY_REL_TOL * horizon);
        let spacing = uniform.then(|| horizon / (nodes.len() - 1) as f64);
        Ok(Self { nodes, spacing })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes (cells + 1).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of node `idx`.
    pub fn t(&self, idx: usize) -> f64 {
        self.nodes[idx]
    }

    /// The right endpoint T.
    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("grids have at least two nodes")
    }

    /// Largest step of the partition.
    pub fn diameter(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// `Some(h)` for uniform grids, `None` otherwise.
    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }
}

/// Vector-valued samples on a [`TimeGrid`], stored flat (node-major).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TimeGrid,
    dim: usize,
    data: Vec<f64>,
}

/// Trajectories are grid functions; the alias marks intent at call sites.
pub type Trajectory = GridFunction;

impl GridFunction {
    /// Wrap flat node-major data (`data.len() == grid.len() * dim`).
    pub fn new(grid: TimeGrid, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(FracError::DimensionMismatch("dim must be positive".into()));
        }
        if data.len() != grid.len() * dim {
            return Err(FracError::DimensionMismatch(format!(
                "expected {} values ({} nodes x dim {}), got {}",
                grid.len() * dim,
                grid.len(),
                dim,
                data.len()
            )));
        }
        Ok(Self { grid, dim, data })
    }

    /// Build from one row per node.
    pub fn from_rows(grid: TimeGrid, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != grid.len() {
            return Err(FracError::DimensionMismatch(format!(
                "expected {} rows, got {}",
                grid.len(),
                rows.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(FracError::DimensionMismatch(
                    "rows have inconsistent lengths".into(),
                ));
            }
            data.extend_from_slice(row);
        }
        Self::new(grid, dim, data)
    }

    /// Sample a vector-valued function of time at every node.
    pub fn sample<F>(grid: TimeGrid, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let mut data = Vec::with_capacity(grid.len() * dim);
        for &t in grid.nodes() {
            let v = f(t);
            if v.len() != dim {
                return Err(FracError::DimensionMismatch(format!(
                    "sampler returned {} components, expected {dim}",
                    v.len()
                )));
            }
            data.extend_from_slice(&v);
        }
        Self::new(grid, dim, data)
    }

    /// Sample a scalar function of time at every node.
    pub fn sample_scalar<F>(grid: TimeGrid, f: F) -> Self
    where
        F: Fn(f64) -> f64,
    {
        let data = grid.nodes().iter().map(|&t| f(t)).collect();
        Self { grid, dim: 1, data }
    }

    /// All-zero samples.
    pub fn zeros(grid: TimeGrid, dim: usize) -> Self {
        let data = vec![0.0; grid.len() * dim];
        Self { grid, dim, data }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.grid.len()
    }

    /// The sample at node `idx`.
    pub fn value(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Flat node-major view of all samples.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Subtract the node-0 value from every sample, anchoring the function
    /// at the origin.
    pub fn shifted_to_origin(&self) -> Self {
        let origin: Vec<f64> = self.value(0).to_vec();
        let mut data = self.data.clone();
        for node in 0..self.node_count() {
            for d in 0..self.dim {
                data[node * self.dim + d] -= origin[d];
            }
        }
        Self {
            grid: self.grid.clone(),
            dim: self.dim,
            data,
        }
    }

    /// Euclidean norm of the sample at node `idx`.
    pub fn norm_at(&self, idx: usize) -> f64 {
        self.value(idx).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frac_order_rejects_boundaries() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.0).is_err());
        assert!(FracOrder::new(-0.1).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
        assert_eq!(FracOrder::new(0.5).unwrap().value(), 0.5);
    }

    #[test]
    fn uniform_grid_hits_endpoint_exactly() {
        let g = TimeGrid::uniform(5.0, 10_000).unwrap();
        assert_eq!(g.len(), 10_001);
        assert_eq!(g.t(0), 0.0);
        assert_eq!(g.horizon(), 5.0);
        assert_eq!(g.spacing(), Some(0.0005));
    }

    #[test]
    fn uniform_with_step_validates_divisibility() {
        let g = TimeGrid::uniform_with_step(5.0, 0.0005).unwrap();
        assert_eq!(g.len(), 10_001);
        assert!(TimeGrid::uniform_with_step(1.0, 0.3).is_err());
    }

    #[test]
    fn from_nodes_detects_uniformity() {
        let g = TimeGrid::from_nodes(vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(g.spacing(), Some(0.25));
        let g = TimeGrid::from_nodes(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        assert_eq!(g.spacing(), None);
        assert_eq!(g.diameter(), 0.5);
    }

    #[test]
    fn uniformity_survives_a_text_round_trip() {
        // Nodes printed with 12 significant digits and re-parsed must still
        // classify as uniform.
        let g = TimeGrid::uniform(5.0, 10_000).unwrap();
        let reparsed: Vec<f64> = g
            .nodes()
            .iter()
            .map(|t| format!("{t:.11e}").parse::<f64>().unwrap())
            .collect();
        let g2 = TimeGrid::from_nodes(reparsed).unwrap();
        assert!(g2.spacing().is_some(), "round-tripped grid lost uniformity");
    }

    #[test]
    fn from_nodes_rejects_bad_orderings() {
        assert!(TimeGrid::from_nodes(vec![0.0]).is_err());
        assert!(TimeGrid::from_nodes(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::from_nodes(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::from_nodes(vec![0.0, 0.3, 0.1]).is_err());
    }

    #[test]
    fn grid_function_shape_checks() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        assert!(GridFunction::new(g.clone(), 2, vec![0.0; 6]).is_ok());
        assert!(GridFunction::new(g.clone(), 2, vec![0.0; 5]).is_err());
        assert!(GridFunction::new(g, 0, vec![]).is_err());
    }

    #[test]
    fn shifted_to_origin_zeroes_node_zero() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        let f =
            GridFunction::from_rows(g, &[vec![1.0, -2.0], vec![3.0, 0.0], vec![5.0, 2.0]]).unwrap();
        let s = f.shifted_to_origin();
        assert_eq!(s.value(0), &[0.0, 0.0]);
        assert_eq!(s.value(2), &[4.0, 4.0]);
    }

    proptest! {
        #[test]
        fn uniform_grid_diameter_matches_spacing(steps in 1usize..200, horizon in 0.1f64..50.0) {
            let g = TimeGrid::uniform(horizon, steps).unwrap();
            let h = g.spacing().unwrap();
            prop_assert!((g.diameter() - h).abs() <= 1e-12 * horizon);
            prop_assert_eq!(g.len(), steps + 1);
        }
    }
}
