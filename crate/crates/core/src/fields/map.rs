use num_complex::Complex64;

use super::grid::{Differentiator, GridGeometry};
use crate::target::TargetChart;
use crate::{Error, Result};

/// A map `φ` from the grid into one target chart.
///
/// Values are `φ^i(x) = slope_i · x + p^i(x)` with a periodic part `p` stored
/// node-major, component-minor. Non-zero slopes only make sense for targets
/// whose chart is a covering of a torus, e.g. `slope = 2π·degree/L`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapField {
    grid: GridGeometry,
    dim: usize,
    periodic: Vec<f64>,
    slope: Vec<[f64; 2]>,
}

impl MapField {
    pub fn new(grid: GridGeometry, dim: usize, periodic: Vec<f64>, slope: Vec<[f64; 2]>) -> Result<Self> {
        if periodic.len() != grid.node_count() * dim || slope.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "map field needs {} values and {dim} slopes, got {} and {}",
                grid.node_count() * dim,
                periodic.len(),
                slope.len()
            )));
        }
        Ok(Self { grid, dim, periodic, slope })
    }

    pub fn constant(grid: GridGeometry, value: &[f64]) -> Self {
        let periodic = (0..grid.node_count()).flat_map(|_| value.iter().copied()).collect();
        Self { grid, dim: value.len(), periodic, slope: vec![[0.0; 2]; value.len()] }
    }

    /// Degree-`degree` wrap of component 0 along `x`: `φ⁰ = degree · period · x / L`.
    pub fn wrap(grid: GridGeometry, dim: usize, degree: i32, period: f64) -> Self {
        let mut slope = vec![[0.0; 2]; dim];
        slope[0][0] = degree as f64 * period / grid.side_length;
        Self { grid, dim, periodic: vec![0.0; grid.node_count() * dim], slope }
    }

    pub fn grid(&self) -> &GridGeometry {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn periodic(&self) -> &[f64] {
        &self.periodic
    }

    pub fn periodic_mut(&mut self) -> &mut [f64] {
        &mut self.periodic
    }

    pub fn slope(&self) -> &[[f64; 2]] {
        &self.slope
    }

    pub fn value(&self, node: usize) -> Vec<f64> {
        let [x, y] = self.grid.position(node);
        (0..self.dim)
            .map(|i| self.periodic[node * self.dim + i] + self.slope[i][0] * x + self.slope[i][1] * y)
            .collect()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.grid.node_count()).flat_map(|node| self.value(node)).collect()
    }

    /// Coordinate derivative `∂φ/∂x_α`, node-major.
    pub fn coordinate_derivative(&self, diff: &Differentiator, alpha: usize) -> Vec<f64> {
        let mut d = diff.derivative_real(&self.periodic, self.dim, alpha);
        for (idx, v) in d.iter_mut().enumerate() {
            *v += self.slope[idx % self.dim][alpha];
        }
        d
    }

    /// `dφ(e_α) = λ⁻¹ ∂φ/∂x_α`, node-major.
    pub fn frame_derivative(&self, diff: &Differentiator, alpha: usize) -> Vec<f64> {
        let inv = 1.0 / self.grid.conformal_factor;
        self.coordinate_derivative(diff, alpha).into_iter().map(|v| v * inv).collect()
    }

    pub fn check_domain(&self, chart: &TargetChart) -> Result<()> {
        if chart.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "map of dimension {} into a {}-dimensional chart",
                self.dim,
                chart.dim()
            )));
        }
        (0..self.grid.node_count()).try_for_each(|node| chart.check_domain(&self.value(node)))
    }

    /// `self + t · direction` on the periodic part; slopes are kept.
    pub fn perturbed(&self, direction: &[f64], t: f64) -> Self {
        let mut out = self.clone();
        out.periodic.iter_mut().zip(direction).for_each(|(p, d)| *p += t * d);
        out
    }

    pub fn with_grid(&self, grid: GridGeometry) -> Self {
        Self { grid, ..self.clone() }
    }
}

/// A section `ψ = ψ^i ⊗ ∂/∂y^i` of `ΣM ⊗ φ⁻¹TN` on the grid.
///
/// Layout: node-major, then target index `i`, then the spinor component `s`
/// (`data[node * 2n + 2i + s]`).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSpinorField {
    dim: usize,
    data: Vec<Complex64>,
}

impl VectorSpinorField {
    pub fn zeros(grid: &GridGeometry, dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); grid.node_count() * 2 * dim] }
    }

    pub fn from_data(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(2 * dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} spinor values do not split into nodes of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// The same spinor `s` in slot `i` at every node.
    pub fn constant(grid: &GridGeometry, dim: usize, slot: usize, s: [Complex64; 2]) -> Self {
        let mut f = Self::zeros(grid, dim);
        for node in 0..grid.node_count() {
            f.set(node, slot, s);
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.data.len() / (2 * self.dim)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, node: usize, i: usize) -> [Complex64; 2] {
        let b = node * 2 * self.dim + 2 * i;
        [self.data[b], self.data[b + 1]]
    }

    #[inline]
    pub fn set(&mut self, node: usize, i: usize, s: [Complex64; 2]) {
        let b = node * 2 * self.dim + 2 * i;
        self.data[b] = s[0];
        self.data[b + 1] = s[1];
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn axpy(&self, t: f64, other: &Self) -> Self {
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b * t).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn check_paired(&self, map: &MapField) -> Result<()> {
        if self.dim != map.dim() || self.node_count() != map.grid().node_count() {
            return Err(Error::DimensionMismatch(format!(
                "spinor field ({} nodes, dim {}) not paired with map ({} nodes, dim {})",
                self.node_count(),
                self.dim,
                map.grid().node_count(),
                map.dim()
            )));
        }
        Ok(())
    }
}
