use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Fourier differentiation.
    #[default]
    Spectral,
    /// Fourth-order central differences.
    Central4,
}

/// The flat torus `[0, L)²` with `N × N` nodes and constant conformal factor
/// `λ`: domain metric `λ² δ`, orthonormal frame `e_α = λ⁻¹ ∂_α`.
///
/// Node `(a, b)` sits at `(a h, b h)` and has flat index `a + N b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub nodes_per_side: usize,
    pub side_length: f64,
    pub conformal_factor: f64,
    #[serde(default)]
    pub derivative: DerivativeMode,
}

impl GridGeometry {
    pub fn new(nodes_per_side: usize, side_length: f64, conformal_factor: f64) -> Result<Self> {
        if nodes_per_side < 4 {
            return Err(Error::InvalidConfig(format!("need at least 4 nodes per side, got {nodes_per_side}")));
        }
        if !(side_length > 0.0 && side_length.is_finite()) {
            return Err(Error::InvalidConfig(format!("side length must be positive, got {side_length}")));
        }
        if !(conformal_factor > 0.0 && conformal_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!("conformal factor must be positive, got {conformal_factor}")));
        }
        Ok(Self { nodes_per_side, side_length, conformal_factor, derivative: DerivativeMode::Spectral })
    }

    pub fn with_derivative(mut self, mode: DerivativeMode) -> Self {
        self.derivative = mode;
        self
    }

    pub fn with_conformal_factor(mut self, lambda: f64) -> Self {
        self.conformal_factor = lambda;
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_side * self.nodes_per_side
    }

    pub fn spacing(&self) -> f64 {
        self.side_length / self.nodes_per_side as f64
    }

    /// Riemannian area of one grid cell, `λ² h²`.
    pub fn area_weight(&self) -> f64 {
        let h = self.spacing();
        self.conformal_factor * self.conformal_factor * h * h
    }

    pub fn position(&self, node: usize) -> [f64; 2] {
        let n = self.nodes_per_side;
        let h = self.spacing();
        [(node % n) as f64 * h, (node / n) as f64 * h]
    }

    /// Angular wavenumber of DFT bin `q`; bins at and above `N/2` are negative.
    pub fn wavenumber(&self, q: usize) -> f64 {
        let n = self.nodes_per_side as i64;
        let m = if (q as i64) < n / 2 { q as i64 } else { q as i64 - n };
        2.0 * PI * m as f64 / self.side_length
    }
}

/// Periodic differentiation along one grid axis, for fields stored node-major
/// with `stride` interleaved components per node.
///
/// Spectral mode gives the Nyquist bin wavenumber `-π/h` for complex data.
/// Real fields take the real part, so their Nyquist derivative is zero.
#[derive(Clone)]
pub struct Differentiator {
    grid: GridGeometry,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl fmt::Debug for Differentiator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Differentiator").field("grid", &self.grid).finish()
    }
}

impl Differentiator {
    pub fn new(grid: &GridGeometry) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.nodes_per_side;
        Self {
            grid: *grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            wavenumbers: (0..n).map(|q| grid.wavenumber(q)).collect(),
        }
    }

    pub fn grid(&self) -> &GridGeometry {
        &self.grid
    }

    /// Coordinate derivative `∂/∂x_axis` of every component.
    pub fn derivative(&self, data: &[Complex64], stride: usize, axis: usize) -> Vec<Complex64> {
        match self.grid.derivative {
            DerivativeMode::Spectral => {
                let k = &self.wavenumbers;
                self.fourier_multiply(data, stride, axis, |q| Complex64::new(0.0, k[q]))
            }
            DerivativeMode::Central4 => self.central4(data, stride, axis),
        }
    }

    pub fn derivative_real(&self, data: &[f64], stride: usize, axis: usize) -> Vec<f64> {
        let c: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.derivative(&c, stride, axis).into_iter().map(|v| v.re).collect()
    }

    /// `∂̄ = ½(∂_x + i ∂_y)` in the isothermal coordinate `z = x + iy`.
    pub fn dbar(&self, data: &[Complex64]) -> Vec<Complex64> {
        let dx = self.derivative(data, 1, 0);
        let dy = self.derivative(data, 1, 1);
        dx.iter().zip(&dy).map(|(a, b)| 0.5 * (a + Complex64::new(0.0, 1.0) * b)).collect()
    }

    /// Solves `(1 - s Δ) u = f` per real component, with `Δ` the symbol of
    /// [`Self::derivative_real`] applied twice.
    pub fn helmholtz_solve(&self, data: &[f64], stride: usize, s: f64) -> Vec<f64> {
        let c: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.helmholtz(&c, stride, s, true).into_iter().map(|v| v.re).collect()
    }

    /// Complex counterpart of [`Self::helmholtz_solve`], matching [`Self::derivative`].
    pub fn helmholtz_solve_complex(&self, data: &[Complex64], stride: usize, s: f64) -> Vec<Complex64> {
        self.helmholtz(data, stride, s, false)
    }

    /// `-k²` for the second derivative on bin `q`.
    fn second_symbol(&self, q: usize, real: bool) -> f64 {
        let n = self.grid.nodes_per_side;
        match self.grid.derivative {
            DerivativeMode::Spectral if real && 2 * q == n => 0.0,
            DerivativeMode::Spectral => self.wavenumbers[q] * self.wavenumbers[q],
            DerivativeMode::Central4 => {
                let theta = 2.0 * PI * q as f64 / n as f64;
                let k = (8.0 * theta.sin() - (2.0 * theta).sin()) / (6.0 * self.grid.spacing());
                k * k
            }
        }
    }

    fn helmholtz(&self, data: &[Complex64], stride: usize, s: f64, real: bool) -> Vec<Complex64> {
        let n = self.grid.nodes_per_side;
        let k2: Vec<f64> = (0..n).map(|q| self.second_symbol(q, real)).collect();
        let mut spectrum = self.transform2(data, stride, false);
        for b in 0..n {
            for a in 0..n {
                let factor = 1.0 / (1.0 + s * (k2[a] + k2[b]));
                for comp in 0..stride {
                    spectrum[(a + n * b) * stride + comp] *= factor;
                }
            }
        }
        self.transform2(&spectrum, stride, true)
    }

    fn transform2(&self, data: &[Complex64], stride: usize, inverse: bool) -> Vec<Complex64> {
        let n = self.grid.nodes_per_side;
        let plan = if inverse { &self.inverse } else { &self.forward };
        let mut out = data.to_vec();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..2 {
            for comp in 0..stride {
                for other in 0..n {
                    for (t, slot) in line.iter_mut().enumerate() {
                        *slot = out[self.flat(axis, t, other) * stride + comp];
                    }
                    plan.process(&mut line);
                    for (t, v) in line.iter().enumerate() {
                        out[self.flat(axis, t, other) * stride + comp] = *v;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / (n * n) as f64;
            out.iter_mut().for_each(|v| *v *= scale);
        }
        out
    }

    #[inline]
    fn flat(&self, axis: usize, along: usize, other: usize) -> usize {
        let n = self.grid.nodes_per_side;
        if axis == 0 {
            along + n * other
        } else {
            other + n * along
        }
    }

    fn fourier_multiply(
        &self,
        data: &[Complex64],
        stride: usize,
        axis: usize,
        symbol: impl Fn(usize) -> Complex64,
    ) -> Vec<Complex64> {
        let n = self.grid.nodes_per_side;
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let scale = 1.0 / n as f64;
        for comp in 0..stride {
            for other in 0..n {
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[self.flat(axis, t, other) * stride + comp];
                }
                self.forward.process(&mut line);
                for (q, v) in line.iter_mut().enumerate() {
                    *v *= symbol(q) * scale;
                }
                self.inverse.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    out[self.flat(axis, t, other) * stride + comp] = *v;
                }
            }
        }
        out
    }

    fn central4(&self, data: &[Complex64], stride: usize, axis: usize) -> Vec<Complex64> {
        let n = self.grid.nodes_per_side;
        let inv = 1.0 / (12.0 * self.grid.spacing());
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        for other in 0..n {
            for t in 0..n {
                let at = |d: isize| self.flat(axis, (t as isize + d).rem_euclid(n as isize) as usize, other);
                let (p1, p2, m1, m2) = (at(1), at(2), at(-1), at(-2));
                let here = self.flat(axis, t, other);
                for comp in 0..stride {
                    let f = |idx: usize| data[idx * stride + comp];
                    out[here * stride + comp] = (f(m2) - 8.0 * f(m1) + 8.0 * f(p1) - f(p2)) * inv;
                }
            }
        }
        out
    }
}
