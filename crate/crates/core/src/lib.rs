//! Dirac-harmonic maps from a flat torus into Riemannian targets carrying an
//! orthogonal connection with torsion.
//!
//! The crate is organised bottom-up:
//!
//! * [`clifford`] - the two-dimensional Clifford action on rank-2 spinors.
//! * [`target`] - target charts: metric, torsion, Christoffel symbols,
//!   Cartan decomposition and curvature with and without torsion.
//! * [`fields`] - maps and vector spinors sampled on a periodic grid.
//! * [`operators`] - the twisted Dirac operator, connection Laplacian and the
//!   Weitzenböck comparison.
//! * [`energy`] - energies, Euler-Lagrange residuals, energy-momentum tensor
//!   and Hopf differential.
//! * [`solver`] - harmonic map flow plus kernel extraction for uncoupled
//!   solutions.
//! * [`cli`] - scenario files and the `verify` / `solve` / `report` commands.

pub mod cli;
pub mod clifford;
pub mod energy;
pub mod error;
pub mod fields;
pub mod operators;
pub mod solver;
pub mod target;
pub mod tensor;

pub use error::{Error, Result};
