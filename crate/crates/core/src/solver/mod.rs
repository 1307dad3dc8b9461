//! Uncoupled solutions: a harmonic map from a gradient flow, then a kernel
//! element of the twisted Dirac operator along it.

mod flow;
mod kernel;

use serde::{Deserialize, Serialize};

pub use flow::{harmonic_map_flow, run_flow, FlowRecord, FlowResult};
pub use kernel::{dirac_kernel_solve, KernelResult, KERNEL_RELATIVE_THRESHOLD};

use crate::energy::{
    curvature_coupling, el_residual, energy_curvature, energy_momentum, energy_torsion, f_tor, hopf_differential,
    tension, CurvatureMode, ElMode, EnergyReport,
};
use crate::fields::{Background, MapField, VectorSpinorField};
use crate::operators::{twisted_dirac, AssembledDiracOperator};
use crate::target::TargetChart;
use crate::{Error, Result};

pub(crate) const MAX_HALVINGS: usize = 30;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Dense,
    Iterative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub step_size: f64,
    pub max_iterations: usize,
    /// Bound on `‖τ(φ)‖_{L²}`.
    pub map_tolerance: f64,
    /// Bound on `‖D^Tor ψ‖ / ‖ψ‖`.
    pub kernel_tolerance: f64,
    pub backend: Backend,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_size: 1.0,
            max_iterations: 500,
            map_tolerance: 1e-8,
            kernel_tolerance: 1e-8,
            backend: Backend::Dense,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("solver.{name} must be positive, got {v}")))
            }
        };
        positive("step_size", self.step_size)?;
        positive("map_tolerance", self.map_tolerance)?;
        positive("kernel_tolerance", self.kernel_tolerance)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub map: f64,
    pub spinor: f64,
}

/// Residual norms of the pair in every relevant system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElReport {
    /// `‖τ(φ)‖`, the uncoupled map equation.
    pub tension: f64,
    /// Full system with torsion: `τ − 𝓡 − F^Tor` and `D^Tor ψ`.
    pub torsion: ResidualNorms,
    /// Torsion dropped: `τ − 𝓡` and `D̸ψ`.
    pub plain: ResidualNorms,
    pub curvature_term: Option<ResidualNorms>,
    /// `‖𝓡 + F^Tor‖`; an uncoupled pair solves the full system only if this vanishes.
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub dimension: usize,
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub operator_norm: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationSummary {
    pub trace_norm: f64,
    pub antisymmetric_norm: f64,
    pub divergence_norm: f64,
    pub hopf_dbar_norm: f64,
}

/// Everything written to `result.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub flow_iterations: usize,
    pub flow_converged: bool,
    pub energy: EnergyReport,
    pub curvature_energy: Option<EnergyReport>,
    pub el_report: ElReport,
    pub kernel: KernelSummary,
    pub conservation: ConservationSummary,
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    pub map: MapField,
    pub psi: VectorSpinorField,
    pub trajectory: Vec<FlowRecord>,
    pub summary: SolverSummary,
}

/// Flow to a harmonic map, then pick `ψ ∈ ker D^Tor` (or `ψ = 0`).
pub fn uncoupled_solution(
    chart: &TargetChart,
    map0: &MapField,
    config: &SolverConfig,
    curvature: Option<CurvatureMode>,
) -> Result<SolverResult> {
    let flow = harmonic_map_flow(chart, map0, config)?;
    uncoupled_from_flow(chart, flow, config, curvature)
}

/// The kernel step and diagnostics of [`uncoupled_solution`] for a finished flow.
pub fn uncoupled_from_flow(
    chart: &TargetChart,
    flow: FlowResult,
    config: &SolverConfig,
    curvature: Option<CurvatureMode>,
) -> Result<SolverResult> {
    let bg = Background::new(chart, &flow.map)?;
    let torsion = !chart.torsion_spec().is_zero();
    let op = AssembledDiracOperator::from_background(bg.clone(), torsion);
    let kernel = dirac_kernel_solve(&op, config)?;
    let psi = kernel.psi.clone();

    let res_tor = el_residual(&bg, &psi, ElMode::Torsion)?;
    let tau = tension(&bg)?;
    let r = curvature_coupling(&bg, &psi)?;
    let f = f_tor(&bg, &psi)?;
    let plain_map: Vec<f64> = tau.iter().zip(&r).map(|(t, r)| t - r).collect();
    let coupling: Vec<f64> = r.iter().zip(&f).map(|(r, f)| r + f).collect();
    let plain_spinor = bg.spinor_norm(&twisted_dirac(&bg, &psi, false)?);
    let (curvature_term, curvature_energy) = match curvature {
        Some(mode) => {
            let res = el_residual(&bg, &psi, ElMode::CurvatureTerm(mode))?;
            (
                Some(ResidualNorms { map: res.map_norm, spinor: res.spinor_norm }),
                Some(energy_curvature(&bg, &psi, mode)?),
            )
        }
        None => (None, None),
    };
    let em = energy_momentum(&bg, &psi)?;
    let hopf = hopf_differential(&bg, &psi)?;
    let summary = SolverSummary {
        flow_iterations: flow.iterations,
        flow_converged: flow.converged,
        energy: energy_torsion(&bg, &psi)?,
        curvature_energy,
        el_report: ElReport {
            tension: bg.vector_norm(&tau),
            torsion: ResidualNorms { map: res_tor.map_norm, spinor: res_tor.spinor_norm },
            plain: ResidualNorms { map: bg.vector_norm(&plain_map), spinor: plain_spinor },
            curvature_term,
            coupling: bg.vector_norm(&coupling),
        },
        kernel: KernelSummary {
            dimension: kernel.dimension,
            singular_values: kernel.singular_values,
            threshold: kernel.threshold,
            operator_norm: kernel.operator_norm,
            residual: kernel.residual,
            iterations: kernel.iterations,
        },
        conservation: ConservationSummary {
            trace_norm: em.trace_norm,
            antisymmetric_norm: em.antisymmetric_norm,
            divergence_norm: em.divergence_norm,
            hopf_dbar_norm: hopf.dbar_norm,
        },
    };
    Ok(SolverResult { map: flow.map, psi, trajectory: flow.trajectory, summary })
}
