use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::energy::tension;
use crate::fields::{Background, MapField};
use crate::target::TargetChart;
use crate::{Error, Result};

/// One accepted step of the harmonic map flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub iteration: usize,
    pub energy: f64,
    pub tension_norm: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub map: MapField,
    pub trajectory: Vec<FlowRecord>,
    pub iterations: usize,
    pub converged: bool,
}

impl FlowResult {
    pub fn tension_norm(&self) -> f64 {
        self.trajectory.last().map_or(f64::NAN, |r| r.tension_norm)
    }

    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence { iterations: self.iterations, residual: self.tension_norm() })
        }
    }
}

fn dirichlet(bg: &Background) -> f64 {
    let w = bg.grid().area_weight();
    bg.frames().iter().map(|f| f.frame_derivative.iter().map(|x| 0.5 * x.dot(&(&f.g * x))).sum::<f64>()).sum::<f64>()
        * w
}

fn state(chart: &TargetChart, map: &MapField) -> Result<(f64, Vec<f64>, f64)> {
    let bg = Background::new(chart, map)?;
    let tau = tension(&bg)?;
    let norm = bg.vector_norm(&tau);
    Ok((dirichlet(&bg), tau, norm))
}

/// Preconditioned gradient flow `φ ← φ + s (1 − sλ⁻²Δ)⁻¹ τ(φ)` with step
/// halving until the Dirichlet energy does not increase (up to a few ulps).
///
/// Reports `converged = false` on hitting `max_iterations`, with the partial
/// trajectory. Leaving the chart domain is an
/// error only when no halving keeps the map inside.
pub fn run_flow(chart: &TargetChart, map0: &MapField, config: &SolverConfig) -> Result<FlowResult> {
    config.validate()?;
    let mut map = map0.clone();
    let (mut energy, mut tau, mut norm) = state(chart, &map)?;
    let mut trajectory = vec![FlowRecord { iteration: 0, energy, tension_norm: norm, step: 0.0 }];
    let n = map.dim();
    let lambda = map.grid().conformal_factor;
    let diff = crate::fields::Differentiator::new(map.grid());
    let mut step = config.step_size;
    let mut iterations = 0;
    while norm > config.map_tolerance && iterations < config.max_iterations {
        iterations += 1;
        let mut accepted = None;
        let mut s = step;
        let mut last_err = None;
        for _ in 0..=super::MAX_HALVINGS {
            let direction = diff.helmholtz_solve(&tau, n, s / (lambda * lambda));
            let candidate = map.perturbed(&direction, s);
            match state(chart, &candidate) {
                Ok((e, t, nm)) if e <= energy + 8.0 * f64::EPSILON * energy.abs() => {
                    accepted = Some((candidate, e, t, nm));
                    break;
                }
                Ok(_) => {}
                Err(e @ (Error::OutsideChartDomain { .. } | Error::MetricNotPositiveDefinite { .. })) => {
                    last_err = Some(e)
                }
                Err(e) => return Err(e),
            }
            s *= 0.5;
        }
        let Some((candidate, e, t, nm)) = accepted else {
            if let Some(e) = last_err {
                return Err(e);
            }
            break;
        };
        map = candidate;
        energy = e;
        tau = t;
        norm = nm;
        trajectory.push(FlowRecord { iteration: iterations, energy, tension_norm: norm, step: s });
        // let the step recover after a halving
        step = (2.0 * s).min(config.step_size);
    }
    Ok(FlowResult { converged: norm <= config.map_tolerance, map, trajectory, iterations })
}

/// [`run_flow`], failing with `NonConvergence` when the tolerance is not met.
pub fn harmonic_map_flow(chart: &TargetChart, map0: &MapField, config: &SolverConfig) -> Result<FlowResult> {
    run_flow(chart, map0, config)?.into_converged()
}
