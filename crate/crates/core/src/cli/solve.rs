use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::fields::io::{write_map, write_spinor};
use crate::fields::GridGeometry;
use crate::solver::{run_flow, uncoupled_from_flow, Backend, FlowRecord, SolverSummary};
use crate::{Error, Result};

pub const RESULT_FILE: &str = "result.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";

/// Contents of `result.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub scenario: String,
    pub seed: u64,
    pub backend: Backend,
    pub grid: GridGeometry,
    pub summary: SolverSummary,
}

#[derive(Debug)]
pub enum SolveOutcome {
    Converged(Box<ResultFile>),
    /// Flow stopped at `max_iterations`; the trajectory and last map are on disk.
    NotConverged {
        iterations: usize,
        tension: f64,
    },
}

pub fn solve(scenario: &Scenario, out: &Path) -> Result<SolveOutcome> {
    let chart = scenario.chart()?;
    let map0 = scenario.initial_map(&chart)?;
    fs::create_dir_all(out)?;
    let flow = run_flow(&chart, &map0, &scenario.solver)?;
    write_trajectory(&out.join(TRAJECTORY_FILE), &flow.trajectory)?;
    if !flow.converged {
        write_map(out, "map", &flow.map)?;
        return Ok(SolveOutcome::NotConverged { iterations: flow.iterations, tension: flow.tension_norm() });
    }
    let result = uncoupled_from_flow(&chart, flow, &scenario.solver, scenario.curvature_mode())?;
    write_map(out, "map", &result.map)?;
    write_spinor(out, "psi", result.map.grid(), &result.psi)?;
    let file = ResultFile {
        scenario: scenario.id.clone(),
        seed: scenario.seed,
        backend: scenario.solver.backend,
        grid: *result.map.grid(),
        summary: result.summary,
    };
    fs::write(out.join(RESULT_FILE), serde_json::to_string_pretty(&file)?)?;
    Ok(SolveOutcome::Converged(Box::new(file)))
}

pub fn write_trajectory(path: &Path, trajectory: &[FlowRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "energy", "tension_norm", "step"])?;
    for r in trajectory {
        w.write_record([r.iteration.to_string(), fmt(r.energy), fmt(r.tension_norm), fmt(r.step)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<ResultFile> {
    let file: PathBuf = if path.is_dir() { path.join(RESULT_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file).map_err(|e| Error::Config(format!("cannot read {}: {e}", file.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", file.display())))
}

pub(super) fn fmt(v: f64) -> String {
    format!("{v:e}")
}
