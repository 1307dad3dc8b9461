use std::io::Write;

use super::solve::{fmt, ResultFile};
use crate::Result;

pub const COLUMNS: [&str; 18] = [
    "scenario",
    "total",
    "dirichlet",
    "spinor",
    "torsion_coupling",
    "curvature_term",
    "tension",
    "map_residual",
    "spinor_residual",
    "plain_map_residual",
    "plain_spinor_residual",
    "coupling",
    "trace_norm",
    "antisymmetric_norm",
    "divergence_norm",
    "hopf_dbar_norm",
    "kernel_dimension",
    "smallest_singular_value",
];

/// One CSV row per result, columns as in [`COLUMNS`]. Missing optional
/// values are empty cells.
pub fn write_report(results: &[ResultFile], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in results {
        let s = &r.summary;
        let e = &s.energy;
        let curvature = s.curvature_energy.as_ref().and_then(|c| c.curvature_term).map(fmt).unwrap_or_default();
        let sigma = s.kernel.singular_values.first().copied().map(fmt).unwrap_or_default();
        w.write_record([
            r.scenario.clone(),
            fmt(e.total),
            fmt(e.dirichlet),
            fmt(e.spinor),
            fmt(e.torsion_coupling),
            curvature,
            fmt(s.el_report.tension),
            fmt(s.el_report.torsion.map),
            fmt(s.el_report.torsion.spinor),
            fmt(s.el_report.plain.map),
            fmt(s.el_report.plain.spinor),
            fmt(s.el_report.coupling),
            fmt(s.conservation.trace_norm),
            fmt(s.conservation.antisymmetric_norm),
            fmt(s.conservation.divergence_norm),
            fmt(s.conservation.hopf_dbar_norm),
            s.kernel.dimension.to_string(),
            sigma,
        ])?;
    }
    w.flush()?;
    Ok(())
}
