use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::GridGeometry;
use super::map::{MapField, VectorSpinorField};
use crate::{Error, Result};

/// Shape description written next to every binary snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub field: String,
    pub dtype: String,
    pub layout: String,
    pub nodes_per_side: usize,
    pub side_length: f64,
    pub conformal_factor: f64,
    pub components: usize,
    pub component_labels: Vec<String>,
}

fn paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{name}.bin")), dir.join(format!("{name}.json")))
}

pub fn write_snapshot(dir: &Path, name: &str, meta: &SnapshotMeta, values: &[f64]) -> Result<()> {
    if values.len() != meta.nodes_per_side * meta.nodes_per_side * meta.components {
        return Err(Error::DimensionMismatch(format!("snapshot {name}: {} values for shape {meta:?}", values.len())));
    }
    fs::create_dir_all(dir)?;
    let (bin, json) = paths(dir, name);
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(bin, bytes)?;
    fs::write(json, serde_json::to_string_pretty(meta)?)?;
    Ok(())
}

pub fn read_snapshot(dir: &Path, name: &str) -> Result<(SnapshotMeta, Vec<f64>)> {
    let (bin, json) = paths(dir, name);
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(json)?)?;
    let bytes = fs::read(bin)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Config(format!("snapshot {name}: {} bytes is not a whole number of f64", bytes.len())));
    }
    let values: Vec<f64> =
        bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    if values.len() != meta.nodes_per_side * meta.nodes_per_side * meta.components {
        return Err(Error::Config(format!("snapshot {name}: size does not match its sidecar")));
    }
    Ok((meta, values))
}

fn meta(grid: &GridGeometry, field: &str, labels: Vec<String>) -> SnapshotMeta {
    SnapshotMeta {
        field: field.to_string(),
        dtype: "f64le".to_string(),
        layout: "node-major (node = a + N*b), components interleaved".to_string(),
        nodes_per_side: grid.nodes_per_side,
        side_length: grid.side_length,
        conformal_factor: grid.conformal_factor,
        components: labels.len(),
        component_labels: labels,
    }
}

/// Writes chart coordinates `φ^i` (slope included).
pub fn write_map(dir: &Path, name: &str, map: &MapField) -> Result<()> {
    let labels = (0..map.dim()).map(|i| format!("y{i}")).collect();
    write_snapshot(dir, name, &meta(map.grid(), "map", labels), &map.values())
}

/// Writes `ψ^i_s` as `(re, im)` pairs.
pub fn write_spinor(dir: &Path, name: &str, grid: &GridGeometry, psi: &VectorSpinorField) -> Result<()> {
    let labels = (0..psi.dim())
        .flat_map(|i| (0..2).flat_map(move |s| [format!("psi{i}_{s}_re"), format!("psi{i}_{s}_im")]))
        .collect();
    let values: Vec<f64> = psi.data().iter().flat_map(|c| [c.re, c.im]).collect();
    write_snapshot(dir, name, &meta(grid, "vector_spinor", labels), &values)
}
