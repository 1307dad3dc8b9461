use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{CurvatureMode, ElMode};
use crate::fields::{random_map, DerivativeMode, GridGeometry, MapField};
use crate::solver::SolverConfig;
use crate::target::{catalog, TargetChart, TorsionSpec, VectorField};
use crate::tensor::Tensor3;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    Flat {
        dim: usize,
    },
    Sphere {
        dim: usize,
    },
    /// `e^{2f}δ` with `f = amplitude · Σ sin(y_i + i)`.
    ConformalBump {
        dim: usize,
        amplitude: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TorsionConfig {
    Zero,
    /// Constant upper-index `V`.
    Vectorial {
        v: Vec<f64>,
    },
    TotallyAntisymmetric {
        kappa: f64,
        #[serde(default)]
        modulation: f64,
    },
    /// `n³` lowered components, index order `ijk`, projected onto the Cartan-type part.
    CartanType {
        components: Vec<f64>,
    },
    /// `n³` lowered components used as given.
    Raw {
        components: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nodes_per_side: usize,
    #[serde(default = "default_side_length")]
    pub side_length: f64,
    #[serde(default = "default_conformal_factor")]
    pub conformal_factor: f64,
    #[serde(default)]
    pub derivative: DerivativeMode,
}

fn default_side_length() -> f64 {
    TAU
}

fn default_conformal_factor() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialMap {
    Constant {
        value: Vec<f64>,
    },
    /// Degree-`degree` wrap of the first coordinate along `x`, `period` per turn.
    Wrap {
        degree: i32,
        #[serde(default = "default_period")]
        period: f64,
    },
    Random {
        seed: u64,
        band: usize,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

fn default_period() -> f64 {
    TAU
}

fn default_amplitude() -> f64 {
    0.3
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    Torsion,
    CurvatureTerm,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    pub mode: EnergyMode,
    pub target: TargetConfig,
    #[serde(default = "default_torsion")]
    pub torsion: TorsionConfig,
    pub grid: GridConfig,
    pub initial_map: InitialMap,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_torsion() -> TorsionConfig {
    TorsionConfig::Zero
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let scenario: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read scenario {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks that do not need the chart: schema, grid shape, solver settings.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema = {} is not supported, expected {SCHEMA_VERSION}", self.schema)));
        }
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(Error::Config(format!("id `{}` must be a non-empty plain name", self.id)));
        }
        let n = self.grid.nodes_per_side;
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid.nodes_per_side must be a power of two ≥ 4, got {n}")));
        }
        GridGeometry::new(n, self.grid.side_length, self.grid.conformal_factor).map_err(config_error)?;
        self.solver.validate().map_err(config_error)?;
        let dim = self.target.dim();
        if dim == 0 {
            return Err(Error::Config("target.dim must be at least 1".into()));
        }
        match &self.torsion {
            TorsionConfig::Vectorial { v } if v.len() != dim => {
                return Err(Error::Config(format!("torsion.v has {} entries, target has dim {dim}", v.len())));
            }
            TorsionConfig::TotallyAntisymmetric { .. } if dim != 3 => {
                return Err(Error::Config(format!("totally_antisymmetric torsion needs dim 3, target has dim {dim}")));
            }
            TorsionConfig::CartanType { components } | TorsionConfig::Raw { components }
                if components.len() != dim.pow(3) =>
            {
                return Err(Error::Config(format!(
                    "torsion.components has {} entries, expected {}",
                    components.len(),
                    dim.pow(3)
                )));
            }
            _ => {}
        }
        match &self.initial_map {
            InitialMap::Constant { value } if value.len() != dim => {
                Err(Error::Config(format!("initial_map.value has {} entries, target has dim {dim}", value.len())))
            }
            InitialMap::Random { band, .. } if 2 * band >= n => {
                Err(Error::Config(format!("initial_map.band = {band} needs 2·band < nodes_per_side = {n}")))
            }
            _ => Ok(()),
        }
    }

    pub fn with_grid_override(mut self, n: usize) -> Result<Self> {
        self.grid.nodes_per_side = n;
        self.validate()?;
        Ok(self)
    }

    pub fn grid(&self) -> Result<GridGeometry> {
        let g = &self.grid;
        Ok(GridGeometry::new(g.nodes_per_side, g.side_length, g.conformal_factor)?.with_derivative(g.derivative))
    }

    /// Builds the target chart; raw torsion that is not skew in its last
    /// two slots fails here with [`Error::TorsionNotSkew`].
    pub fn chart(&self) -> Result<TargetChart> {
        let dim = self.target.dim();
        let base = match self.target {
            TargetConfig::Flat { dim } => catalog::flat(dim),
            TargetConfig::Sphere { dim } => catalog::sphere(dim),
            TargetConfig::ConformalBump { dim, amplitude } => catalog::conformal_bump(dim, amplitude),
        };
        let spec = match &self.torsion {
            TorsionConfig::Zero => return Ok(base),
            TorsionConfig::Vectorial { v } => {
                TorsionSpec::Vectorial(VectorField::constant(DVector::from_column_slice(v)))
            }
            TorsionConfig::TotallyAntisymmetric { kappa, modulation } => {
                TorsionSpec::TotallyAntisymmetric { kappa: *kappa, modulation: *modulation }
            }
            TorsionConfig::CartanType { components } => TorsionSpec::CartanType(tensor(dim, components)?),
            TorsionConfig::Raw { components } => TorsionSpec::Raw(tensor(dim, components)?),
        };
        base.with_torsion(spec)
    }

    pub fn initial_map(&self, chart: &TargetChart) -> Result<MapField> {
        let grid = self.grid()?;
        let map = match &self.initial_map {
            InitialMap::Constant { value } => MapField::constant(grid, value),
            InitialMap::Wrap { degree, period } => MapField::wrap(grid, chart.dim(), *degree, *period),
            InitialMap::Random { seed, band, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                random_map(chart, &grid, *band, *amplitude, &mut rng)?
            }
        };
        map.check_domain(chart)?;
        Ok(map)
    }

    /// Curvature connection for the quartic term: Levi-Civita without
    /// torsion, the torsion connection otherwise.
    pub fn curvature_mode(&self) -> Option<CurvatureMode> {
        match self.mode {
            EnergyMode::Torsion => None,
            EnergyMode::CurvatureTerm | EnergyMode::Both => Some(match self.torsion {
                TorsionConfig::Zero => CurvatureMode::LeviCivita,
                _ => CurvatureMode::ParallelSkew,
            }),
        }
    }

    pub fn el_modes(&self) -> Vec<ElMode> {
        let curvature = self.curvature_mode().map(ElMode::CurvatureTerm);
        match self.mode {
            EnergyMode::Torsion => vec![ElMode::Torsion],
            EnergyMode::CurvatureTerm => curvature.into_iter().collect(),
            EnergyMode::Both => std::iter::once(ElMode::Torsion).chain(curvature).collect(),
        }
    }
}

impl TargetConfig {
    pub fn dim(&self) -> usize {
        match *self {
            Self::Flat { dim } | Self::Sphere { dim } | Self::ConformalBump { dim, .. } => dim,
        }
    }
}

fn tensor(dim: usize, components: &[f64]) -> Result<Tensor3> {
    Tensor3::from_slice(dim, components).ok_or_else(|| {
        Error::Config(format!("torsion.components needs {} entries, got {}", dim.pow(3), components.len()))
    })
}

fn config_error(e: Error) -> Error {
    match e {
        Error::InvalidConfig(msg) => Error::Config(msg),
        other => other,
    }
}
