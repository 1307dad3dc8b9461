//! Discrete fields on the flat torus: grid geometry, maps into a target
//! chart, vector spinors along a map, and the pulled-back geometry.

mod background;
mod grid;
pub mod io;
mod map;
mod random;

pub use background::{Background, Connection, NodeFrame};
pub use grid::{DerivativeMode, Differentiator, GridGeometry};
pub use map::{MapField, VectorSpinorField};
pub use random::{band_limited, random_map, random_smooth_fields, random_spinor, random_vector};
