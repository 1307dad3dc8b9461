use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{dirac_orthonormal, torsion_connection};
use crate::clifford::GAMMA;
use crate::fields::{Background, Connection, MapField, VectorSpinorField};
use crate::target::TargetChart;
use crate::{Error, Result};

/// Largest complex dimension `2nN²` accepted for dense materialization.
pub const DENSE_LIMIT: usize = 8000;

/// `D^Tor` along a fixed map, as a linear operator on flattened spinor data.
///
/// `apply` works on the chart coefficients `ψ^i`. The `_orthonormal`
/// variants work on `u = g^{1/2}ψ`, where the operator is Hermitian for the
/// plain Euclidean product.
#[derive(Clone, Debug)]
pub struct AssembledDiracOperator {
    background: Background,
    conn: Connection,
}

impl AssembledDiracOperator {
    pub fn new(chart: &TargetChart, map: &MapField, torsion: bool) -> Result<Self> {
        Ok(Self::from_background(Background::new(chart, map)?, torsion))
    }

    pub fn from_background(background: Background, torsion: bool) -> Self {
        Self { background, conn: torsion_connection(torsion) }
    }

    pub fn uses_torsion(&self) -> bool {
        self.conn == Connection::Torsion
    }

    pub fn background(&self) -> &Background {
        &self.background
    }

    /// Complex dimension `2nN²`.
    pub fn dimension(&self) -> usize {
        2 * self.background.dim() * self.background.node_count()
    }

    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.len() != self.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "operator of size {} applied to {} values",
                self.dimension(),
                psi.len()
            )));
        }
        let field = VectorSpinorField::from_data(self.background.dim(), psi.to_vec())?;
        let u = self.background.to_orthonormal(&field);
        Ok(self.background.from_orthonormal(&dirac_orthonormal(&self.background, &u, self.conn)).into_data())
    }

    pub fn apply_orthonormal(&self, u: &[Complex64]) -> Vec<Complex64> {
        dirac_orthonormal(&self.background, u, self.conn)
    }

    /// Dense matrix of the orthonormal-frame operator.
    pub fn dense_orthonormal(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.dimension();
        if dim > DENSE_LIMIT {
            return Err(Error::SizeOverflow { requested: dim, limit: DENSE_LIMIT });
        }
        let bg = &self.background;
        let grid = bg.grid();
        let big_n = grid.nodes_per_side;
        let n = bg.dim();
        let stride = 2 * n;
        let inv = 1.0 / grid.conformal_factor;
        // derivative stencils: image of a delta at node 0
        let mut delta = vec![Complex64::new(0.0, 0.0); grid.node_count()];
        delta[0] = Complex64::new(1.0, 0.0);
        let stencil = [bg.differentiator().derivative(&delta, 1, 0), bg.differentiator().derivative(&delta, 1, 1)];
        let mut m = DMatrix::zeros(dim, dim);
        for node in 0..grid.node_count() {
            let (a, b) = (node % big_n, node / big_n);
            let frame = &bg.frames()[node];
            for alpha in 0..2 {
                let gamma = &GAMMA.gamma[alpha];
                // derivative couples along one grid line
                for t in 0..big_n {
                    let (target, offset) = if alpha == 0 {
                        ((t + big_n * b), (t + big_n - a) % big_n)
                    } else {
                        ((a + big_n * t), ((t + big_n - b) % big_n) * big_n)
                    };
                    let c = stencil[alpha][offset] * inv;
                    if c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for i in 0..n {
                        for (s_out, row) in gamma.iter().enumerate() {
                            for (s_in, gv) in row.iter().enumerate() {
                                m[(target * stride + 2 * i + s_out, node * stride + 2 * i + s_in)] += gv * c;
                            }
                        }
                    }
                }
                let w = frame.connection_form(self.conn, alpha);
                for i in 0..n {
                    for k in 0..n {
                        for (s_out, row) in gamma.iter().enumerate() {
                            for (s_in, gv) in row.iter().enumerate() {
                                m[(node * stride + 2 * i + s_out, node * stride + 2 * k + s_in)] += gv * w[(i, k)];
                            }
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// `‖M − M†‖_max` of the dense orthonormal-frame matrix.
    pub fn hermitian_defect(&self) -> Result<f64> {
        let m = self.dense_orthonormal()?;
        Ok((&m - m.adjoint()).iter().fold(0.0, |acc, v| acc.max(v.norm())))
    }
}
