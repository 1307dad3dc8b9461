use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::grid::{Differentiator, GridGeometry};
use super::map::{MapField, VectorSpinorField};
use crate::target::TargetChart;
use crate::tensor::Tensor3;
use crate::Result;

/// Which connection on `φ⁻¹TN` a derivative uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connection {
    LeviCivita,
    Torsion,
}

/// Target geometry pulled back to one grid node.
#[derive(Clone, Debug)]
pub struct NodeFrame {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Symmetric square root `E = g^{1/2}` and its inverse.
    pub sqrt: DMatrix<f64>,
    pub sqrt_inv: DMatrix<f64>,
    pub dg: Vec<DMatrix<f64>>,
    /// `dφ(e_α)`.
    pub frame_derivative: [DVector<f64>; 2],
    pub christoffel: Tensor3,
    /// Lowered `A_ijk`.
    pub torsion: Tensor3,
    /// `A_jk^i` at `[j, k, i]`.
    pub torsion_mixed: Tensor3,
    /// Connection one-forms `ω_α` in the orthonormal frame `E ∂_i`, indexed
    /// `[connection][α]`. Each is an exactly antisymmetric real matrix.
    connection: [[DMatrix<f64>; 2]; 2],
}

impl NodeFrame {
    pub fn connection_form(&self, conn: Connection, alpha: usize) -> &DMatrix<f64> {
        &self.connection[conn as usize][alpha]
    }

    /// `A(X, ·)` as a matrix acting on upper-index vectors.
    pub fn torsion_endomorphism(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = x.len();
        DMatrix::from_fn(n, n, |i, k| (0..n).map(|j| x[j] * self.torsion_mixed[[j, k, i]]).sum())
    }
}

/// A map together with everything the spinor operators need at each node.
///
/// Spinor derivatives are taken in the orthonormal frame `u = Eψ`:
/// `∇_α ψ = E⁻¹ (λ⁻¹ ∂_α u + ω_α u)`, where `ω_α` is the antisymmetric part
/// of `E ∂_X(E⁻¹) + E (Γ_X + A_X) E⁻¹` assembled from `g`, `∂g` and `A`
/// alone. This keeps the discrete operators exactly metric.
#[derive(Clone, Debug)]
pub struct Background {
    chart: TargetChart,
    map: MapField,
    diff: Differentiator,
    frames: Vec<NodeFrame>,
}

impl Background {
    pub fn new(chart: &TargetChart, map: &MapField) -> Result<Self> {
        map.check_domain(chart)?;
        let diff = Differentiator::new(map.grid());
        let n = map.dim();
        let dx = [map.frame_derivative(&diff, 0), map.frame_derivative(&diff, 1)];
        let mut frames = Vec::with_capacity(map.grid().node_count());
        for node in 0..map.grid().node_count() {
            let y = map.value(node);
            let c = chart.connection_at(&y)?;
            let x = [
                DVector::from_column_slice(&dx[0][node * n..(node + 1) * n]),
                DVector::from_column_slice(&dx[1][node * n..(node + 1) * n]),
            ];
            let (sqrt, sqrt_inv, q, roots) = symmetric_sqrt(&c.g);
            let torsion_mixed = c.torsion_mixed();
            let mut connection: [[DMatrix<f64>; 2]; 2] = Default::default();
            for alpha in 0..2 {
                let xa = &x[alpha];
                let dg_x = c.dg.iter().enumerate().fold(DMatrix::zeros(n, n), |acc, (k, d)| acc + d * xa[k]);
                // ∂_X E from the Sylvester equation ∂E E + E ∂E = ∂_X g
                let mut de = q.transpose() * &dg_x * &q;
                for a in 0..n {
                    for b in 0..n {
                        de[(a, b)] /= roots[a] + roots[b];
                    }
                }
                let de = &q * de * q.transpose();
                let mut skew_gamma = DMatrix::zeros(n, n);
                let mut g_torsion = DMatrix::zeros(n, n);
                for i in 0..n {
                    for k in 0..n {
                        let mut s = 0.0;
                        let mut t = 0.0;
                        for j in 0..n {
                            s += 0.5 * xa[j] * (c.dg[k][(i, j)] - c.dg[i][(j, k)]);
                            t += xa[j] * c.torsion[[j, k, i]];
                        }
                        skew_gamma[(i, k)] = s;
                        g_torsion[(i, k)] = t;
                    }
                }
                let gauge = antisymmetric(&(-(&de * &sqrt_inv)));
                let lc = antisymmetric(&(&gauge + &sqrt_inv * &skew_gamma * &sqrt_inv));
                let tor = antisymmetric(&(&lc + &sqrt_inv * &g_torsion * &sqrt_inv));
                connection[Connection::LeviCivita as usize][alpha] = lc;
                connection[Connection::Torsion as usize][alpha] = tor;
            }
            frames.push(NodeFrame {
                g: c.g,
                g_inv: c.g_inv,
                sqrt,
                sqrt_inv,
                dg: c.dg,
                frame_derivative: x,
                christoffel: c.christoffel,
                torsion: c.torsion,
                torsion_mixed,
                connection,
            });
        }
        Ok(Self { chart: chart.clone(), map: map.clone(), diff, frames })
    }

    pub fn chart(&self) -> &TargetChart {
        &self.chart
    }

    pub fn map(&self) -> &MapField {
        &self.map
    }

    pub fn grid(&self) -> &GridGeometry {
        self.map.grid()
    }

    pub fn differentiator(&self) -> &Differentiator {
        &self.diff
    }

    pub fn frames(&self) -> &[NodeFrame] {
        &self.frames
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn node_count(&self) -> usize {
        self.frames.len()
    }

    /// `u = Eψ` node by node.
    pub fn to_orthonormal(&self, psi: &VectorSpinorField) -> Vec<Complex64> {
        self.apply_nodewise(psi.data(), |f| &f.sqrt)
    }

    /// `ψ = E⁻¹u` node by node.
    pub fn from_orthonormal(&self, u: &[Complex64]) -> VectorSpinorField {
        VectorSpinorField::from_data(self.dim(), self.apply_nodewise(u, |f| &f.sqrt_inv)).expect("layout preserved")
    }

    fn apply_nodewise(&self, data: &[Complex64], pick: impl Fn(&NodeFrame) -> &DMatrix<f64>) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        for (node, frame) in self.frames.iter().enumerate() {
            let m = pick(frame);
            let base = node * 2 * n;
            for i in 0..n {
                for s in 0..2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..n {
                        acc += data[base + 2 * k + s] * m[(i, k)];
                    }
                    out[base + 2 * i + s] = acc;
                }
            }
        }
        out
    }

    /// `λ⁻¹ ∂_α u + ω_α u` on orthonormal-frame data.
    pub fn covariant_derivative_orthonormal(&self, u: &[Complex64], alpha: usize, conn: Connection) -> Vec<Complex64> {
        let n = self.dim();
        let inv = 1.0 / self.grid().conformal_factor;
        let mut out = self.diff.derivative(u, 2 * n, alpha);
        for (node, frame) in self.frames.iter().enumerate() {
            let w = frame.connection_form(conn, alpha);
            let base = node * 2 * n;
            for i in 0..n {
                for s in 0..2 {
                    let mut acc = out[base + 2 * i + s] * inv;
                    for k in 0..n {
                        acc += u[base + 2 * k + s] * w[(i, k)];
                    }
                    out[base + 2 * i + s] = acc;
                }
            }
        }
        out
    }

    /// `∇̃_{e_α} ψ` (Levi-Civita) or `∇̃^Tor_{e_α} ψ` (with torsion).
    pub fn spinor_covariant_derivative(
        &self,
        psi: &VectorSpinorField,
        alpha: usize,
        conn: Connection,
    ) -> VectorSpinorField {
        let u = self.to_orthonormal(psi);
        self.from_orthonormal(&self.covariant_derivative_orthonormal(&u, alpha, conn))
    }

    /// Fibre product `Σ g_ik ⟨ψ^i, χ^k⟩` at one node.
    pub fn fibre_inner(&self, node: usize, psi: &VectorSpinorField, chi: &VectorSpinorField) -> Complex64 {
        let g = &self.frames[node].g;
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let a = psi.get(node, i);
            for k in 0..n {
                let b = chi.get(node, k);
                acc += (a[0].conj() * b[0] + a[1].conj() * b[1]) * g[(i, k)];
            }
        }
        acc
    }

    /// Discrete `L²` product `Σ_nodes λ²h² Σ g_ik ⟨ψ^i, χ^k⟩`.
    pub fn spinor_inner(&self, psi: &VectorSpinorField, chi: &VectorSpinorField) -> Complex64 {
        let w = self.grid().area_weight();
        (0..self.node_count()).map(|node| self.fibre_inner(node, psi, chi)).sum::<Complex64>() * w
    }

    pub fn spinor_norm(&self, psi: &VectorSpinorField) -> f64 {
        self.spinor_inner(psi, psi).re.max(0.0).sqrt()
    }

    /// `L²` product of two node-major vector fields along `φ`.
    pub fn vector_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim();
        let w = self.grid().area_weight();
        let mut acc = 0.0;
        for (node, frame) in self.frames.iter().enumerate() {
            for i in 0..n {
                for k in 0..n {
                    acc += a[node * n + i] * frame.g[(i, k)] * b[node * n + k];
                }
            }
        }
        acc * w
    }

    pub fn vector_norm(&self, a: &[f64]) -> f64 {
        self.vector_inner(a, a).max(0.0).sqrt()
    }
}

fn antisymmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m - m.transpose()) * 0.5
}

/// Returns `(E, E⁻¹, Q, √μ)` for `g = Q diag(μ) Qᵀ`.
fn symmetric_sqrt(g: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(g.clone());
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|v| v.sqrt()).collect();
    let q = eig.eigenvectors;
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(&roots));
    let d_inv = DMatrix::from_diagonal(&DVector::from_iterator(roots.len(), roots.iter().map(|r| 1.0 / r)));
    let e = &q * d * q.transpose();
    let e_inv = &q * d_inv * q.transpose();
    (e, e_inv, q, roots)
}
