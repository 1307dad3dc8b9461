//! The twisted Dirac operator with torsion, its square, the connection
//! Laplacian and the Weitzenböck comparison.

mod assembled;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use assembled::{AssembledDiracOperator, DENSE_LIMIT};

use crate::clifford::gamma_apply;
use crate::fields::{Background, Connection, VectorSpinorField};
use crate::Result;

pub(crate) fn torsion_connection(torsion: bool) -> Connection {
    if torsion {
        Connection::Torsion
    } else {
        Connection::LeviCivita
    }
}

/// Adds `γ_α` applied to every spinor slot of `v` into `acc`.
pub(crate) fn add_gamma(acc: &mut [Complex64], v: &[Complex64], alpha: usize) {
    for (a, pair) in acc.chunks_exact_mut(2).zip(v.chunks_exact(2)) {
        let g = gamma_apply(alpha, [pair[0], pair[1]]);
        a[0] += g[0];
        a[1] += g[1];
    }
}

/// `D̂u = Σ γ_α (λ⁻¹∂_α + ω_α) u` on orthonormal-frame data.
pub fn dirac_orthonormal(bg: &Background, u: &[Complex64], conn: Connection) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
    for alpha in 0..2 {
        let d = bg.covariant_derivative_orthonormal(u, alpha, conn);
        add_gamma(&mut out, &d, alpha);
    }
    out
}

/// `D^Tor ψ = Σ γ_α ∇̃^Tor_{e_α} ψ`, or `D̸ψ` with `torsion = false`.
pub fn twisted_dirac(bg: &Background, psi: &VectorSpinorField, torsion: bool) -> Result<VectorSpinorField> {
    psi.check_paired(bg.map())?;
    let u = bg.to_orthonormal(psi);
    Ok(bg.from_orthonormal(&dirac_orthonormal(bg, &u, torsion_connection(torsion))))
}

/// `Δ̃ψ = Σ_α ∇̃_{e_α}∇̃_{e_α} ψ`.
pub fn connection_laplacian(bg: &Background, psi: &VectorSpinorField, torsion: bool) -> Result<VectorSpinorField> {
    psi.check_paired(bg.map())?;
    let conn = torsion_connection(torsion);
    let u = bg.to_orthonormal(psi);
    let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
    for alpha in 0..2 {
        let d = bg.covariant_derivative_orthonormal(&u, alpha, conn);
        let dd = bg.covariant_derivative_orthonormal(&d, alpha, conn);
        out.iter_mut().zip(dd).for_each(|(o, v)| *o += v);
    }
    Ok(bg.from_orthonormal(&out))
}

/// Applies an endomorphism `M^i_k` of `TN` to every spinor slot at one node.
fn apply_endomorphism(m: &DMatrix<f64>, psi: &VectorSpinorField, node: usize) -> Vec<[Complex64; 2]> {
    let n = m.nrows();
    (0..n)
        .map(|i| {
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for k in 0..n {
                let p = psi.get(node, k);
                acc[0] += p[0] * m[(i, k)];
                acc[1] += p[1] * m[(i, k)];
            }
            acc
        })
        .collect()
}

/// The zeroth-order side of the Weitzenböck formula:
/// `½ γ_αγ_β R^N(X_α, X_β)ψ + Σ_{α≠β} γ_αγ_β ((∇_{X_α}A)(X_β, ψ) + A(X_α, A(X_β, ψ)))`.
///
/// The torsion terms only pair distinct frame indices; the diagonal of the
/// commutator `[∇̃_α, ∇̃_β]` vanishes identically.
pub fn weitzenbock_curvature_term(bg: &Background, psi: &VectorSpinorField) -> Result<VectorSpinorField> {
    psi.check_paired(bg.map())?;
    let n = bg.dim();
    let chart = bg.chart();
    let torsion = !chart.torsion_spec().is_zero();
    let mut out = VectorSpinorField::zeros(bg.grid(), n);
    for (node, f) in bg.frames().iter().enumerate() {
        let y = bg.map().value(node);
        let r = chart.lc_curvature_at(&y)?;
        let x = &f.frame_derivative;
        let nabla_a = if torsion { Some(chart.nabla_torsion_at(&y)?) } else { None };
        let mut acc = vec![[Complex64::new(0.0, 0.0); 2]; n];
        for alpha in 0..2 {
            for beta in 0..2 {
                if alpha == beta {
                    continue;
                }
                // R^N(X_α, X_β) as an endomorphism, lowered index raised with g⁻¹
                let mut lowered = DMatrix::zeros(n, n);
                for l in 0..n {
                    for k in 0..n {
                        let mut s = 0.0;
                        for i in 0..n {
                            for j in 0..n {
                                s += x[alpha][i] * x[beta][j] * r[[i, j, k, l]];
                            }
                        }
                        lowered[(l, k)] = 0.5 * s;
                    }
                }
                if let Some(na) = &nabla_a {
                    let a_beta = f.torsion_endomorphism(&x[beta]);
                    let a_alpha = f.torsion_endomorphism(&x[alpha]);
                    for l in 0..n {
                        for k in 0..n {
                            let mut s = 0.0;
                            for i in 0..n {
                                for j in 0..n {
                                    s += x[alpha][i] * x[beta][j] * na[[i, j, k, l]];
                                }
                            }
                            lowered[(l, k)] += s;
                        }
                    }
                    let composed = &f.g * (&a_alpha * &a_beta);
                    lowered += composed;
                }
                let m = &f.g_inv * lowered;
                let applied = apply_endomorphism(&m, psi, node);
                for (i, v) in applied.into_iter().enumerate() {
                    let gb = gamma_apply(beta, v);
                    let gab = gamma_apply(alpha, gb);
                    acc[i][0] += gab[0];
                    acc[i][1] += gab[1];
                }
            }
        }
        for (i, v) in acc.into_iter().enumerate() {
            out.set(node, i, v);
        }
    }
    Ok(out)
}

/// `L²` norm of `(D^Tor)²ψ − (−Δ̃^Tor ψ + curvature terms)`.
pub fn weitzenbock_defect(bg: &Background, psi: &VectorSpinorField) -> Result<f64> {
    let torsion = !bg.chart().torsion_spec().is_zero();
    let dd = twisted_dirac(bg, &twisted_dirac(bg, psi, torsion)?, torsion)?;
    let lap = connection_laplacian(bg, psi, torsion)?;
    let curv = weitzenbock_curvature_term(bg, psi)?;
    let rhs = curv.sub(&lap);
    Ok(bg.spinor_norm(&dd.sub(&rhs)))
}
