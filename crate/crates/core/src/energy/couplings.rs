use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{gamma_pairing, CurvatureMode};
use crate::fields::{Background, Connection, NodeFrame, VectorSpinorField};
use crate::target::{five_point, torsion_curvature_correction, VectorField};
use crate::tensor::Tensor4;
use crate::Result;

/// `τ(φ) = Σ_α ∇_{e_α} dφ(e_α) = λ⁻²(∂²_αφ + Γ(∂_αφ, ∂_αφ))`, node-major.
pub fn tension(bg: &Background) -> Result<Vec<f64>> {
    let n = bg.dim();
    let inv = 1.0 / bg.grid().conformal_factor;
    let mut out = vec![0.0; n * bg.node_count()];
    for alpha in 0..2 {
        let x: Vec<f64> =
            bg.frames().iter().flat_map(|f| f.frame_derivative[alpha].iter().copied().collect::<Vec<_>>()).collect();
        let dx = bg.differentiator().derivative_real(&x, n, alpha);
        for (node, f) in bg.frames().iter().enumerate() {
            let xa = &f.frame_derivative[alpha];
            for i in 0..n {
                let mut s = dx[node * n + i] * inv;
                for j in 0..n {
                    for k in 0..n {
                        s += f.christoffel[[i, j, k]] * xa[j] * xa[k];
                    }
                }
                out[node * n + i] += s;
            }
        }
    }
    Ok(out)
}

/// `½ Σ_α X_α^j R_ijkm Re⟨ψ^m, γ_α ψ^k⟩`, raised with `g⁻¹`.
fn curvature_vector(r: &Tensor4, f: &NodeFrame, psi: &VectorSpinorField, node: usize) -> DVector<f64> {
    let n = f.g.nrows();
    let mut cov = DVector::zeros(n);
    for alpha in 0..2 {
        let p = gamma_pairing(psi, node, alpha);
        let x = &f.frame_derivative[alpha];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                if x[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for m in 0..n {
                        s += x[j] * r[[i, j, k, m]] * p[(m, k)].re;
                    }
                }
            }
            cov[i] += 0.5 * s;
        }
    }
    &f.g_inv * cov
}

fn collect(bg: &Background, mut per_node: impl FnMut(usize, &NodeFrame) -> Result<DVector<f64>>) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(bg.dim() * bg.node_count());
    for (node, f) in bg.frames().iter().enumerate() {
        out.extend(per_node(node, f)?.iter());
    }
    Ok(out)
}

/// `𝓡(φ, ψ)`: the Levi-Civita curvature coupling.
pub fn curvature_coupling(bg: &Background, psi: &VectorSpinorField) -> Result<Vec<f64>> {
    psi.check_paired(bg.map())?;
    collect(bg, |node, f| {
        let r = bg.chart().lc_curvature_at(&bg.map().value(node))?;
        Ok(curvature_vector(&r, f, psi, node))
    })
}

/// `F^Tor(φ, ψ)`: the same contraction with `R^Tor − R^LC`.
pub fn f_tor(bg: &Background, psi: &VectorSpinorField) -> Result<Vec<f64>> {
    psi.check_paired(bg.map())?;
    let chart = bg.chart();
    if chart.torsion_spec().is_zero() {
        return Ok(vec![0.0; bg.dim() * bg.node_count()]);
    }
    collect(bg, |node, f| {
        let nabla_a = chart.nabla_torsion_at(&bg.map().value(node))?;
        let q = torsion_curvature_correction(&f.torsion, &f.torsion_mixed, &nabla_a);
        Ok(curvature_vector(&q, f, psi, node))
    })
}

/// `F^Tor` for vectorial torsion `A(X,Y) = g(X,Y)V − g(V,Y)X`, from `V` and
/// `∇V` directly:
/// `Σ_α Re[(∇_iV)_k⟨ψ^k,γ_α s_X⟩ − g_ik⟨s_{∇_X V},γ_αψ^k⟩ + V_i⟨s_V,γ_α s_X⟩
///   − |V|² g_ik⟨ψ^k,γ_α s_X⟩ + ⟨V,X⟩ g_ik⟨ψ^k,γ_α s_V⟩]`
/// with `X = dφ(e_α)` and `s_u = u^i g_ik ψ^k`.
pub fn f_tor_vectorial(bg: &Background, psi: &VectorSpinorField, v: &VectorField) -> Result<Vec<f64>> {
    psi.check_paired(bg.map())?;
    let n = bg.dim();
    collect(bg, |node, f| {
        let y = bg.map().value(node);
        let vy = v.at(&y);
        // (∇_i V)^l = ∂_i V^l + Γ^l_im V^m
        let mut nabla_v = DMatrix::zeros(n, n);
        for i in 0..n {
            let dv = five_point(&y, i, |p| v.at(p));
            for l in 0..n {
                nabla_v[(i, l)] = dv[l] + (0..n).map(|m| f.christoffel[[l, i, m]] * vy[m]).sum::<f64>();
            }
        }
        let nabla_v_low = &nabla_v * &f.g;
        let v_low = &f.g * &vy;
        let v_sq = vy.dot(&v_low);
        let s = |u: &DVector<f64>| -> [Complex64; 2] {
            let w = &f.g * u;
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for k in 0..n {
                let p = psi.get(node, k);
                acc[0] += p[0] * w[k];
                acc[1] += p[1] * w[k];
            }
            acc
        };
        let pair = |a: [Complex64; 2], alpha: usize, b: [Complex64; 2]| {
            let gb = crate::clifford::gamma_apply(alpha, b);
            (a[0].conj() * gb[0] + a[1].conj() * gb[1]).re
        };
        let s_v = s(&vy);
        let mut cov = DVector::zeros(n);
        for alpha in 0..2 {
            let x = &f.frame_derivative[alpha];
            let s_x = s(x);
            let nabla_x_v = nabla_v.transpose() * x;
            let s_nxv = s(&nabla_x_v);
            let vx = v_low.dot(x);
            let c_sv_sx = pair(s_v, alpha, s_x);
            for k in 0..n {
                let pk = psi.get(node, k);
                let a_k = pair(pk, alpha, s_x);
                let b_k = pair(s_nxv, alpha, pk);
                let e_k = pair(pk, alpha, s_v);
                for i in 0..n {
                    cov[i] += nabla_v_low[(i, k)] * a_k - f.g[(i, k)] * b_k - v_sq * f.g[(i, k)] * a_k
                        + vx * f.g[(i, k)] * e_k;
                }
            }
            for i in 0..n {
                cov[i] += v_low[i] * c_sv_sx;
            }
        }
        Ok(&f.g_inv * cov)
    })
}

/// Curvature for the quartic term, with the pair symmetry `R_ijkl = R_klij`
/// imposed exactly. Both admissible curvatures have it; the projection only
/// removes finite-difference noise that would otherwise leak into `Im`.
fn curvature_for(bg: &Background, node: usize, mode: CurvatureMode) -> Result<Tensor4> {
    let y = bg.map().value(node);
    let r = match mode {
        CurvatureMode::LeviCivita => bg.chart().lc_curvature_at(&y)?,
        CurvatureMode::ParallelSkew => bg.chart().torsion_curvature_at(&y)?,
    };
    Ok(Tensor4::from_fn(r.dim(), |i, j, k, l| 0.5 * (r[[i, j, k, l]] + r[[k, l, i, j]])))
}

/// `a_ik = ⟨ψ^i, ψ^k⟩` at one node.
fn spinor_gram(psi: &VectorSpinorField, node: usize) -> DMatrix<Complex64> {
    let n = psi.dim();
    DMatrix::from_fn(n, n, |i, k| {
        let a = psi.get(node, i);
        let b = psi.get(node, k);
        a[0].conj() * b[0] + a[1].conj() * b[1]
    })
}

fn quartic_density(r: &Tensor4, a: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    s += a[(i, k)] * a[(j, l)] * r[[i, j, k, l]];
                }
            }
        }
    }
    s
}

/// `∫R_ijkl⟨ψ^i,ψ^k⟩⟨ψ^j,ψ^l⟩`, complex so the imaginary part can be
/// inspected.
pub fn curvature_quartic(bg: &Background, psi: &VectorSpinorField, mode: CurvatureMode) -> Result<Complex64> {
    psi.check_paired(bg.map())?;
    let mut total = Complex64::new(0.0, 0.0);
    for node in 0..bg.node_count() {
        let r = curvature_for(bg, node, mode)?;
        total += quartic_density(&r, &spinor_gram(psi, node));
    }
    Ok(total * bg.grid().area_weight())
}

/// `(R(ψ,ψ)ψ)^m = −g^{mi} R_ijkl ⟨ψ^j,ψ^l⟩ ψ^k`.
pub fn quartic_endomorphism(
    bg: &Background,
    psi: &VectorSpinorField,
    mode: CurvatureMode,
) -> Result<VectorSpinorField> {
    psi.check_paired(bg.map())?;
    let n = bg.dim();
    let mut out = VectorSpinorField::zeros(bg.grid(), n);
    for (node, f) in bg.frames().iter().enumerate() {
        let r = curvature_for(bg, node, mode)?;
        let a = spinor_gram(psi, node);
        // M_ik = −Σ_jl R_ijkl a_jl, then (Mψ)_i lowered
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    for l in 0..n {
                        s += a[(j, l)] * r[[i, j, k, l]];
                    }
                }
                m[(i, k)] = -s;
            }
        }
        let raised = f.g_inv.map(|v| Complex64::new(v, 0.0)) * m;
        for i in 0..n {
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for k in 0..n {
                let p = psi.get(node, k);
                acc[0] += raised[(i, k)] * p[0];
                acc[1] += raised[(i, k)] * p[1];
            }
            out.set(node, i, acc);
        }
    }
    Ok(out)
}

/// `𝓡̃(ψ)^m = (1/12) g^{mp} ∇_p R_ijkl ⟨ψ^i,ψ^k⟩⟨ψ^j,ψ^l⟩`, with `∇^Tor R^Tor`
/// in parallel-skew mode.
pub fn curvature_term_gradient(bg: &Background, psi: &VectorSpinorField, mode: CurvatureMode) -> Result<Vec<f64>> {
    psi.check_paired(bg.map())?;
    let n = bg.dim();
    let chart = bg.chart();
    collect(bg, |node, f| {
        let y = bg.map().value(node);
        let mut nabla_r = chart.nabla_lc_curvature_at(&y)?;
        if mode == CurvatureMode::ParallelSkew && !chart.torsion_spec().is_zero() {
            let rt = chart.torsion_curvature_at(&y)?;
            let am = &f.torsion_mixed;
            for (p, t) in nabla_r.iter_mut().enumerate() {
                *t = Tensor4::from_fn(n, |i, j, k, l| {
                    let mut s = t[[i, j, k, l]];
                    for q in 0..n {
                        s -= am[[p, i, q]] * rt[[q, j, k, l]]
                            + am[[p, j, q]] * rt[[i, q, k, l]]
                            + am[[p, k, q]] * rt[[i, j, q, l]]
                            + am[[p, l, q]] * rt[[i, j, k, q]];
                    }
                    s
                });
            }
        }
        let a = spinor_gram(psi, node);
        let cov = DVector::from_iterator(n, nabla_r.iter().map(|t| quartic_density(t, &a).re / 12.0));
        Ok(&f.g_inv * cov)
    })
}

/// Covariant variation `ξ = ζ + Γ(η, ψ) [+ A(η, ψ)]` of the coordinate
/// variation `ψ + tζ` along `φ + tη`.
pub fn covariant_variation(
    bg: &Background,
    psi: &VectorSpinorField,
    eta: &[f64],
    zeta: &VectorSpinorField,
    conn: Connection,
) -> VectorSpinorField {
    let n = bg.dim();
    let mut out = zeta.clone();
    for (node, f) in bg.frames().iter().enumerate() {
        let e = DVector::from_column_slice(&eta[node * n..(node + 1) * n]);
        let mut m = DMatrix::from_fn(n, n, |i, k| (0..n).map(|j| f.christoffel[[i, j, k]] * e[j]).sum());
        if conn == Connection::Torsion {
            m += f.torsion_endomorphism(&e);
        }
        for i in 0..n {
            let mut acc = out.get(node, i);
            for k in 0..n {
                let p = psi.get(node, k);
                acc[0] += p[0] * m[(i, k)];
                acc[1] += p[1] * m[(i, k)];
            }
            out.set(node, i, acc);
        }
    }
    out
}
