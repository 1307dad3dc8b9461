use num_complex::Complex64;
use serde::Serialize;

use crate::clifford::gamma_apply;
use crate::fields::{Background, Connection, VectorSpinorField};
use crate::Result;

/// `T_αβ = 2⟨dφ(e_α),dφ(e_β)⟩ − δ_αβ|dφ|² + Re⟨ψ, γ_α ∇̃^Tor_{e_β}ψ⟩` with its
/// frame divergence `Σ_α e_α T_αβ`.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyMomentum {
    pub t: Vec<[[f64; 2]; 2]>,
    pub divergence: Vec<[f64; 2]>,
    pub trace_norm: f64,
    pub antisymmetric_norm: f64,
    pub divergence_norm: f64,
}

/// `T(z) = |φ_x|² − |φ_y|² − 2i⟨φ_x,φ_y⟩ + ⟨ψ,γ₁∇̃_xψ⟩ − i⟨ψ,γ₁∇̃_yψ⟩`
/// with frame derivatives.
#[derive(Clone, Debug, Serialize)]
pub struct HopfDifferential {
    pub values: Vec<Complex64>,
    pub dbar_norm: f64,
}

fn l2(bg: &Background, values: impl Iterator<Item = f64>) -> f64 {
    (values.map(|v| v * v).sum::<f64>() * bg.grid().area_weight()).sqrt()
}

/// `Re⟨ψ, γ_α ∇̃^Tor_{e_β} ψ⟩` at every node, indexed `[α][β]`.
fn spinor_stress(bg: &Background, psi: &VectorSpinorField) -> Vec<[[f64; 2]; 2]> {
    let conn = if bg.chart().torsion_spec().is_zero() { Connection::LeviCivita } else { Connection::Torsion };
    let n = bg.dim();
    let d = [bg.spinor_covariant_derivative(psi, 0, conn), bg.spinor_covariant_derivative(psi, 1, conn)];
    let mut out = vec![[[0.0; 2]; 2]; bg.node_count()];
    for (node, f) in bg.frames().iter().enumerate() {
        for alpha in 0..2 {
            for beta in 0..2 {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let a = psi.get(node, i);
                    for k in 0..n {
                        let b = gamma_apply(alpha, d[beta].get(node, k));
                        s += (a[0].conj() * b[0] + a[1].conj() * b[1]) * f.g[(i, k)];
                    }
                }
                out[node][alpha][beta] = s.re;
            }
        }
    }
    out
}

pub fn energy_momentum(bg: &Background, psi: &VectorSpinorField) -> Result<EnergyMomentum> {
    psi.check_paired(bg.map())?;
    let stress = spinor_stress(bg, psi);
    let mut t = Vec::with_capacity(bg.node_count());
    for (node, f) in bg.frames().iter().enumerate() {
        let x = &f.frame_derivative;
        let gx = [&f.g * &x[0], &f.g * &x[1]];
        let dphi_sq = x[0].dot(&gx[0]) + x[1].dot(&gx[1]);
        let mut m = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let delta = if a == b { dphi_sq } else { 0.0 };
                m[a][b] = 2.0 * x[a].dot(&gx[b]) - delta + stress[node][a][b];
            }
        }
        t.push(m);
    }
    let inv = 1.0 / bg.grid().conformal_factor;
    let mut divergence = vec![[0.0; 2]; bg.node_count()];
    for alpha in 0..2 {
        let row: Vec<f64> = t.iter().flat_map(|m| m[alpha]).collect();
        let d = bg.differentiator().derivative_real(&row, 2, alpha);
        for (node, div) in divergence.iter_mut().enumerate() {
            div[0] += d[2 * node] * inv;
            div[1] += d[2 * node + 1] * inv;
        }
    }
    Ok(EnergyMomentum {
        trace_norm: l2(bg, t.iter().map(|m| m[0][0] + m[1][1])),
        antisymmetric_norm: l2(bg, t.iter().map(|m| m[0][1] - m[1][0])),
        divergence_norm: l2(bg, divergence.iter().flat_map(|d| *d)),
        t,
        divergence,
    })
}

pub fn hopf_differential(bg: &Background, psi: &VectorSpinorField) -> Result<HopfDifferential> {
    psi.check_paired(bg.map())?;
    let stress = spinor_stress(bg, psi);
    let values: Vec<Complex64> = bg
        .frames()
        .iter()
        .zip(&stress)
        .map(|(f, s)| {
            let x = &f.frame_derivative;
            let gx1 = &f.g * &x[1];
            let re = x[0].dot(&(&f.g * &x[0])) - x[1].dot(&gx1) + s[0][0];
            let im = -2.0 * x[0].dot(&gx1) - s[0][1];
            Complex64::new(re, im)
        })
        .collect();
    let inv = 1.0 / bg.grid().conformal_factor;
    let dbar = bg.differentiator().dbar(&values);
    let dbar_norm = l2(bg, dbar.iter().map(|v| v.norm() * inv));
    Ok(HopfDifferential { values, dbar_norm })
}
