//! Energy functionals, Euler-Lagrange residuals and the conservation laws.

mod conservation;
mod couplings;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use conservation::{energy_momentum, hopf_differential, EnergyMomentum, HopfDifferential};
pub use couplings::{
    covariant_variation, curvature_coupling, curvature_quartic, curvature_term_gradient, f_tor, f_tor_vectorial,
    quartic_endomorphism, tension,
};

use crate::clifford::gamma_apply;
use crate::fields::{Background, Connection, MapField, VectorSpinorField};
use crate::operators::{dirac_orthonormal, twisted_dirac};
use crate::target::{antisymmetric_defect, TargetChart};
use crate::{Error, Result};

/// Parts of the discrete energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    /// `½∫|dφ|²`
    pub dirichlet: f64,
    /// `½∫⟨ψ, D̸ψ⟩`
    pub spinor: f64,
    /// `½∫⟨ψ, γ_α A(dφ(e_α), ψ)⟩`
    pub torsion_coupling: f64,
    /// `(1/12)∫R_ijkl⟨ψ^i,ψ^k⟩⟨ψ^j,ψ^l⟩`, present in curvature-term mode.
    pub curvature_term: Option<f64>,
    pub imag_defect: f64,
}

/// Which curvature enters the quartic spinor term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    /// `R^LC` together with `D̸`.
    LeviCivita,
    /// `R^Tor` together with `D^Tor`; needs parallel, totally antisymmetric torsion.
    ParallelSkew,
}

impl CurvatureMode {
    pub fn connection(self) -> Connection {
        match self {
            Self::LeviCivita => Connection::LeviCivita,
            Self::ParallelSkew => Connection::Torsion,
        }
    }
}

/// Which Euler-Lagrange system a residual refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElMode {
    Torsion,
    CurvatureTerm(CurvatureMode),
}

impl ElMode {
    pub fn connection(self) -> Connection {
        match self {
            Self::Torsion => Connection::Torsion,
            Self::CurvatureTerm(m) => m.connection(),
        }
    }
}

/// Residuals of the coupled system.
#[derive(Clone, Debug)]
pub struct ElResidual {
    /// `τ − 𝓡 − F^Tor` or `τ − 𝓡 − 𝓡̃`, node-major.
    pub map_residual: Vec<f64>,
    /// `D^Tor ψ`, or `Dψ − ⅓R(ψ,ψ)ψ`.
    pub spinor_residual: VectorSpinorField,
    pub map_norm: f64,
    pub spinor_norm: f64,
}

/// `½Σ_α g(X_α, X_α)` at one node.
fn dirichlet_density(bg: &Background, node: usize) -> f64 {
    let f = &bg.frames()[node];
    f.frame_derivative.iter().map(|x| 0.5 * x.dot(&(&f.g * x))).sum()
}

/// `(½∫|dφ|², ½∫⟨ψ,D̸ψ⟩, ½∫⟨ψ,D^Torψ⟩)`, the last two still complex.
fn energy_parts(bg: &Background, psi: &VectorSpinorField, torsion: bool) -> (f64, Complex64, Complex64) {
    let w = bg.grid().area_weight();
    let dirichlet = w * (0..bg.node_count()).map(|node| dirichlet_density(bg, node)).sum::<f64>();
    let u = bg.to_orthonormal(psi);
    let pair = |conn| {
        let du = hermitian_pairing(&u, &dirac_orthonormal(bg, &u, conn));
        du * (0.5 * w)
    };
    let lc = pair(Connection::LeviCivita);
    let tor = if torsion { pair(Connection::Torsion) } else { lc };
    (dirichlet, lc, tor)
}

fn hermitian_pairing(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `E_Tor(φ, ψ) = ½∫|dφ|² + ½∫⟨ψ, D^Tor ψ⟩`.
pub fn energy_torsion(bg: &Background, psi: &VectorSpinorField) -> Result<EnergyReport> {
    psi.check_paired(bg.map())?;
    let torsion = !bg.chart().torsion_spec().is_zero();
    let (dirichlet, lc, tor) = energy_parts(bg, psi, torsion);
    let spinor = lc.re;
    let torsion_coupling = tor.re - lc.re;
    Ok(EnergyReport {
        total: dirichlet + spinor + torsion_coupling,
        dirichlet,
        spinor,
        torsion_coupling,
        curvature_term: None,
        imag_defect: lc.im.abs().max(tor.im.abs()),
    })
}

/// Errors unless the torsion is zero or totally antisymmetric and parallel
/// along the map.
pub fn check_parallel_skew(bg: &Background) -> Result<()> {
    let chart = bg.chart();
    if chart.torsion_spec().is_zero() {
        return Ok(());
    }
    for (node, f) in bg.frames().iter().enumerate() {
        let scale = f.torsion.max_abs().max(1.0);
        let defect = antisymmetric_defect(&f.torsion);
        if defect > 1e-10 * scale {
            return Err(Error::RealValuednessPrecondition(format!(
                "torsion is not totally antisymmetric (defect {defect:.3e}); R^Tor lacks pair symmetry"
            )));
        }
        let nabla = chart.nabla_torsion_at(&bg.map().value(node))?.max_abs();
        if nabla > 1e-6 * scale {
            return Err(Error::RealValuednessPrecondition(format!(
                "torsion is not parallel (|∇A| = {nabla:.3e}); R^Tor lacks pair symmetry"
            )));
        }
    }
    Ok(())
}

/// Energy with the quartic curvature term,
/// `½∫|dφ|² + ½∫⟨ψ, Dψ⟩ + (1/12)∫R_ijkl⟨ψ^i,ψ^k⟩⟨ψ^j,ψ^l⟩`.
///
/// The coefficient makes the spinor equation read `Dψ = ⅓R(ψ,ψ)ψ` with
/// `(R(ψ,ψ)ψ)^m = −g^{mi} R_ijkl ⟨ψ^j,ψ^l⟩ ψ^k`.
pub fn energy_curvature(bg: &Background, psi: &VectorSpinorField, mode: CurvatureMode) -> Result<EnergyReport> {
    psi.check_paired(bg.map())?;
    let torsion = mode == CurvatureMode::ParallelSkew && !bg.chart().torsion_spec().is_zero();
    if mode == CurvatureMode::ParallelSkew {
        check_parallel_skew(bg)?;
    }
    let (dirichlet, lc, tor) = energy_parts(bg, psi, torsion);
    let quartic = curvature_quartic(bg, psi, mode)?;
    let curvature_term = quartic.re / 12.0;
    let spinor = lc.re;
    let torsion_coupling = tor.re - lc.re;
    Ok(EnergyReport {
        total: dirichlet + spinor + torsion_coupling + curvature_term,
        dirichlet,
        spinor,
        torsion_coupling,
        curvature_term: Some(curvature_term),
        imag_defect: lc.im.abs().max(tor.im.abs()).max(quartic.im.abs() / 12.0),
    })
}

/// The energy whose critical points `el_residual` describes in `mode`.
pub fn energy_for(bg: &Background, psi: &VectorSpinorField, mode: ElMode) -> Result<EnergyReport> {
    match mode {
        ElMode::Torsion => energy_torsion(bg, psi),
        ElMode::CurvatureTerm(m) => energy_curvature(bg, psi, m),
    }
}

/// Euler-Lagrange residuals. In every mode
/// `dE/dt = ∫ −⟨η, map_residual⟩ + Re⟨ξ, spinor_residual⟩` for a variation
/// with `∂_tφ = η` and `∇_t ψ = ξ`.
pub fn el_residual(bg: &Background, psi: &VectorSpinorField, mode: ElMode) -> Result<ElResidual> {
    psi.check_paired(bg.map())?;
    let has_torsion = !bg.chart().torsion_spec().is_zero();
    let mut map_residual = tension(bg)?;
    let (spinor_residual, use_torsion) = match mode {
        ElMode::Torsion => (twisted_dirac(bg, psi, has_torsion)?, has_torsion),
        ElMode::CurvatureTerm(m) => {
            if m == CurvatureMode::ParallelSkew {
                check_parallel_skew(bg)?;
            }
            let torsion = m == CurvatureMode::ParallelSkew && has_torsion;
            let d = twisted_dirac(bg, psi, torsion)?;
            let q = quartic_endomorphism(bg, psi, m)?;
            (d.axpy(-1.0 / 3.0, &q), torsion)
        }
    };
    let r = curvature_coupling(bg, psi)?;
    map_residual.iter_mut().zip(&r).for_each(|(m, v)| *m -= v);
    if use_torsion {
        let f = f_tor(bg, psi)?;
        map_residual.iter_mut().zip(&f).for_each(|(m, v)| *m -= v);
    }
    if let ElMode::CurvatureTerm(m) = mode {
        let rt = curvature_term_gradient(bg, psi, m)?;
        map_residual.iter_mut().zip(&rt).for_each(|(a, v)| *a -= v);
    }
    let map_norm = bg.vector_norm(&map_residual);
    let spinor_norm = bg.spinor_norm(&spinor_residual);
    Ok(ElResidual { map_residual, spinor_residual, map_norm, spinor_norm })
}

/// `∫ −⟨η, map_residual⟩ + Re⟨ξ, spinor_residual⟩`.
pub fn first_variation(bg: &Background, residual: &ElResidual, eta: &[f64], xi: &VectorSpinorField) -> f64 {
    -bg.vector_inner(eta, &residual.map_residual) + bg.spinor_inner(xi, &residual.spinor_residual).re
}

/// Analytic first variation against a centered difference of the energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationCheck {
    pub analytic: f64,
    pub finite_difference: f64,
    /// `|analytic − fd| / max(|fd|, 1e-3)`
    pub relative_error: f64,
}

/// Compares `dE/dt` at `t = 0` along `φ + tη`, `ψ + tζ` with the centered
/// difference of step `step`.
pub fn variational_check(
    chart: &TargetChart,
    map: &MapField,
    psi: &VectorSpinorField,
    eta: &[f64],
    zeta: &VectorSpinorField,
    mode: ElMode,
    step: f64,
) -> Result<VariationCheck> {
    let bg = Background::new(chart, map)?;
    let res = el_residual(&bg, psi, mode)?;
    let xi = covariant_variation(&bg, psi, eta, zeta, mode.connection());
    let analytic = first_variation(&bg, &res, eta, &xi);
    let energy = |t: f64| -> Result<f64> {
        let b = Background::new(chart, &map.perturbed(eta, t))?;
        Ok(energy_for(&b, &psi.axpy(t, zeta), mode)?.total)
    };
    let finite_difference = (energy(step)? - energy(-step)?) / (2.0 * step);
    let relative_error = (analytic - finite_difference).abs() / finite_difference.abs().max(1e-3);
    Ok(VariationCheck { analytic, finite_difference, relative_error })
}

/// `⟨ψ^m, γ_α ψ^k⟩` at one node.
pub(crate) fn gamma_pairing(psi: &VectorSpinorField, node: usize, alpha: usize) -> DMatrix<Complex64> {
    let n = psi.dim();
    DMatrix::from_fn(n, n, |m, k| {
        let a = psi.get(node, m);
        let b = gamma_apply(alpha, psi.get(node, k));
        a[0].conj() * b[0] + a[1].conj() * b[1]
    })
}

#[cfg(test)]
mod tests;
