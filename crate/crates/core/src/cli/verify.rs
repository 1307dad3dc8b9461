use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::energy::{check_parallel_skew, energy_curvature, energy_torsion, variational_check, CurvatureMode, ElMode};
use crate::fields::{random_spinor, random_vector, Background, MapField, VectorSpinorField};
use crate::operators::AssembledDiracOperator;
use crate::target::{decompose_torsion, TargetChart};
use crate::{Error, Result};

pub const SKEWNESS_TOLERANCE: f64 = 1e-12;
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-12;
pub const VARIATION_TOLERANCE: f64 = 1e-6;
pub const VARIATION_STEP: f64 = 1e-4;
pub const ADJOINTNESS_TOLERANCE: f64 = 1e-10;
pub const CONFORMAL_TOLERANCE: f64 = 1e-12;
pub const IMAG_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance, detail: None }
    }

    fn failed(name: impl Into<String>, value: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.into(), value, tolerance, passed: false, detail: Some(detail) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Runs every check that applies to the scenario. Errors are reserved for
/// configuration problems; failing checks are part of the report.
pub fn verify(scenario: &Scenario) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    match scenario.chart() {
        Err(Error::TorsionNotSkew { defect }) => {
            checks.push(Check::failed(
                "torsion-skewness",
                defect,
                SKEWNESS_TOLERANCE,
                format!("torsion violates A_ijk = -A_ikj (max defect {defect:e})"),
            ));
        }
        Err(e) => return Err(e),
        Ok(chart) => run_checks(scenario, &chart, &mut checks)?,
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { scenario: scenario.id.clone(), passed, checks })
}

fn run_checks(scenario: &Scenario, chart: &TargetChart, checks: &mut Vec<Check>) -> Result<()> {
    let map = scenario.initial_map(chart)?;
    let grid = *map.grid();
    let dim = chart.dim();
    let bg = Background::new(chart, &map)?;

    let (skew, decomposition) = torsion_checks(&bg)?;
    checks.push(Check::at_most("torsion-skewness", skew, SKEWNESS_TOLERANCE));
    checks.push(Check::at_most("torsion-decomposition", decomposition, DECOMPOSITION_TOLERANCE));

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let band = 1;
    let psi = random_spinor(&grid, dim, band, 0.3, &mut rng)?;
    let eta = random_vector(&grid, dim, band, 0.3, &mut rng)?;
    let zeta = random_spinor(&grid, dim, band, 0.3, &mut rng)?;

    let precondition = match scenario.curvature_mode() {
        Some(CurvatureMode::ParallelSkew) => {
            let check = match check_parallel_skew(&bg) {
                Ok(()) => Check {
                    name: "real-valuedness-precondition".into(),
                    value: 0.0,
                    tolerance: 0.0,
                    passed: true,
                    detail: None,
                },
                Err(Error::RealValuednessPrecondition(msg)) => Check::failed(
                    "real-valuedness-precondition",
                    1.0,
                    0.0,
                    format!("the curvature term is real only for totally antisymmetric parallel torsion: {msg}"),
                ),
                Err(e) => return Err(e),
            };
            let ok = check.passed;
            checks.push(check);
            ok
        }
        _ => true,
    };

    for mode in scenario.el_modes() {
        if matches!(mode, ElMode::CurvatureTerm(_)) && !precondition {
            continue;
        }
        let c = variational_check(chart, &map, &psi, &eta, &zeta, mode, VARIATION_STEP)?;
        let mut check =
            Check::at_most(format!("variational-identity-{}", mode_label(mode)), c.relative_error, VARIATION_TOLERANCE);
        check.detail = Some(format!("analytic {:e}, finite difference {:e}", c.analytic, c.finite_difference));
        checks.push(check);
    }

    let torsion = !chart.torsion_spec().is_zero();
    let op = AssembledDiracOperator::from_background(bg.clone(), torsion);
    checks.push(Check::at_most(
        "dirac-self-adjointness",
        adjointness_defect(&op, scenario.seed),
        ADJOINTNESS_TOLERANCE,
    ));

    checks.push(Check::at_most("conformal-invariance", conformal_drift(chart, &map, &psi)?, CONFORMAL_TOLERANCE));

    let mut imag = energy_torsion(&bg, &psi)?.imag_defect;
    if let (Some(mode), true) = (scenario.curvature_mode(), precondition) {
        imag = imag.max(energy_curvature(&bg, &psi, mode)?.imag_defect);
    }
    checks.push(Check::at_most("real-valuedness", imag, IMAG_TOLERANCE));
    Ok(())
}

fn mode_label(mode: ElMode) -> &'static str {
    match mode {
        ElMode::Torsion => "torsion",
        ElMode::CurvatureTerm(CurvatureMode::LeviCivita) => "curvature-term-levi-civita",
        ElMode::CurvatureTerm(CurvatureMode::ParallelSkew) => "curvature-term-parallel-skew",
    }
}

/// Worst skew defect and worst decomposition defect over the nodes, relative
/// to the torsion size.
fn torsion_checks(bg: &Background) -> Result<(f64, f64)> {
    let mut skew: f64 = 0.0;
    let mut decomposition: f64 = 0.0;
    for f in bg.frames() {
        let a = &f.torsion;
        let scale = a.max_abs().max(1.0);
        skew = skew.max(a.skew_defect() / scale);
        let d = decompose_torsion(a, &f.g)?;
        let back = d.reconstruct();
        let err = a.as_slice().iter().zip(back.as_slice()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        decomposition = decomposition.max(err / scale);
    }
    Ok((skew, decomposition))
}

/// `max |⟨D̂u, v⟩ − ⟨u, D̂v⟩| / (‖D̂‖‖u‖‖v‖)` over a few random pairs, with
/// `‖D̂‖` bounded below by the observed images.
fn adjointness_defect(op: &AssembledDiracOperator, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xad70);
    let dim = op.dimension();
    let mut random = || -> Vec<Complex64> {
        (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    };
    let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>();
    let norm = |a: &[Complex64]| dot(a, a).re.sqrt();
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let (u, v) = (random(), random());
        let (du, dv) = (op.apply_orthonormal(&u), op.apply_orthonormal(&v));
        let scale = (norm(&du) / norm(&u)).max(norm(&dv) / norm(&v)).max(1.0) * norm(&u) * norm(&v);
        worst = worst.max((dot(&du, &v) - dot(&u, &dv)).norm() / scale);
    }
    worst
}

/// Relative change of the energy under `λ → cλ`, `ψ → c^{-1/2}ψ`.
fn conformal_drift(chart: &TargetChart, map: &MapField, psi: &VectorSpinorField) -> Result<f64> {
    let base = energy_torsion(&Background::new(chart, map)?, psi)?.total;
    let lambda = map.grid().conformal_factor;
    let mut drift: f64 = 0.0;
    for c in [0.5, 2.0, 7.3] {
        let scaled = map.with_grid(map.grid().with_conformal_factor(c * lambda));
        let e = energy_torsion(&Background::new(chart, &scaled)?, &psi.scaled(c.powf(-0.5)))?.total;
        drift = drift.max((e - base).abs() / base.abs().max(1.0));
    }
    Ok(drift)
}
