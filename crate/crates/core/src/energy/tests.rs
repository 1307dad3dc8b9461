use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fields::{random_map, random_spinor, random_vector, GridGeometry, MapField};
use crate::target::{catalog, TargetChart, TorsionSpec, VectorField};

fn grid(n: usize, lambda: f64) -> GridGeometry {
    GridGeometry::new(n, TAU, lambda).unwrap()
}

/// Returns `(analytic, finite difference)` first variations.
fn variation_pair(chart: &TargetChart, mode: ElMode, seed: u64) -> (f64, f64) {
    let g = grid(16, 1.2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = random_map(chart, &g, 1, 0.3, &mut rng).unwrap();
    let psi = random_spinor(&g, chart.dim(), 1, 0.3, &mut rng).unwrap();
    let eta = random_vector(&g, chart.dim(), 1, 0.3, &mut rng).unwrap();
    let zeta = random_spinor(&g, chart.dim(), 1, 0.3, &mut rng).unwrap();
    let c = variational_check(chart, &map, &psi, &eta, &zeta, mode, 1e-4).unwrap();
    (c.analytic, c.finite_difference)
}

fn assert_variation(chart: &TargetChart, mode: ElMode, seeds: std::ops::Range<u64>) {
    for seed in seeds {
        let (a, fd) = variation_pair(chart, mode, seed);
        let rel = (a - fd).abs() / fd.abs().max(1e-3);
        assert!(rel <= 1e-6, "{} {mode:?} seed {seed}: analytic {a} vs fd {fd} (rel {rel:.2e})", chart.name());
    }
}

fn sphere_vectorial() -> TargetChart {
    let v = VectorField::new(|y| {
        nalgebra::DVector::from_vec(vec![0.3 * y[1].sin(), 0.2 + 0.1 * y[0] * y[2], -0.25 * y[0].cos()])
    });
    catalog::sphere(3).with_torsion(TorsionSpec::Vectorial(v)).unwrap()
}

#[test]
fn trivial_energies() {
    let g = grid(8, 1.0);
    let bg = Background::new(&catalog::flat(3), &MapField::constant(g, &[0.4, 0.1, 0.0])).unwrap();
    let e = energy_torsion(&bg, &VectorSpinorField::zeros(&g, 3)).unwrap();
    assert_eq!(e.total, 0.0);

    let bg = Background::new(&catalog::flat(3), &MapField::wrap(g, 3, 1, TAU)).unwrap();
    let e = energy_torsion(&bg, &VectorSpinorField::zeros(&g, 3)).unwrap();
    assert!((e.total - 2.0 * PI * PI).abs() < 1e-12, "{}", e.total);
}

#[test]
fn conformal_invariance() {
    for chart in [catalog::sphere(2), catalog::s3_parallel_skew(0.7), sphere_vectorial()] {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = grid(16, 1.0);
        let map = random_map(&chart, &g, 3, 0.5, &mut rng).unwrap();
        let psi = random_spinor(&g, chart.dim(), 3, 0.5, &mut rng).unwrap();
        let base = energy_torsion(&Background::new(&chart, &map).unwrap(), &psi).unwrap();
        for c in [0.5, 2.0, 7.3] {
            let scaled = map.with_grid(g.with_conformal_factor(c));
            let e = energy_torsion(&Background::new(&chart, &scaled).unwrap(), &psi.scaled(c.powf(-0.5))).unwrap();
            assert!((e.total - base.total).abs() <= 1e-12 * base.total.abs().max(1.0), "c = {c}");
        }
    }
}

#[test]
fn energy_is_real() {
    for chart in [
        catalog::flat(3),
        catalog::sphere(2),
        catalog::s3_parallel_skew(0.9),
        catalog::flat_vectorial(&[0.1, 0.5, -0.4]),
        sphere_vectorial(),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = grid(16, 1.0);
        let map = random_map(&chart, &g, 3, 0.5, &mut rng).unwrap();
        let psi = random_spinor(&g, chart.dim(), 3, 0.5, &mut rng).unwrap();
        let bg = Background::new(&chart, &map).unwrap();
        assert!(energy_torsion(&bg, &psi).unwrap().imag_defect <= 1e-12);
    }
}

#[test]
fn tension_is_dirichlet_gradient() {
    let chart = catalog::sphere(2);
    let g = grid(16, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let map = random_map(&chart, &g, 1, 0.3, &mut rng).unwrap();
    let eta = random_vector(&g, 2, 1, 0.3, &mut rng).unwrap();
    let zero = VectorSpinorField::zeros(&g, 2);
    let bg = Background::new(&chart, &map).unwrap();
    let analytic = -bg.vector_inner(&eta, &tension(&bg).unwrap());
    let e =
        |s: f64| energy_torsion(&Background::new(&chart, &map.perturbed(&eta, s)).unwrap(), &zero).unwrap().dirichlet;
    let fd = (e(1e-4) - e(-1e-4)) / 2e-4;
    assert!((analytic - fd).abs() <= 1e-6 * fd.abs(), "{analytic} vs {fd}");
}

#[test]
fn harmonic_wrap_has_no_residual() {
    let g = grid(16, 1.0);
    let bg = Background::new(&catalog::flat(3), &MapField::wrap(g, 3, 2, TAU)).unwrap();
    let res = el_residual(&bg, &VectorSpinorField::zeros(&g, 3), ElMode::Torsion).unwrap();
    assert!(res.map_norm < 1e-12 && res.spinor_norm == 0.0);
}

#[test]
fn couplings_vanish_trivially() {
    let g = grid(16, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let chart = catalog::flat(3);
    let map = random_map(&chart, &g, 2, 0.4, &mut rng).unwrap();
    let psi = random_spinor(&g, 3, 2, 0.4, &mut rng).unwrap();
    let bg = Background::new(&chart, &map).unwrap();
    assert!(curvature_coupling(&bg, &psi).unwrap().iter().all(|v| *v == 0.0));
    assert!(f_tor(&bg, &psi).unwrap().iter().all(|v| *v == 0.0));
    let s2 = catalog::sphere(3);
    let bg = Background::new(&s2, &random_map(&s2, &g, 2, 0.4, &mut rng).unwrap()).unwrap();
    assert!(curvature_coupling(&bg, &VectorSpinorField::zeros(&g, 3)).unwrap().iter().all(|v| *v == 0.0));
    let zero_v = VectorField::constant(nalgebra::DVector::zeros(3));
    assert!(f_tor_vectorial(&bg, &psi, &zero_v).unwrap().iter().all(|v| v.abs() < 1e-15));
    let flat_v = catalog::flat_vectorial(&[0.3, 0.1, 0.2]);
    let bg = Background::new(&flat_v, &MapField::constant(g, &[1.0, 0.0, 2.0])).unwrap();
    let v = VectorField::constant(nalgebra::DVector::from_vec(vec![0.3, 0.1, 0.2]));
    assert!(f_tor_vectorial(&bg, &psi, &v).unwrap().iter().all(|x| x.abs() < 1e-15));
}

#[test]
fn vectorial_f_tor_matches_general_contraction() {
    let v = VectorField::new(|y| {
        nalgebra::DVector::from_vec(vec![0.3 * y[1].sin(), 0.2 + 0.1 * y[0] * y[2], -0.25 * y[0].cos()])
    });
    let chart = catalog::sphere(3).with_torsion(TorsionSpec::Vectorial(v.clone())).unwrap();
    let g = grid(8, 1.1);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let map = random_map(&chart, &g, 2, 0.6, &mut rng).unwrap();
    let psi = random_spinor(&g, 3, 2, 0.6, &mut rng).unwrap();
    let bg = Background::new(&chart, &map).unwrap();
    let general = f_tor(&bg, &psi).unwrap();
    let special = f_tor_vectorial(&bg, &psi, &v).unwrap();
    let scale = general.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = general.iter().zip(&special).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(scale > 1e-3 && err <= 1e-10 * scale.max(1.0), "err {err} scale {scale}");
}

#[test]
fn master_identity_torsion_mode() {
    assert_variation(&catalog::flat(3), ElMode::Torsion, 0..2);
    assert_variation(&catalog::sphere(2), ElMode::Torsion, 0..2);
    assert_variation(&catalog::s3_parallel_skew(0.8), ElMode::Torsion, 0..2);
    assert_variation(&catalog::flat_vectorial(&[0.4, -0.3, 0.2]), ElMode::Torsion, 0..2);
    assert_variation(&sphere_vectorial(), ElMode::Torsion, 0..2);
    assert_variation(&catalog::conformal_bump(3, 0.2), ElMode::Torsion, 0..2);
}

#[test]
fn master_identity_curvature_mode() {
    let lc = ElMode::CurvatureTerm(CurvatureMode::LeviCivita);
    let skew = ElMode::CurvatureTerm(CurvatureMode::ParallelSkew);
    assert_variation(&catalog::sphere(2), lc, 0..2);
    assert_variation(&catalog::conformal_bump(3, 0.2), lc, 0..2);
    assert_variation(&catalog::s3_parallel_skew(0.8), skew, 0..2);
    assert_variation(&catalog::flat_skew(0.6), skew, 0..2);
}

#[test]
fn curvature_mode_real_and_guarded() {
    let g = grid(8, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for (chart, mode) in [
        (catalog::sphere(3), CurvatureMode::LeviCivita),
        (catalog::conformal_bump(3, 0.3), CurvatureMode::LeviCivita),
        (catalog::s3_parallel_skew(1.1), CurvatureMode::ParallelSkew),
        (catalog::flat_skew(0.5), CurvatureMode::ParallelSkew),
    ] {
        let map = random_map(&chart, &g, 2, 0.5, &mut rng).unwrap();
        let psi = random_spinor(&g, 3, 2, 0.8, &mut rng).unwrap();
        let bg = Background::new(&chart, &map).unwrap();
        let e = energy_curvature(&bg, &psi, mode).unwrap();
        assert!(e.imag_defect <= 1e-12, "{mode:?}: {}", e.imag_defect);
        assert!(e.curvature_term.unwrap().abs() > 0.0 || chart.name() == "flat");
    }
    let modulated =
        catalog::sphere(3).with_torsion(TorsionSpec::TotallyAntisymmetric { kappa: 0.8, modulation: 0.5 }).unwrap();
    let map = random_map(&modulated, &g, 2, 0.5, &mut rng).unwrap();
    let bg = Background::new(&modulated, &map).unwrap();
    let psi = random_spinor(&g, 3, 2, 0.5, &mut rng).unwrap();
    assert!(matches!(
        energy_curvature(&bg, &psi, CurvatureMode::ParallelSkew),
        Err(crate::Error::RealValuednessPrecondition(_))
    ));
    let vect = catalog::flat_vectorial(&[0.1, 0.2, 0.3]);
    let bg = Background::new(&vect, &map).unwrap();
    assert!(matches!(
        el_residual(&bg, &psi, ElMode::CurvatureTerm(CurvatureMode::ParallelSkew)),
        Err(crate::Error::RealValuednessPrecondition(_))
    ));
}

#[test]
fn flat_skew_curvature_term_uses_closed_form() {
    let kappa = 0.7;
    let g = grid(8, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let chart = catalog::flat_skew(kappa);
    let map = random_map(&chart, &g, 2, 0.5, &mut rng).unwrap();
    let psi = random_spinor(&g, 3, 2, 0.8, &mut rng).unwrap();
    let bg = Background::new(&chart, &map).unwrap();
    let e = energy_curvature(&bg, &psi, CurvatureMode::ParallelSkew).unwrap();
    // κ²(δ_ik δ_jl − δ_il δ_jk) a_ik a_jl = κ²((Σ a_ii)² − Σ |a_ij|²)
    let mut expect = 0.0;
    for node in 0..bg.node_count() {
        let a = |i: usize, k: usize| -> Complex64 {
            let (p, q) = (psi.get(node, i), psi.get(node, k));
            p[0].conj() * q[0] + p[1].conj() * q[1]
        };
        let tr: Complex64 = (0..3).map(|i| a(i, i)).sum();
        let sq: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| (a(i, j) * a(j, i)).re).sum();
        expect += kappa * kappa * ((tr * tr).re - sq);
    }
    expect *= g.area_weight() / 12.0;
    assert!((e.curvature_term.unwrap() - expect).abs() < 1e-12 * expect.abs().max(1.0));
}

#[test]
fn curvature_mode_flat_is_plain_dirac() {
    let g = grid(8, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chart = catalog::flat(3);
    let map = random_map(&chart, &g, 2, 0.5, &mut rng).unwrap();
    let psi = random_spinor(&g, 3, 2, 0.5, &mut rng).unwrap();
    let bg = Background::new(&chart, &map).unwrap();
    let res = el_residual(&bg, &psi, ElMode::CurvatureTerm(CurvatureMode::LeviCivita)).unwrap();
    let d = crate::operators::twisted_dirac(&bg, &psi, false).unwrap();
    assert!(res.spinor_residual.sub(&d).max_abs() == 0.0);
}

#[test]
fn energy_momentum_of_linear_wrap() {
    let g = grid(16, 1.3);
    let bg = Background::new(&catalog::flat(3), &MapField::wrap(g, 3, 1, TAU)).unwrap();
    let zero = VectorSpinorField::zeros(&g, 3);
    let em = energy_momentum(&bg, &zero).unwrap();
    let x2 = 1.0 / (1.3 * 1.3);
    for t in &em.t {
        assert!((t[0][0] - x2).abs() < 1e-12 && (t[1][1] + x2).abs() < 1e-12);
        assert!(t[0][1].abs() < 1e-14 && t[1][0].abs() < 1e-14);
    }
    assert!(em.divergence_norm < 1e-12 && em.trace_norm < 1e-12);
    let hopf = hopf_differential(&bg, &zero).unwrap();
    assert!(hopf.values.iter().all(|v| (v - Complex64::new(x2, 0.0)).norm() < 1e-12));
    assert!(hopf.dbar_norm <= 1e-12);

    let bg = Background::new(&catalog::flat(3), &MapField::constant(g, &[1.0, 2.0, 3.0])).unwrap();
    let em = energy_momentum(&bg, &zero).unwrap();
    assert!(em.t.iter().all(|t| t.iter().flatten().all(|v| *v == 0.0)));
    assert!(hopf_differential(&bg, &zero).unwrap().values.iter().all(|v| v.norm() == 0.0));
}
