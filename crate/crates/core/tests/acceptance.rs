//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirac_torsion::energy::{
    energy_curvature, energy_momentum, energy_torsion, hopf_differential, variational_check, CurvatureMode, ElMode,
};
use dirac_torsion::fields::{
    random_map, random_smooth_fields, random_spinor, random_vector, Background, DerivativeMode, GridGeometry, MapField,
};
use dirac_torsion::operators::{weitzenbock_defect, AssembledDiracOperator};
use dirac_torsion::solver::{dirac_kernel_solve, harmonic_map_flow, uncoupled_solution, Backend, SolverConfig};
use dirac_torsion::target::{
    antisymmetric_defect, cartan_defect, catalog, decompose_torsion, vectorial_defect, TargetChart, TorsionSpec,
    VectorField,
};
use dirac_torsion::tensor::{Tensor3, Tensor4};
use dirac_torsion::Error;

type Outcome = Result<(bool, String), Error>;

/// Name, check, optional time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<f64>);

fn grid(n: usize) -> GridGeometry {
    GridGeometry::new(n, TAU, 1.0).unwrap()
}

fn random_torsion(n: usize, rng: &mut impl Rng) -> Tensor3 {
    let raw = Tensor3::from_fn(n, |_, _, _| rng.gen_range(-1.0..1.0));
    Tensor3::from_fn(n, |i, j, k| raw[[i, j, k]] - raw[[i, k, j]])
}

fn random_metric(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.5..0.5));
    DMatrix::identity(n, n) + &b * b.transpose()
}

fn max_diff(a: &Tensor3, b: &Tensor3) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn s3_modulated() -> TargetChart {
    catalog::sphere(3).with_torsion(TorsionSpec::TotallyAntisymmetric { kappa: 0.6, modulation: 0.5 }).unwrap()
}

fn variational_identity() -> Outcome {
    let targets = [
        catalog::flat(3),
        catalog::sphere(2),
        catalog::s3_parallel_skew(0.7),
        catalog::flat_vectorial(&[0.4, -0.3, 0.25]),
    ];
    let g = grid(16);
    let mut worst: f64 = 0.0;
    for chart in &targets {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_map(chart, &g, 1, 0.3, &mut rng)?;
            let psi = random_spinor(&g, chart.dim(), 1, 0.3, &mut rng)?;
            let eta = random_vector(&g, chart.dim(), 1, 0.3, &mut rng)?;
            let zeta = random_spinor(&g, chart.dim(), 1, 0.3, &mut rng)?;
            let c = variational_check(chart, &map, &psi, &eta, &zeta, ElMode::Torsion, 1e-4)?;
            worst = worst.max(c.relative_error);
        }
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.2e} over 80 samples")))
}

fn cartan_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut recon, mut ortho, mut defining): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for n in [3, 4] {
        for _ in 0..100 {
            let g = random_metric(n, &mut rng);
            let a = random_torsion(n, &mut rng);
            let d = decompose_torsion(&a, &g)?;
            let g_inv = g.clone().try_inverse().unwrap();
            recon = recon.max(max_diff(&d.reconstruct(), &a));
            let parts = [&d.vectorial, &d.antisymmetric, &d.cartan];
            for i in 0..3 {
                for j in i + 1..3 {
                    ortho = ortho.max(parts[i].inner(parts[j], &g_inv).abs());
                }
            }
            defining = defining
                .max(vectorial_defect(&d.vectorial, &g))
                .max(antisymmetric_defect(&d.antisymmetric))
                .max(cartan_defect(&d.cartan, &g));
        }
    }
    let mut planar: f64 = 0.0;
    for _ in 0..100 {
        let g = random_metric(2, &mut rng);
        let a = random_torsion(2, &mut rng);
        let d = decompose_torsion(&a, &g)?;
        planar = planar.max(d.antisymmetric.max_abs()).max(d.cartan.max_abs()).max(max_diff(&d.vectorial, &a));
    }
    let passed = recon <= 1e-12 && ortho <= 1e-12 && defining <= 1e-12 && planar <= 1e-12;
    Ok((passed, format!("reconstruction {recon:.1e}, orthogonality {ortho:.1e}, defining {defining:.1e}, dim 2 non-vectorial {planar:.1e}")))
}

fn curvature_with_torsion() -> Outcome {
    let y = [0.2, -0.4, 0.3];
    let plain = catalog::sphere(3);
    let reduction = plain.torsion_curvature_at(&y)?.max_abs_diff(&plain.lc_curvature_at(&y)?);

    let kappa = 0.8;
    let r = catalog::flat_skew(kappa).torsion_curvature_at(&y)?;
    let delta = |a: usize, b: usize| f64::from(u8::from(a == b));
    let closed =
        Tensor4::from_fn(3, |i, j, k, l| kappa * kappa * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k)));
    let flat = r.max_abs_diff(&closed);

    let vectorial = catalog::sphere(3)
        .with_torsion(TorsionSpec::Vectorial(VectorField::new(|y| {
            nalgebra::DVector::from_vec(vec![0.3 * y[1].sin(), 0.2 + 0.1 * y[0] * y[2], -0.25 * y[0].cos()])
        })))
        .unwrap();
    let mut pairs: f64 = 0.0;
    for chart in [s3_modulated(), vectorial, catalog::s3_parallel_skew(0.7)] {
        let r = chart.torsion_curvature_at(&y)?;
        pairs = pairs.max(r.first_pair_defect()).max(r.second_pair_defect());
    }
    let swap = s3_modulated().torsion_curvature_at(&y)?.pair_swap_defect();
    let passed = reduction <= 1e-14 && flat <= 1e-12 && pairs <= 1e-10 && swap >= 1e-3;
    Ok((
        passed,
        format!("A=0 {reduction:.1e}, flat κε {flat:.1e}, pair antisymmetry {pairs:.1e}, non-parallel swap {swap:.2e}"),
    ))
}

fn operator_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let specs = [
        TorsionSpec::Zero,
        TorsionSpec::Vectorial(VectorField::constant(nalgebra::DVector::from_vec(vec![0.3, -0.5, 0.2]))),
        TorsionSpec::TotallyAntisymmetric { kappa: 0.7, modulation: 0.0 },
        TorsionSpec::TotallyAntisymmetric { kappa: 0.7, modulation: 0.4 },
        TorsionSpec::CartanType(random_torsion(3, &mut rng)),
        TorsionSpec::Raw(random_torsion(3, &mut rng)),
    ];
    let g = grid(16);
    let mut adjoint: f64 = 0.0;
    for spec in specs {
        let chart = catalog::sphere(3).with_torsion(spec)?;
        let (map, _) = random_smooth_fields(&chart, &g, 5, 2, 0.4)?;
        let op = AssembledDiracOperator::new(&chart, &map, !chart.torsion_spec().is_zero())?;
        adjoint = adjoint.max(op.hermitian_defect()?);
    }

    let n = 3;
    let g8 = grid(8);
    let op = AssembledDiracOperator::new(&catalog::flat(n), &MapField::constant(g8, &[0.5; 3]), false)?;
    let mut got: Vec<f64> = op.dense_orthonormal()?.symmetric_eigenvalues().iter().copied().collect();
    got.sort_by(f64::total_cmp);
    let mut expect = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            let k = g8.wavenumber(a).hypot(g8.wavenumber(b)) / g8.conformal_factor;
            for _ in 0..n {
                expect.extend([k, -k]);
            }
        }
    }
    expect.sort_by(f64::total_cmp);
    let spectrum = got.iter().zip(&expect).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let chart = catalog::sphere(2);
    let defects: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let g = grid(n).with_derivative(DerivativeMode::Central4);
            let (map, psi) = random_smooth_fields(&chart, &g, 17, 2, 0.3)?;
            weitzenbock_defect(&Background::new(&chart, &map)?, &psi)
        })
        .collect::<Result<_, _>>()?;
    let order = (defects[0] / defects[1]).log2().min((defects[1] / defects[2]).log2());
    let passed = adjoint <= 1e-10 && got.len() == expect.len() && spectrum <= 1e-8 && order >= 1.9;
    Ok((passed, format!("self-adjointness {adjoint:.1e}, spectrum {spectrum:.1e}, Weitzenböck order {order:.2}")))
}

fn conformal_invariance() -> Outcome {
    let g = grid(16);
    let mut drift: f64 = 0.0;
    for chart in [catalog::sphere(2), catalog::s3_parallel_skew(0.7), catalog::flat_vectorial(&[0.2, 0.5, -0.4])] {
        let (map, psi) = random_smooth_fields(&chart, &g, 4, 3, 0.5)?;
        let base = energy_torsion(&Background::new(&chart, &map)?, &psi)?.total;
        for c in [0.5, 2.0, 7.3] {
            let scaled = map.with_grid(g.with_conformal_factor(c));
            let e = energy_torsion(&Background::new(&chart, &scaled)?, &psi.scaled(c.powf(-0.5)))?.total;
            drift = drift.max((e - base).abs() / base.abs().max(1.0));
        }
    }
    Ok((drift <= 1e-12, format!("max relative drift {drift:.1e}")))
}

fn real_valuedness() -> Outcome {
    let g = grid(16);
    let mut imag: f64 = 0.0;
    let all = [
        catalog::flat(3),
        catalog::sphere(2),
        catalog::s3_parallel_skew(0.7),
        catalog::flat_skew(0.4),
        catalog::flat_vectorial(&[0.4, -0.3, 0.25]),
        catalog::conformal_bump(3, 0.2),
        s3_modulated(),
    ];
    for chart in &all {
        let (map, psi) = random_smooth_fields(chart, &g, 8, 2, 0.4)?;
        imag = imag.max(energy_torsion(&Background::new(chart, &map)?, &psi)?.imag_defect);
    }
    let admissible = [
        (catalog::flat(3), CurvatureMode::LeviCivita),
        (catalog::sphere(2), CurvatureMode::LeviCivita),
        (catalog::s3_parallel_skew(0.7), CurvatureMode::ParallelSkew),
        (catalog::flat_skew(0.4), CurvatureMode::ParallelSkew),
    ];
    for (chart, mode) in &admissible {
        let (map, psi) = random_smooth_fields(chart, &g, 9, 2, 0.4)?;
        imag = imag.max(energy_curvature(&Background::new(chart, &map)?, &psi, *mode)?.imag_defect);
    }
    let mut rejected = 0;
    for chart in [s3_modulated(), catalog::flat_vectorial(&[0.4, -0.3, 0.25])] {
        let (map, psi) = random_smooth_fields(&chart, &g, 10, 2, 0.4)?;
        let result = energy_curvature(&Background::new(&chart, &map)?, &psi, CurvatureMode::ParallelSkew);
        if matches!(result, Err(Error::RealValuednessPrecondition(_))) {
            rejected += 1;
        }
    }
    Ok((
        imag <= 1e-12 && rejected == 2,
        format!("max imag_defect {imag:.1e}, inadmissible modes rejected {rejected}/2"),
    ))
}

fn on_shell_geometry() -> Outcome {
    let chart = catalog::flat_skew(0.3);
    let g = grid(32);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let eta = random_vector(&g, 3, 3, 0.4, &mut rng)?;
    let map0 = MapField::wrap(g, 3, 1, TAU).perturbed(&eta, 1.0);
    let config = SolverConfig { backend: Backend::Iterative, ..SolverConfig::default() };
    let result = uncoupled_solution(&chart, &map0, &config, None)?;
    let bg = Background::new(&chart, &result.map)?;
    let em = energy_momentum(&bg, &result.psi)?;
    let hopf = hopf_differential(&bg, &result.psi)?;
    let worst = em.trace_norm.max(em.antisymmetric_norm).max(em.divergence_norm).max(hopf.dbar_norm);
    let passed = result.summary.kernel.dimension > 0 && worst <= 1e-6;
    Ok((
        passed,
        format!(
            "kernel dimension {}, trace {:.1e}, antisymmetric {:.1e}, divergence {:.1e}, hopf dbar {:.1e}",
            result.summary.kernel.dimension, em.trace_norm, em.antisymmetric_norm, em.divergence_norm, hopf.dbar_norm
        ),
    ))
}

fn solver() -> Outcome {
    let chart = catalog::flat(3);
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let eta = random_vector(&g, 3, 3, 0.4, &mut rng)?;
    let map0 = MapField::wrap(g, 3, 1, TAU).perturbed(&eta, 1.0);
    let config = SolverConfig::default();
    let flow = harmonic_map_flow(&chart, &map0, &config)?;
    let energy =
        energy_torsion(&Background::new(&chart, &flow.map)?, &dirac_torsion::fields::VectorSpinorField::zeros(&g, 3))?
            .dirichlet;

    let n = 3;
    let op = AssembledDiracOperator::new(&chart, &MapField::constant(grid(8), &[0.1, 0.2, 0.3]), false)?;
    let kernel = dirac_kernel_solve(&op, &config)?;
    let passed = flow.iterations <= 500 && (energy - 2.0 * PI * PI).abs() <= 1e-6 && kernel.dimension == 2 * n;
    Ok((
        passed,
        format!(
            "{} flow iterations, energy − 2π² = {:.1e}, constant-map kernel dimension {}",
            flow.iterations,
            energy - 2.0 * PI * PI,
            kernel.dimension
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("variational identity", variational_identity, Some(60.0)),
        ("cartan decomposition", cartan_decomposition, Some(1.0)),
        ("curvature with torsion", curvature_with_torsion, None),
        ("operator suite", operator_suite, None),
        ("conformal invariance", conformal_invariance, None),
        ("real-valuedness", real_valuedness, None),
        ("on-shell geometry", on_shell_geometry, None),
        ("solver", solver, Some(120.0)),
    ];
    let mut all = true;
    for (index, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let seconds = start.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok((passed, detail)) => (passed, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = budget.is_none_or(|b| seconds <= b);
        let passed = passed && in_time;
        all &= passed;
        println!("{} criterion {} {name}: {detail} [{seconds:.2}s]", if passed { "PASS" } else { "FAIL" }, index + 1);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
