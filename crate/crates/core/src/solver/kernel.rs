use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Backend, SolverConfig};
use crate::fields::VectorSpinorField;
use crate::operators::AssembledDiracOperator;
use crate::{Error, Result};

/// Singular values below `KERNEL_RELATIVE_THRESHOLD · ‖D‖` count as kernel.
pub const KERNEL_RELATIVE_THRESHOLD: f64 = 1e-8;

const ITERATIVE_MAX_ITERATIONS: usize = 3000;
const ITERATIVE_SEED: u64 = 0x5eed;

/// Outcome of a kernel search for `D^Tor` along a fixed map.
#[derive(Clone, Debug, Serialize)]
pub struct KernelResult {
    /// Normalized kernel element, or zero when the kernel is empty.
    #[serde(skip)]
    pub psi: VectorSpinorField,
    pub dimension: usize,
    /// Smallest singular values found, ascending.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub operator_norm: f64,
    /// `‖D^Tor ψ‖ / ‖ψ‖` of the returned element, zero for an empty kernel.
    pub residual: f64,
    pub iterations: usize,
}

/// Counts singular values under the threshold and rejects gaps that are too
/// narrow to call.
fn classify(sigmas: &[f64], operator_norm: f64) -> Result<(usize, f64)> {
    let threshold = KERNEL_RELATIVE_THRESHOLD * operator_norm;
    if let Some(&sigma) = sigmas.iter().find(|&&s| s > threshold / 10.0 && s < threshold * 10.0) {
        return Err(Error::AmbiguousKernel { sigma, threshold });
    }
    Ok((sigmas.iter().filter(|&&s| s <= threshold).count(), threshold))
}

/// Finds `ker D^Tor` with the configured backend.
pub fn dirac_kernel_solve(op: &AssembledDiracOperator, config: &SolverConfig) -> Result<KernelResult> {
    config.validate()?;
    let (sigmas, vectors, operator_norm, iterations) = match config.backend {
        Backend::Dense => dense_singular(op)?,
        Backend::Iterative => iterative_singular(op, ITERATIVE_SEED)?,
    };
    let (dimension, threshold) = classify(&sigmas, operator_norm)?;
    let bg = op.background();
    let mut result = KernelResult {
        psi: VectorSpinorField::zeros(bg.grid(), bg.dim()),
        dimension,
        singular_values: sigmas.iter().copied().take(4 * bg.dim() + 4).collect(),
        threshold,
        operator_norm,
        residual: 0.0,
        iterations,
    };
    if dimension == 0 {
        return Ok(result);
    }
    let u: Vec<Complex64> = vectors.column(0).iter().copied().collect();
    let psi = bg.from_orthonormal(&u);
    let psi = psi.scaled(1.0 / bg.spinor_norm(&psi));
    let d = crate::operators::twisted_dirac(bg, &psi, op.uses_torsion())?;
    let residual = bg.spinor_norm(&d);
    if residual > config.kernel_tolerance {
        return Err(Error::KernelResidual { residual, tolerance: config.kernel_tolerance });
    }
    result.psi = psi;
    result.residual = residual;
    Ok(result)
}

/// `(σ ascending, matching orthonormal-frame vectors, ‖D‖, iterations)`.
type Singular = (Vec<f64>, DMatrix<Complex64>, f64, usize);

fn dense_singular(op: &AssembledDiracOperator) -> Result<Singular> {
    let m = op.dense_orthonormal()?;
    let dim = m.nrows();
    let h = faer::Mat::<Complex64>::from_fn(dim, dim, |r, c| m[(r, c)]);
    drop(m);
    let eig = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::InvalidConfig(format!("dense eigensolver failed: {e:?}")))?;
    let (values, u) = (eig.S().column_vector(), eig.U());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].re.abs().total_cmp(&values[b].re.abs()));
    let sigmas: Vec<f64> = order.iter().map(|&i| values[i].re.abs()).collect();
    let norm = sigmas.last().copied().unwrap_or(0.0);
    let vectors = DMatrix::from_fn(dim, dim, |r, c| u[(r, order[c])]);
    Ok((sigmas, vectors, norm, 0))
}

fn apply_d(op: &AssembledDiracOperator, x: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_vec(op.apply_orthonormal(x.as_slice()))
}

fn apply_h(op: &AssembledDiracOperator, x: &DVector<Complex64>) -> DVector<Complex64> {
    apply_d(op, &apply_d(op, x))
}

/// `(1 − λ⁻²Δ)⁻¹` componentwise.
fn precondition(op: &AssembledDiracOperator, x: &DVector<Complex64>) -> DVector<Complex64> {
    let bg = op.background();
    let stride = 2 * bg.dim();
    let s = bg.grid().conformal_factor.powi(-2);
    DVector::from_vec(bg.differentiator().helmholtz_solve_complex(x.as_slice(), stride, s))
}

/// Orthonormal basis of the column span, dropping nearly dependent directions.
fn orthonormalize(s: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut q = s.clone();
    for _ in 0..2 {
        let gram = q.adjoint() * &q;
        let eig = gram.symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
        let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 1e-14 * top).collect();
        let v = DMatrix::from_fn(q.ncols(), keep.len(), |r, c| {
            eig.eigenvectors[(r, keep[c])] / eig.eigenvalues[keep[c]].sqrt()
        });
        q *= v;
    }
    q
}

/// Rayleigh-Ritz for `H` on the orthonormal span of `q`: eigenvalues
/// ascending and the matching coefficient matrix.
fn rayleigh_ritz(op: &AssembledDiracOperator, q: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let hq = DMatrix::from_columns(&q.column_iter().map(|c| apply_h(op, &c.into_owned())).collect::<Vec<_>>());
    let t = q.adjoint() * hq;
    let t = (&t + t.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let c = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (order.iter().map(|&i| eig.eigenvalues[i]).collect(), c)
}

fn apply_columns(
    op: &AssembledDiracOperator,
    x: &DMatrix<Complex64>,
    f: fn(&AssembledDiracOperator, &DVector<Complex64>) -> DVector<Complex64>,
) -> DMatrix<Complex64> {
    DMatrix::from_columns(&x.column_iter().map(|c| f(op, &c.into_owned())).collect::<Vec<_>>())
}

/// LOBPCG for the smallest eigenpairs of `H = D̂²` with a Helmholtz
/// preconditioner. Singular values of `D̂` on the converged block come from
/// an SVD of `D̂X`.
fn iterative_singular(op: &AssembledDiracOperator, seed: u64) -> Result<Singular> {
    let dim = op.dimension();
    let block = (2 * op.background().dim() + 4).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random = |rows, cols| {
        DMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    };

    // ‖H‖ by power iteration
    let mut v = random(dim, 1).column(0).into_owned();
    let mut h_norm = 0.0;
    for _ in 0..40 {
        v /= Complex64::new(v.norm(), 0.0);
        let hv = apply_h(op, &v);
        h_norm = hv.norm();
        v = hv;
    }
    let h_norm = h_norm.max(f64::MIN_POSITIVE);
    let tolerance = 1e-11 * h_norm;

    let x0 = orthonormalize(&random(dim, block));
    let (theta0, c) = rayleigh_ritz(op, &x0);
    let mut x = &x0 * c;
    let mut theta = theta0;
    let mut p: Option<DMatrix<Complex64>> = None;
    let mut iterations = 0;
    while iterations < ITERATIVE_MAX_ITERATIONS {
        let hx = apply_columns(op, &x, apply_h);
        let ritz = DMatrix::from_diagonal(&DVector::from_iterator(
            block,
            theta.iter().take(block).map(|t| Complex64::new(*t, 0.0)),
        ));
        let residual = hx - &x * ritz;
        let worst = residual.column_iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if worst <= tolerance {
            break;
        }
        iterations += 1;
        let mut cols: Vec<DVector<Complex64>> =
            residual.column_iter().map(|c| precondition(op, &c.into_owned())).collect();
        if let Some(p) = &p {
            cols.extend(p.column_iter().map(|c| c.into_owned()));
        }
        let mut y = DMatrix::from_columns(&cols);
        for _ in 0..2 {
            y -= &x * (x.adjoint() * &y);
        }
        let z = orthonormalize(&y);
        let mut q = x.clone().resize_horizontally(block + z.ncols(), Complex64::new(0.0, 0.0));
        q.columns_mut(block, z.ncols()).copy_from(&z);
        let (t, c) = rayleigh_ritz(op, &q);
        let lead = c.columns(0, block);
        x = &q * lead;
        p = (z.ncols() > 0).then(|| &z * c.view((block, 0), (z.ncols(), block)));
        theta = t;
    }

    let svd = apply_columns(op, &x, apply_d).svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let rotated = &x * v_t.adjoint();
    let mut pairs: Vec<(f64, DVector<Complex64>)> =
        rotated.column_iter().map(|c| (apply_d(op, &c.into_owned()).norm(), c.into_owned())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sigmas = pairs.iter().map(|p| p.0).collect();
    let vectors = DMatrix::from_columns(&pairs.into_iter().map(|p| p.1).collect::<Vec<_>>());
    Ok((sigmas, vectors, h_norm.sqrt(), iterations))
}

#[cfg(test)]
pub(super) fn classify_for_tests(sigmas: &[f64], norm: f64) -> Result<(usize, f64)> {
    classify(sigmas, norm)
}
