//! Clifford algebra of the flat 2-plane acting on rank-2 complex spinors.
//!
//! The representation is `γ₁ = iσ₁`, `γ₂ = iσ₂`. Both matrices are
//! skew-Hermitian and satisfy `γ_α γ_β + γ_β γ_α = -2 δ_αβ`.
//!
//! The Hermitian product [`spinor_inner`] is conjugate-linear in its FIRST
//! argument: `⟨ψ, χ⟩ = Σ_s conj(ψ_s) χ_s`.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// One fibre of the spinor bundle over a grid node.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SpinorValue(pub [Complex64; 2]);

impl SpinorValue {
    pub const ZERO: Self = Self([ZERO, ZERO]);

    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self([a, b])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }
}

/// A 2×2 complex matrix stored row-major.
pub type Mat2 = [[Complex64; 2]; 2];

/// Matrices representing Clifford multiplication by the orthonormal frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CliffordFrame {
    pub gamma: [Mat2; 2],
}

impl Default for CliffordFrame {
    fn default() -> Self {
        Self::standard()
    }
}

impl CliffordFrame {
    /// `γ₁ = iσ₁`, `γ₂ = iσ₂`.
    pub const fn standard() -> Self {
        Self { gamma: [[[ZERO, I], [I, ZERO]], [[ZERO, ONE], [Complex64::new(-1.0, 0.0), ZERO]]] }
    }

    pub fn apply(&self, alpha: usize, psi: SpinorValue) -> SpinorValue {
        mat_vec(&self.gamma[alpha], psi)
    }

    /// `max |γ_α γ_β + γ_β γ_α + 2 δ_αβ|` over all entries.
    pub fn anticommutator_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let ab = mat_mul(&self.gamma[a], &self.gamma[b]);
                let ba = mat_mul(&self.gamma[b], &self.gamma[a]);
                for r in 0..2 {
                    for c in 0..2 {
                        let target = if a == b && r == c { -2.0 } else { 0.0 };
                        worst = worst.max((ab[r][c] + ba[r][c] - target).norm());
                    }
                }
            }
        }
        worst
    }

    /// `max |γ_α + γ_α†|`.
    pub fn skew_hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for g in &self.gamma {
            for r in 0..2 {
                for c in 0..2 {
                    worst = worst.max((g[r][c] + g[c][r].conj()).norm());
                }
            }
        }
        worst
    }
}

/// The fixed representation used throughout the crate.
pub const GAMMA: CliffordFrame = CliffordFrame::standard();

/// `γ_α ψ` for frame index `alpha ∈ {0, 1}` (the vectors `e₁`, `e₂`).
///
/// # Panics
/// If `alpha > 1`.
pub fn clifford_multiply(alpha: usize, psi: SpinorValue) -> SpinorValue {
    assert!(alpha < 2, "frame index {alpha} out of range for a surface");
    GAMMA.apply(alpha, psi)
}

/// Clifford action on raw components, used by the field kernels.
#[inline]
pub fn gamma_apply(alpha: usize, s: [Complex64; 2]) -> [Complex64; 2] {
    match alpha {
        // iσ₁ (a, b) = (i b, i a)
        0 => [I * s[1], I * s[0]],
        // iσ₂ (a, b) = (b, -a)
        _ => [s[1], -s[0]],
    }
}

pub fn spinor_inner(psi: SpinorValue, chi: SpinorValue) -> Complex64 {
    psi.0[0].conj() * chi.0[0] + psi.0[1].conj() * chi.0[1]
}

#[inline]
pub fn inner2(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn mat_vec(m: &Mat2, v: SpinorValue) -> SpinorValue {
    SpinorValue([m[0][0] * v.0[0] + m[0][1] * v.0[1], m[1][0] * v.0[0] + m[1][1] * v.0[1]])
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}
