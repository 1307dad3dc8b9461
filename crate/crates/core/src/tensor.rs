//! Small dense tensors over a target chart of dimension `n`.
//!
//! Storage is row-major in the index order used by the accessor, so
//! `Tensor3[[i, j, k]]` lives at `(i * n + j) * n + k`.

use std::ops::{Add, Index, IndexMut, Sub};

use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t[[i, j, k]] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Builds a tensor from a flat row-major slice of length `n³`.
    pub fn from_slice(n: usize, values: &[f64]) -> Option<Self> {
        (values.len() == n * n * n).then(|| Self { n, data: values.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Full contraction `g^{aa'} g^{bb'} g^{cc'} S_abc T_a'b'c'`.
    pub fn inner(&self, other: &Self, g_inv: &DMatrix<f64>) -> f64 {
        let n = self.n;
        // raise all three slots of `other` first
        let raised = Tensor3::from_fn(n, |a, b, c| {
            let mut s = 0.0;
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        s += g_inv[(a, p)] * g_inv[(b, q)] * g_inv[(c, r)] * other[[p, q, r]];
                    }
                }
            }
            s
        });
        self.data.iter().zip(&raised.data).map(|(x, y)| x * y).sum()
    }

    /// Largest `|T_ijk + T_ikj|`.
    pub fn skew_defect(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m = m.max((self[[i, j, k]] + self[[i, k, j]]).abs());
                }
            }
        }
        m
    }
}

impl Index<[usize; 3]> for Tensor3 {
    type Output = f64;
    fn index(&self, [i, j, k]: [usize; 3]) -> &f64 {
        &self.data[(i * self.n + j) * self.n + k]
    }
}

impl IndexMut<[usize; 3]> for Tensor3 {
    fn index_mut(&mut self, [i, j, k]: [usize; 3]) -> &mut f64 {
        &mut self.data[(i * self.n + j) * self.n + k]
    }
}

impl Add for &Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: &Tensor3) -> Tensor3 {
        Tensor3 { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        Tensor3 { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        t[[i, j, k, l]] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest violation of antisymmetry in the first index pair.
    pub fn first_pair_defect(&self) -> f64 {
        self.symmetry_defect(|t, [i, j, k, l]| t[[i, j, k, l]] + t[[j, i, k, l]])
    }

    /// Largest violation of antisymmetry in the second index pair.
    pub fn second_pair_defect(&self) -> f64 {
        self.symmetry_defect(|t, [i, j, k, l]| t[[i, j, k, l]] + t[[i, j, l, k]])
    }

    /// Largest `|T_ijkl - T_klij|`.
    pub fn pair_swap_defect(&self) -> f64 {
        self.symmetry_defect(|t, [i, j, k, l]| t[[i, j, k, l]] - t[[k, l, i, j]])
    }

    fn symmetry_defect(&self, f: impl Fn(&Self, [usize; 4]) -> f64) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        m = m.max(f(self, [i, j, k, l]).abs());
                    }
                }
            }
        }
        m
    }
}

impl Index<[usize; 4]> for Tensor4 {
    type Output = f64;
    fn index(&self, [i, j, k, l]: [usize; 4]) -> &f64 {
        &self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }
}

impl IndexMut<[usize; 4]> for Tensor4 {
    fn index_mut(&mut self, [i, j, k, l]: [usize; 4]) -> &mut f64 {
        &mut self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }
}

impl Add for &Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: &Tensor4) -> Tensor4 {
        Tensor4 { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Tensor4 {
    type Output = Tensor4;
    fn sub(self, rhs: &Tensor4) -> Tensor4 {
        Tensor4 { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Levi-Civita symbol in three dimensions.
pub fn epsilon3(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_contraction_identity() {
        // ε_rli ε_rjk = δ_lj δ_ik - δ_lk δ_ij
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for l in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        let lhs: f64 = (0..3).map(|r| epsilon3(r, l, i) * epsilon3(r, j, k)).sum();
                        assert_eq!(lhs, d(l, j) * d(i, k) - d(l, k) * d(i, j));
                    }
                }
            }
        }
    }

    #[test]
    fn inner_with_identity_metric_is_euclidean() {
        let a = Tensor3::from_fn(2, |i, j, k| (i + 2 * j + 3 * k) as f64);
        let g = DMatrix::identity(2, 2);
        let e: f64 = a.as_slice().iter().map(|v| v * v).sum();
        assert_eq!(a.inner(&a, &g), e);
    }
}
