//! Small dense complex matrices for the Kac-Rice regression.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// Max absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Cholesky factor `L` of a Hermitian positive definite matrix, `M = L Lᴴ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: CMatrix,
}

impl Cholesky {
    /// `None` when a pivot is not strictly positive.
    pub fn new(m: &CMatrix) -> Option<Self> {
        let n = m.order();
        let mut l = CMatrix::zeros(n);
        for j in 0..n {
            let mut d = m[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) {
                return None;
            }
            let djj = libm::sqrt(d);
            l[(j, j)] = Complex64::new(djj, 0.0);
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(Self { l })
    }

    pub fn determinant(&self) -> f64 {
        (0..self.l.order()).map(|i| self.l[(i, i)].re * self.l[(i, i)].re).product()
    }

    /// `L⁻¹ B` for a square right-hand side.
    pub fn forward_solve(&self, b: &CMatrix) -> CMatrix {
        let n = self.l.order();
        let mut x = b.clone();
        for col in 0..n {
            for i in 0..n {
                let mut s = x[(i, col)];
                for k in 0..i {
                    s -= self.l[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s / self.l[(i, i)].re;
            }
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.l.order();
        let identity = CMatrix::from_fn(n, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let y = self.forward_solve(&identity);
        // M⁻¹ = L⁻ᴴ L⁻¹ = Yᴴ Y
        let yh = y.adjoint();
        CMatrix::from_fn(n, |i, j| (0..n).map(|k| yh[(i, k)] * y[(k, j)]).sum())
    }
}

/// `1`-norm condition number of a Hermitian positive definite matrix.
pub fn condition_number(m: &CMatrix, chol: &Cholesky) -> f64 {
    m.norm1() * chol.inverse().norm1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cholesky_reconstructs_and_inverts() {
        let m = CMatrix::from_fn(3, |i, j| match (i, j) {
            (0, 0) => c(4.0, 0.0),
            (1, 1) => c(3.0, 0.0),
            (2, 2) => c(2.0, 0.0),
            (0, 1) => c(1.0, 0.5),
            (1, 0) => c(1.0, -0.5),
            (1, 2) => c(0.0, -0.3),
            (2, 1) => c(0.0, 0.3),
            _ => c(0.2, 0.0),
        });
        let ch = Cholesky::new(&m).unwrap();
        let inv = ch.inverse();
        for i in 0..3 {
            for j in 0..3 {
                let p: Complex64 = (0..3).map(|k| m[(i, k)] * inv[(k, j)]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p - c(e, 0.0)).norm() < 1e-14);
            }
        }
        // determinant by cofactor expansion
        let det = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
        assert!((ch.determinant() - det.re).abs() < 1e-12 && det.im.abs() < 1e-12);
        assert!(condition_number(&m, &ch) >= 1.0);
    }

    #[test]
    fn indefinite_matrix_has_no_factor() {
        let m = CMatrix::from_fn(2, |i, j| if i == j { c(1.0, 0.0) } else { c(2.0, 0.0) });
        assert!(Cholesky::new(&m).is_none());
    }
}
