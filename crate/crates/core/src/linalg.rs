//! Real-valued expansion of the complex baseband model, Cholesky factorization,
//! triangular solves and the operation counter shared by the detectors.
//!
//! Matrices are dense and row-major. The real expansion follows the stacking
//! `[Re; Im]` for vectors and the block layout `[[Re H, -Im H], [Im H, Re H]]`
//! for matrices, so that `expand(H) * expand(x) == expand(H * x)`.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("noise variance must be positive and finite, got {0}")]
    InvalidNoiseVariance(f64),
}

/// Dense complex matrix (channel gains), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.rows).map(move |r| self.data[r * self.cols + c])
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "vector length must match column count");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Relative Frobenius distance `|self - other| / |other|`.
    pub fn relative_error(&self, other: &RealMatrix) -> f64 {
        let diff: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        diff / other.frobenius_norm().max(f64::MIN_POSITIVE)
    }
}

impl std::ops::Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Count of real multiplications and divisions spent by a detector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct OpCounter(u64);

impl OpCounter {
    pub fn new() -> Self {
        Self(0)
    }

    #[inline]
    pub fn add(&mut self, ops: u64) {
        self.0 += ops;
    }

    pub fn get(&self) -> u64 {
        self.0
    }

    pub fn reset(&mut self) {
        self.0 = 0;
    }
}

/// Expands an `Nr x Nt` complex matrix into its `2Nr x 2Nt` real equivalent.
///
/// Column `l` carries `[Re h_l; Im h_l]` and column `l + Nt` carries
/// `[-Im h_l; Re h_l]`, which together form the real image of antenna `l`.
pub fn real_expand_matrix(h: &ComplexMatrix) -> RealMatrix {
    let (nr, nt) = (h.rows(), h.cols());
    let mut out = RealMatrix::zeros(2 * nr, 2 * nt);
    for r in 0..nr {
        for c in 0..nt {
            let v = h[(r, c)];
            out[(r, c)] = v.re;
            out[(r, c + nt)] = -v.im;
            out[(r + nr, c)] = v.im;
            out[(r + nr, c + nt)] = v.re;
        }
    }
    out
}

/// Stacks all real parts followed by all imaginary parts.
pub fn real_expand_vector(v: &[Complex64]) -> Vec<f64> {
    v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)).collect()
}

/// Inverse of [`real_expand_vector`]. Panics on odd length.
pub fn real_contract_vector(v: &[f64]) -> Vec<Complex64> {
    assert!(v.len().is_multiple_of(2), "real-expanded vector must have even length");
    let n = v.len() / 2;
    (0..n).map(|i| Complex64::new(v[i], v[i + n])).collect()
}

/// Upper-triangular Cholesky factor `D` with `D^T D = G` and positive diagonal.
///
/// Only the upper triangle of `g` is read.
pub fn cholesky_upper(g: &RealMatrix) -> Result<RealMatrix, LinalgError> {
    let n = g.rows();
    if g.cols() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: g.cols(),
        });
    }
    let mut d = RealMatrix::zeros(n, n);
    for i in 0..n {
        let mut pivot = g[(i, i)];
        for k in 0..i {
            pivot -= d[(k, i)] * d[(k, i)];
        }
        if pivot.is_nan() || pivot <= 0.0 || pivot.is_infinite() {
            return Err(LinalgError::NotPositiveDefinite { row: i, pivot });
        }
        let dii = pivot.sqrt();
        d[(i, i)] = dii;
        for j in (i + 1)..n {
            let mut s = g[(i, j)];
            for k in 0..i {
                s -= d[(k, i)] * d[(k, j)];
            }
            d[(i, j)] = s / dii;
        }
    }
    Ok(d)
}

/// Solves `D^T w = b` for upper-triangular `D` (forward substitution).
pub fn solve_upper_transposed(d: &RealMatrix, b: &[f64]) -> Vec<f64> {
    let n = d.rows();
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= d[(k, i)] * w[k];
        }
        w[i] = s / d[(i, i)];
    }
    w
}

/// Solves `D x = b` for upper-triangular `D` (back substitution).
pub fn solve_upper(d: &RealMatrix, b: &[f64]) -> Vec<f64> {
    let n = d.rows();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= d[(i, k)] * x[k];
        }
        x[i] = s / d[(i, i)];
    }
    x
}

/// Regularizer added to the Gram matrix: the noise variance when the system is
/// underdetermined (`Nt > Nr`), zero otherwise.
pub fn regularizer(nt: usize, nr: usize, sigma_n2: f64) -> f64 {
    if nt > nr {
        sigma_n2
    } else {
        0.0
    }
}

/// Everything the transmit-side sphere search needs from one received vector.
#[derive(Debug, Clone)]
pub struct RealModel {
    pub nt: usize,
    pub nr: usize,
    /// `2Nr x 2Nt` real channel.
    pub h_bar: RealMatrix,
    /// `H^T H + phi I`.
    pub g_bar: RealMatrix,
    /// Upper-triangular factor of `g_bar`.
    pub d_bar: RealMatrix,
    /// Unconstrained least-squares point `G^-1 H^T y`.
    pub rho_bar: Vec<f64>,
    /// Search centre `D rho`.
    pub z_bar: Vec<f64>,
    pub phi: f64,
}

impl RealModel {
    /// `|z - D x|^2` for a dense real-expanded candidate.
    pub fn metric(&self, x_bar: &[f64]) -> f64 {
        let dx = self.d_bar.mul_vec(x_bar);
        self.z_bar
            .iter()
            .zip(&dx)
            .map(|(z, v)| (z - v) * (z - v))
            .sum()
    }
}

pub fn build_real_model(
    h: &ComplexMatrix,
    y: &[Complex64],
    sigma_n2: f64,
) -> Result<RealModel, LinalgError> {
    let (nr, nt) = (h.rows(), h.cols());
    if y.len() != nr {
        return Err(LinalgError::DimensionMismatch {
            expected: nr,
            got: y.len(),
        });
    }
    if sigma_n2.is_nan() || sigma_n2 <= 0.0 || sigma_n2.is_infinite() {
        return Err(LinalgError::InvalidNoiseVariance(sigma_n2));
    }
    let phi = regularizer(nt, nr, sigma_n2);
    let h_bar = real_expand_matrix(h);
    let y_bar = real_expand_vector(y);
    let ht = h_bar.transpose();
    let mut g_bar = ht.matmul(&h_bar);
    for i in 0..2 * nt {
        g_bar[(i, i)] += phi;
    }
    let d_bar = cholesky_upper(&g_bar)?;
    let hty = ht.mul_vec(&y_bar);
    let w = solve_upper_transposed(&d_bar, &hty);
    let rho_bar = solve_upper(&d_bar, &w);
    let z_bar = d_bar.mul_vec(&rho_bar);
    Ok(RealModel {
        nt,
        nr,
        h_bar,
        g_bar,
        d_bar,
        rho_bar,
        z_bar,
        phi,
    })
}
