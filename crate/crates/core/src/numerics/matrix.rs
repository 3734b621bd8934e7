use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense matrix stored in column-major order: entry `(i, j)` lives at
/// `data[j * rows + i]`, so every column is a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Scalar> Matrix<E> {
    /// Validated constructor: non-empty, finite, `data.len() == rows * cols`.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                pos % rows,
                pos / rows
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major convenience constructor, mostly for tests.
    pub fn from_rows(rows: &[Vec<E>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::from_col_major(r, c, (0..r * c).map(|k| rows[k % r][k / r]).collect())
    }

    /// Unchecked constructor for internal kernels; shape must already match.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<E>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_parts(rows, cols, vec![E::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_parts(rows, cols, data)
    }

    pub fn from_diag(d: &[E]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns<C: AsRef<[E]>>(columns: &[C]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        if columns.iter().any(|c| c.as_ref().len() != rows) {
            return Err(Error::Shape("columns have different lengths".into()));
        }
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            data.extend_from_slice(c.as_ref());
        }
        Self::from_col_major(rows, columns.len(), data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major backing storage.
    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<E> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[E] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [E] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    /// Mutable access to two distinct columns at once.
    pub(crate) fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [E], &mut [E]) {
        assert!(p < q && q < self.cols);
        let r = self.rows;
        let (head, tail) = self.data.split_at_mut(q * r);
        (&mut head[p * r..(p + 1) * r], &mut tail[..r])
    }

    pub fn row(&self, i: usize) -> Vec<E> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.cols);
        Self::from_parts(
            self.rows,
            end - start,
            self.data[start * self.rows..end * self.rows].to_vec(),
        )
    }

    /// Selected columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self::from_parts(self.rows, idx.len(), data)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<F: Scalar>(&self, f: impl Fn(E) -> F) -> Matrix<F> {
        Matrix::from_parts(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn to_complex(&self) -> Matrix<Complex<E::Real>> {
        self.map(Scalar::to_complex)
    }

    /// Real parts, discarding imaginary components.
    pub fn real_part(&self) -> Matrix<E::Real>
    where
        E::Real: Scalar,
    {
        self.map(Scalar::re)
    }

    pub fn imag_part(&self) -> Matrix<E::Real>
    where
        E::Real: Scalar,
    {
        self.map(Scalar::im)
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b == E::zero() {
                    continue;
                }
                axpy(out_col, b, self.col(k));
            }
        }
        out
    }

    /// `self^H * rhs` without materializing the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_matmul shape mismatch");
        Self::from_fn(self.cols, rhs.cols, |i, j| dot_conj(self.col(i), rhs.col(j)))
    }

    pub fn matvec(&self, x: &[E]) -> Vec<E> {
        assert_eq!(self.cols, x.len());
        let mut y = vec![E::zero(); self.rows];
        for (k, &xk) in x.iter().enumerate() {
            axpy(&mut y, xk, self.col(k));
        }
        y
    }

    /// Multiplies column `j` by `d[j]`.
    pub fn scale_columns(&mut self, d: &[E]) {
        assert_eq!(d.len(), self.cols);
        for (j, &s) in d.iter().enumerate() {
            for v in self.col_mut(j) {
                *v *= s;
            }
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape());
        Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        )
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape());
        Self::from_parts(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        )
    }

    pub fn frobenius_norm(&self) -> E::Real {
        norm2(&self.data)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> E::Real {
        self.data
            .iter()
            .map(|v| v.modulus())
            .fold(E::Real::zero(), Float::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.finite())
    }

    /// `true` when every imaginary part is exactly zero.
    pub fn is_real_valued(&self) -> bool {
        self.data.iter().all(|v| v.im() == E::Real::zero())
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

/// `y += a * x`.
#[inline]
pub fn axpy<E: Scalar>(y: &mut [E], a: E, x: &[E]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `x^H y`.
#[inline]
pub fn dot_conj<E: Scalar>(x: &[E], y: &[E]) -> E {
    x.iter()
        .zip(y)
        .fold(E::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

/// Euclidean norm, scaled to avoid overflow for large entries.
pub fn norm2<E: Scalar>(x: &[E]) -> E::Real {
    let scale = x
        .iter()
        .map(|v| v.modulus())
        .fold(E::Real::zero(), Float::max);
    if scale == E::Real::zero() || !Float::is_finite(scale) {
        return scale;
    }
    let inv = E::Real::one() / scale;
    let ss: E::Real = x.iter().map(|v| v.scale(inv).modulus_sq()).sum();
    scale * ss.sqrt()
}
