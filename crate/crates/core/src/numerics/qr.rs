//! Householder QR of a tall matrix, keeping the reflectors so `Q` can be
//! applied to a handful of vectors without ever forming it in full.

use num_traits::{One, Zero};

use super::matrix::{dot_conj, norm2, Matrix};
use crate::scalar::Scalar;

/// `A = Q R` with `A` of shape `m x n`, `m >= n`.
#[derive(Clone, Debug)]
pub struct HouseholderQr<E: Scalar> {
    /// Column `k` holds the reflector vector `v_k` in rows `k..m` (unit norm);
    /// an all-zero column marks an identity reflector.
    reflectors: Matrix<E>,
    r: Matrix<E>,
}

impl<E: Scalar> HouseholderQr<E> {
    pub fn new(a: &Matrix<E>) -> Self {
        let (m, n) = a.shape();
        assert!(m >= n, "HouseholderQr needs a tall matrix, got {m}x{n}");
        let mut work = a.clone();
        let mut reflectors = Matrix::zeros(m, n);

        for k in 0..n {
            let x = &work.col(k)[k..];
            let xnorm = norm2(x);
            if xnorm == E::Real::zero() {
                continue;
            }
            // alpha = -phase(x0) * |x|, so v = x - alpha e1 never cancels.
            let x0 = x[0];
            let phase = if x0.modulus() == E::Real::zero() {
                E::one()
            } else {
                x0.scale(E::Real::one() / x0.modulus())
            };
            let alpha = -phase.scale(xnorm);
            let mut v: Vec<E> = x.to_vec();
            v[0] -= alpha;
            let vnorm = norm2(&v);
            if vnorm == E::Real::zero() {
                continue;
            }
            let inv = E::Real::one() / vnorm;
            for vi in &mut v {
                *vi = vi.scale(inv);
            }
            for j in k..n {
                reflect(&v, &mut work.col_mut(j)[k..]);
            }
            // Column k is now alpha * e1 up to roundoff; store it exactly.
            let col = work.col_mut(k);
            col[k] = alpha;
            for ci in &mut col[k + 1..] {
                *ci = E::zero();
            }
            reflectors.col_mut(k)[k..].copy_from_slice(&v);
        }

        let r = Matrix::from_fn(n, n, |i, j| if i <= j { work[(i, j)] } else { E::zero() });
        Self { reflectors, r }
    }

    /// Upper-triangular factor, `n x n`.
    pub fn r(&self) -> &Matrix<E> {
        &self.r
    }

    /// `Q * [Y; 0]` for `Y` with `n` rows: maps coordinates in the column
    /// space back to the full `m`-dimensional space.
    pub fn apply_q(&self, y: &Matrix<E>) -> Matrix<E> {
        let (m, n) = self.reflectors.shape();
        assert_eq!(y.rows(), n);
        let mut out = Matrix::zeros(m, y.cols());
        for j in 0..y.cols() {
            out.col_mut(j)[..n].copy_from_slice(y.col(j));
        }
        self.apply_q_full(out)
    }

    /// `Q * Y` for the full `m x m` orthogonal `Q` and `Y` with `m` rows.
    pub fn apply_q_full(&self, mut y: Matrix<E>) -> Matrix<E> {
        let n = self.reflectors.cols();
        assert_eq!(y.rows(), self.reflectors.rows());
        for k in (0..n).rev() {
            let v = &self.reflectors.col(k)[k..];
            if v.iter().all(|&vi| vi == E::zero()) {
                continue;
            }
            for j in 0..y.cols() {
                reflect(v, &mut y.col_mut(j)[k..]);
            }
        }
        y
    }

    /// Orthonormal basis of the orthogonal complement of the column space
    /// (the trailing `m - n` columns of the full `Q`), assuming full column
    /// rank.
    pub fn complement(&self) -> Matrix<E> {
        let (m, n) = self.reflectors.shape();
        self.apply_q_full(Matrix::from_fn(m, m - n, |i, j| if i == n + j { E::one() } else { E::zero() }))
    }

    /// Thin `Q`, `m x n`, with orthonormal columns.
    pub fn q_thin(&self) -> Matrix<E> {
        self.apply_q(&Matrix::identity(self.r.rows()))
    }
}

/// `y <- (I - 2 v v^H) y` for unit `v`.
#[inline]
fn reflect<E: Scalar>(v: &[E], y: &mut [E]) {
    let two = E::Real::one() + E::Real::one();
    let s = dot_conj(v, y).scale(two);
    for (yi, &vi) in y.iter_mut().zip(v) {
        *yi -= vi * s;
    }
}

/// Convenience wrapper: thin `(Q, R)`.
pub fn qr_thin<E: Scalar>(a: &Matrix<E>) -> (Matrix<E>, Matrix<E>) {
    let qr = HouseholderQr::new(a);
    (qr.q_thin(), qr.r.clone())
}
