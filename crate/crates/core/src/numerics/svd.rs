//! Thin SVD via Householder QR followed by one-sided (Hestenes) Jacobi on the
//! triangular factor. Jacobi is slower than Golub–Kahan but simple, and it
//! computes small singular values to high relative accuracy.

use num_traits::{Float, One};

use super::matrix::{dot_conj, norm2, Matrix};
use super::qr::HouseholderQr;
use super::rank::{numerical_rank, RankPolicy};
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

pub const MAX_JACOBI_SWEEPS: usize = 80;

#[derive(Clone, Debug)]
pub struct SvdResult<E: Scalar> {
    /// `rows x K`, orthonormal columns.
    pub u: Matrix<E>,
    /// Leading `K` singular values, descending.
    pub singular_values: Vec<E::Real>,
    /// `cols x K`, orthonormal columns.
    pub v: Matrix<E>,
    /// All `min(rows, cols)` singular values, descending.
    pub spectrum: Vec<E::Real>,
}

impl<E: Scalar> SvdResult<E> {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U diag(sigma) V^H`.
    pub fn reconstruct(&self) -> Matrix<E> {
        let mut us = self.u.clone();
        let s: Vec<E> = self.singular_values.iter().map(|&x| E::from_real(x)).collect();
        us.scale_columns(&s);
        us.matmul(&self.v.adjoint())
    }
}

pub fn svd<E: Scalar>(a: &Matrix<E>, policy: RankPolicy) -> Result<SvdResult<E>> {
    if !a.all_finite() {
        return Err(Error::InvalidInput("svd input has non-finite entries".into()));
    }
    let (m, n) = a.shape();
    if let RankPolicy::Fixed(k) = policy {
        if k == 0 || k > m.min(n) {
            return Err(Error::Parameter(format!(
                "fixed rank {k} outside 1..={} for a {m}x{n} matrix",
                m.min(n)
            )));
        }
    }
    if m >= n {
        let f = tall_svd(a)?;
        let k = policy.resolve(&f.sigma, m, n)?;
        Ok(SvdResult {
            u: f.left(k),
            singular_values: f.sigma[..k].to_vec(),
            v: f.right.columns(0, k),
            spectrum: f.sigma,
        })
    } else {
        // A^H = U' S V'^H  =>  A = V' S U'^H.
        let f = tall_svd(&a.adjoint())?;
        let k = policy.resolve(&f.sigma, m, n)?;
        Ok(SvdResult {
            u: f.right.columns(0, k),
            singular_values: f.sigma[..k].to_vec(),
            v: f.left(k),
            spectrum: f.sigma,
        })
    }
}

/// Moore–Penrose pseudo-inverse; singular values at or below
/// `max(rows, cols) * eps * sigma_1` are treated as zero.
pub fn pinv<E: Scalar>(a: &Matrix<E>) -> Result<Matrix<E>> {
    let f = svd(a, RankPolicy::Full)?;
    let (m, n) = a.shape();
    let k = numerical_rank(&f.spectrum, m, n);
    let mut out = Matrix::zeros(n, m);
    for j in 0..k {
        let inv = E::Real::one() / f.singular_values[j];
        let vj: Vec<E> = f.v.col(j).iter().map(|x| x.scale(inv)).collect();
        let uj = f.u.col(j);
        for c in 0..m {
            let w = uj[c].conj();
            if w == E::zero() {
                continue;
            }
            for (r, &vr) in vj.iter().enumerate() {
                out[(r, c)] += vr * w;
            }
        }
    }
    Ok(out)
}

/// Full factorization of a tall matrix with the left factor kept implicit.
struct TallFactors<E: Scalar> {
    qr: HouseholderQr<E>,
    /// Left singular vectors of `R` (`n x n`, orthonormal).
    left_r: Matrix<E>,
    right: Matrix<E>,
    sigma: Vec<E::Real>,
}

impl<E: Scalar> TallFactors<E> {
    fn left(&self, k: usize) -> Matrix<E> {
        self.qr.apply_q(&self.left_r.columns(0, k))
    }
}

fn tall_svd<E: Scalar>(a: &Matrix<E>) -> Result<TallFactors<E>> {
    let qr = HouseholderQr::new(a);
    let n = a.cols();
    let mut w = qr.r().clone();
    let negligible = negligible_norm(&w);
    let mut v = Matrix::<E>::identity(n);
    jacobi_sweeps(&mut w, &mut v)?;

    let norms: Vec<E::Real> = (0..n).map(|j| norm2(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .expect("finite norms")
            .then(i.cmp(&j))
    });
    let sigma: Vec<E::Real> = order.iter().map(|&j| norms[j]).collect();
    let right = v.select_columns(&order);
    let mut left_r = w.select_columns(&order);

    // Normalize; the (trailing) columns with negligible norm are replaced by
    // an orthonormal completion so U keeps orthonormal columns at full rank.
    let good = sigma
        .iter()
        .take_while(|&&s| s > negligible && s > E::Real::min_positive_value())
        .count();
    for j in 0..good {
        let inv = E::Real::one() / sigma[j];
        for x in left_r.col_mut(j) {
            *x = x.scale(inv);
        }
    }
    complete_orthonormal(&mut left_r, good);

    Ok(TallFactors { qr, left_r, right, sigma })
}

/// `n * eps * ||w||_F`: column norms at or below this are roundoff.
fn negligible_norm<E: Scalar>(w: &Matrix<E>) -> E::Real {
    E::Real::from_usize_lossy(w.cols().max(1)) * <E::Real as Float>::epsilon() * w.frobenius_norm()
}

fn jacobi_sweeps<E: Scalar>(w: &mut Matrix<E>, v: &mut Matrix<E>) -> Result<()> {
    let n = w.cols();
    let tol = <E::Real as Float>::epsilon() * E::Real::from_usize_lossy(n.max(1));
    let one = E::Real::one();
    let two = one + one;
    let mut norms_sq: Vec<E::Real> = (0..n).map(|j| norm2(w.col(j)).powi(2)).collect();
    // Columns at roundoff level relative to the whole matrix cannot be made
    // orthogonal to working precision; they are left alone.
    let negligible_sq = negligible_norm(w).powi(2);

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms_sq[p];
                let beta = norms_sq[q];
                if alpha.min(beta) <= negligible_sq {
                    continue;
                }
                let (wp, wq) = w.col_pair_mut(p, q);
                let gamma = dot_conj(wp, wq);
                let g = gamma.modulus();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate phase out of gamma, then apply a real rotation.
                let e_bar = gamma.conj().scale(one / g);
                let zeta = (beta - alpha) / (two * g);
                let t = zeta.signum() / (zeta.abs() + (one + zeta * zeta).sqrt());
                let c = one / (one + t * t).sqrt();
                let s = c * t;
                rotate(wp, wq, e_bar, c, s);
                let (vp, vq) = v.col_pair_mut(p, q);
                rotate(vp, vq, e_bar, c, s);
                // Recompute norms rather than update them, to avoid drift.
                norms_sq[p] = norm2(w.col(p)).powi(2);
                norms_sq[q] = norm2(w.col(q)).powi(2);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence {
        routine: "one-sided Jacobi SVD",
        iterations: MAX_JACOBI_SWEEPS,
    })
}

#[inline]
fn rotate<E: Scalar>(xp: &mut [E], xq: &mut [E], e_bar: E, c: E::Real, s: E::Real) {
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let bq = *b * e_bar;
        let ap = *a;
        *a = ap.scale(c) - bq.scale(s);
        *b = ap.scale(s) + bq.scale(c);
    }
}

/// Replaces the trailing columns `from..` of `m`, whose leading columns are
/// orthonormal, with an orthonormal basis of the complement of the leading
/// ones.
fn complete_orthonormal<E: Scalar>(m: &mut Matrix<E>, from: usize) {
    let n = m.cols();
    if from >= n {
        return;
    }
    let rest = if from == 0 {
        Matrix::identity(m.rows()).columns(0, n)
    } else {
        HouseholderQr::new(&m.columns(0, from)).complement()
    };
    for j in from..n {
        m.col_mut(j).copy_from_slice(rest.col(j - from));
    }
}
