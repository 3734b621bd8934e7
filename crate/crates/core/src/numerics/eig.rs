//! Eigendecomposition of small dense matrices, carried out in complex
//! arithmetic: Householder reduction to Hessenberg form, single-shift QR to
//! complex Schur form, then back-substitution for the eigenvectors.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{norm2, Matrix};
use crate::error::{Error, Result};
use crate::scalar::{c, cone, czero, Real, Scalar};

/// QR sweeps allowed per eigenvalue before giving up.
pub const MAX_QR_ITERATIONS_PER_EIGENVALUE: usize = 60;

#[derive(Clone, Debug)]
pub struct EigResult<T: Real> {
    pub eigenvalues: Vec<Complex<T>>,
    /// Unit-norm eigenvectors, column `k` paired with `eigenvalues[k]`.
    pub eigenvectors: Matrix<Complex<T>>,
}

impl<T: Real> EigResult<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigenpairs ordered by descending `|lambda|`, ties by descending imaginary
/// part. For real input, complex eigenvalues come in exact conjugate pairs
/// with conjugate eigenvectors.
pub fn eig<E: Scalar>(a: &Matrix<E>) -> Result<EigResult<E::Real>> {
    if !a.is_square() {
        return Err(Error::Parameter(format!(
            "eig needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.all_finite() {
        return Err(Error::InvalidInput("eig input has non-finite entries".into()));
    }
    let n = a.rows();
    let real_input = !E::IS_COMPLEX || a.is_real_valued();
    let mut h = a.to_complex();
    let anorm = h.frobenius_norm();
    if anorm == E::Real::zero() {
        return Ok(EigResult {
            eigenvalues: vec![czero(); n],
            eigenvectors: Matrix::identity(n),
        });
    }

    let mut z = Matrix::identity(n);
    hessenberg(&mut h, &mut z);
    schur(&mut h, &mut z)?;

    let mut values: Vec<Complex<E::Real>> = (0..n).map(|i| h[(i, i)]).collect();
    let mut vectors = schur_eigenvectors(&h, &z, anorm);

    if real_input {
        enforce_conjugate_symmetry(&mut values, &mut vectors, anorm);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (values[i], values[j]);
        b.norm()
            .partial_cmp(&a.norm())
            .expect("finite eigenvalues")
            .then(b.im.partial_cmp(&a.im).expect("finite eigenvalues"))
            .then(i.cmp(&j))
    });
    Ok(EigResult {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        eigenvectors: vectors.select_columns(&order),
    })
}

/// In-place `H <- P^H H P`, `Z <- Z P` with `H` upper Hessenberg afterwards.
fn hessenberg<T: Real>(h: &mut Matrix<Complex<T>>, z: &mut Matrix<Complex<T>>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let two = T::lit(2.0);
    for k in 0..n - 2 {
        let x: Vec<Complex<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = norm2(&x);
        if xnorm == T::zero() {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == T::zero() { cone() } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = norm2(&v);
        if vn == T::zero() {
            continue;
        }
        for vi in &mut v {
            *vi = *vi / vn;
        }
        // Left: rows k+1.. of every column.
        for j in 0..n {
            let s: Complex<T> = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            let s = s * two;
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= vi * s;
            }
        }
        // Right: columns k+1.. of every row, for H and Z.
        for m in [&mut *h, &mut *z] {
            for r in 0..n {
                let s: Complex<T> = v.iter().enumerate().map(|(i, vi)| m[(r, k + 1 + i)] * vi).sum();
                let s = s * two;
                for (i, vi) in v.iter().enumerate() {
                    m[(r, k + 1 + i)] -= s * vi.conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens<T: Real>(a: Complex<T>, b: Complex<T>) -> (T, Complex<T>) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == T::zero() {
        return (T::one(), czero());
    }
    if na == T::zero() {
        return (T::zero(), b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Reduces Hessenberg `H` to upper-triangular Schur form, accumulating into
/// `Z`.
fn schur<T: Real>(h: &mut Matrix<Complex<T>>, z: &mut Matrix<Complex<T>>) -> Result<()> {
    let n = h.rows();
    let eps = T::epsilon();
    let max_iter = MAX_QR_ITERATIONS_PER_EIGENVALUE * n.max(1);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let mut rots: Vec<(T, Complex<T>)> = Vec::with_capacity(n);

    while hi > 0 {
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if diag == T::zero() {
                diag = h.frobenius_norm();
            }
            if sub <= eps * diag {
                h[(lo, lo - 1)] = czero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::NoConvergence {
                routine: "complex Hessenberg QR",
                iterations: total,
            });
        }

        let mu = if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + c(T::lit(0.75) * h[(hi, hi - 1)].norm(), T::zero())
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        rots.clear();
        for k in lo..hi {
            let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * cs + sn * y;
                h[(k + 1, j)] = -sn.conj() * x + y * cs;
            }
            h[(k + 1, k)] = czero();
            rots.push((cs, sn));
        }
        for (off, &(cs, sn)) in rots.iter().enumerate() {
            let k = lo + off;
            for r in 0..=(k + 1).min(hi) {
                let (x, y) = (h[(r, k)], h[(r, k + 1)]);
                h[(r, k)] = x * cs + y * sn.conj();
                h[(r, k + 1)] = -x * sn + y * cs;
            }
            for r in 0..n {
                let (x, y) = (z[(r, k)], z[(r, k + 1)]);
                z[(r, k)] = x * cs + y * sn.conj();
                z[(r, k + 1)] = -x * sn + y * cs;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson<T: Real>(a: Complex<T>, b: Complex<T>, cc: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let m = (a + d) * half;
    let disc = ((a - d) * half * ((a - d) * half) + b * cc).sqrt();
    let (l1, l2) = (m + disc, m - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvectors `x_k = Z y_k` where `T y_k = lambda_k y_k` by back-substitution.
fn schur_eigenvectors<T: Real>(
    t: &Matrix<Complex<T>>,
    z: &Matrix<Complex<T>>,
    anorm: T,
) -> Matrix<Complex<T>> {
    let n = t.rows();
    let small = T::epsilon() * anorm;
    let mut out = Matrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = vec![czero::<T>(); n];
        y[k] = cone();
        for i in (0..k).rev() {
            let s: Complex<T> = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = c(small, T::zero());
            }
            y[i] = -s / d;
        }
        let mut x = z.matvec(&y);
        let nx = norm2(&x);
        for xi in &mut x {
            *xi = *xi / nx;
        }
        out.col_mut(k).copy_from_slice(&x);
    }
    out
}

/// Pairs each eigenvalue in the upper half-plane with the nearest one in the
/// lower half-plane and makes the pair exactly conjugate; near-real leftovers
/// become exactly real with real eigenvectors.
fn enforce_conjugate_symmetry<T: Real>(
    values: &mut [Complex<T>],
    vectors: &mut Matrix<Complex<T>>,
    anorm: T,
) {
    let n = values.len();
    let real_tol = T::lit(100.0) * T::from_usize_lossy(n) * T::epsilon() * anorm;
    let mut upper: Vec<usize> = (0..n).filter(|&i| values[i].im > real_tol).collect();
    let mut lower: Vec<usize> = (0..n).filter(|&i| values[i].im < -real_tol).collect();
    let mut paired = vec![false; n];

    // Greedy global matching by distance |mu - conj(lambda)|.
    let mut candidates: Vec<(T, usize, usize)> = Vec::new();
    for &u in &upper {
        for &l in &lower {
            candidates.push(((values[l] - values[u].conj()).norm(), u, l));
        }
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then((a.1, a.2).cmp(&(b.1, b.2))));
    for (_, u, l) in candidates {
        if paired[u] || paired[l] {
            continue;
        }
        paired[u] = true;
        paired[l] = true;
        let lambda = (values[u] + values[l].conj()) * T::lit(0.5);
        values[u] = lambda;
        values[l] = lambda.conj();
        let conj_col: Vec<Complex<T>> = vectors.col(u).iter().map(|v| v.conj()).collect();
        vectors.col_mut(l).copy_from_slice(&conj_col);
    }
    upper.retain(|&i| !paired[i]);
    lower.retain(|&i| !paired[i]);

    for i in 0..n {
        if paired[i] || values[i].im.abs() > real_tol {
            continue;
        }
        values[i] = c(values[i].re, T::zero());
        // Rotate the largest component onto the real axis, then drop the
        // (roundoff-level) imaginary parts.
        let col = vectors.col_mut(i);
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite"))
            .unwrap_or_else(cone);
        let phase = pivot.conj() / pivot.norm();
        for v in col.iter_mut() {
            *v = c((*v * phase).re, T::zero());
        }
        let nv = norm2(col);
        for v in col.iter_mut() {
            *v = *v / nv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_residual<E: Scalar>(a: &Matrix<E>, r: &EigResult<E::Real>) -> f64 {
        let ac = a.to_complex();
        let scale = ac.frobenius_norm().to_f64_lossy();
        (0..r.len())
            .map(|k| {
                let w = r.eigenvectors.col(k);
                let aw = ac.matvec(w);
                let res: Vec<_> = aw.iter().zip(w).map(|(x, y)| *x - r.eigenvalues[k] * y).collect();
                norm2(&res).to_f64_lossy() / (scale * norm2(w).to_f64_lossy())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal() {
        let a = Matrix::from_diag(&[-1.0f64, 2.0]);
        let r = eig(&a).unwrap();
        assert_eq!(r.eigenvalues, vec![c(2.0, 0.0), c(-1.0, 0.0)]);
        assert!((r.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((r.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation() {
        let th = std::f64::consts::FRAC_PI_4;
        let a = Matrix::from_rows(&[vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]]).unwrap();
        let r = eig(&a).unwrap();
        let e = Complex::from_polar(1.0, th);
        assert!((r.eigenvalues[0] - e).norm() < 1e-14);
        assert_eq!(r.eigenvalues[1], r.eigenvalues[0].conj());
        assert!(max_residual(&a, &r) < 1e-14);
    }

    #[test]
    fn cube_roots_of_unity() {
        // Companion matrix of z^3 - 1.
        let a = Matrix::from_rows(&[
            vec![0.0f64, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let r = eig(&a).unwrap();
        let third = 2.0 * std::f64::consts::PI / 3.0;
        let expected = [c(1.0, 0.0), Complex::from_polar(1.0, third), Complex::from_polar(1.0, -third)];
        let mut hit = [false; 3];
        for l in &r.eigenvalues {
            assert!((l.norm() - 1.0).abs() < 1e-13);
            let (k, d) = expected
                .iter()
                .enumerate()
                .map(|(k, e)| (k, (l - e).norm()))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            assert!(d < 1e-13);
            hit[k] = true;
        }
        assert!(hit.iter().all(|&h| h));
        assert!(max_residual(&a, &r) < 1e-13);
    }

    #[test]
    fn random_nonnormal_real() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + (seed as usize % 12);
            let a = Matrix::from_fn(n, n, |i, j| {
                let v: f64 = rng.random_range(-1.0..1.0);
                if j + 1 < i { 0.3 * v } else { v }
            });
            let r = eig(&a).unwrap();
            assert!(max_residual(&a, &r) < 1e-9, "seed {seed}");
            for l in &r.eigenvalues {
                if l.im != 0.0 {
                    assert!(r.eigenvalues.iter().any(|m| *m == l.conj()));
                }
            }
        }
    }

    #[test]
    fn complex_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = Matrix::from_fn(7, 7, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let r = eig(&a).unwrap();
        assert!(max_residual(&a, &r) < 1e-9);
    }

    #[test]
    fn jordan_block_stays_finite() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let r = eig(&a).unwrap();
        assert!(r.eigenvectors.all_finite());
        assert!(max_residual(&a, &r) < 1e-9);
    }

    #[test]
    fn ordering_and_errors() {
        let a = Matrix::from_diag(&[0.5, -3.0, 1.0]);
        let r = eig(&a).unwrap();
        let m: Vec<f64> = r.eigenvalues.iter().map(|l| l.re).collect();
        assert_eq!(m, vec![-3.0, 1.0, 0.5]);
        let rect = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(eig(&rect), Err(Error::Parameter(_))));
    }
}
