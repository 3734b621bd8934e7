//! Exact dynamic mode decomposition of a single snapshot window.

use num_complex::Complex;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numerics::{eig, numerical_rank, pinv, svd, Matrix, RankPolicy};
use crate::scalar::{c, Real, Scalar};

/// Snapshots `x(t0), x(t0 + dt), ..., x(t0 + (M-1) dt)` as the columns of an
/// `N x M` real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotMatrix<T: Real> {
    data: Matrix<T>,
    dt: T,
    t0: T,
}

impl<T: Real> SnapshotMatrix<T> {
    pub fn new(data: Matrix<T>, dt: T, t0: T) -> Result<Self> {
        if !(dt > T::zero()) || !Float::is_finite(dt) {
            return Err(Error::Parameter(format!("dt must be positive and finite, got {dt}")));
        }
        if !Float::is_finite(t0) {
            return Err(Error::Parameter("t0 must be finite".into()));
        }
        if data.cols() < 2 {
            return Err(Error::WindowTooSmall { needed: 2, got: data.cols() });
        }
        if !data.all_finite() {
            return Err(Error::InvalidInput("snapshot data has non-finite entries".into()));
        }
        Ok(Self { data, dt, t0 })
    }

    pub fn data(&self) -> &Matrix<T> {
        &self.data
    }

    pub fn into_data(self) -> Matrix<T> {
        self.data
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn n_space(&self) -> usize {
        self.data.rows()
    }

    pub fn n_time(&self) -> usize {
        self.data.cols()
    }

    /// Time of snapshot `j` (0-based).
    pub fn time(&self, j: usize) -> T {
        self.t0 + T::from_usize_lossy(j) * self.dt
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.n_time()).map(|j| self.time(j)).collect()
    }

    /// End of the sampled interval, `t0 + M dt`: the window covers
    /// `[t0, t0 + M dt)` with one `dt` per snapshot.
    pub fn t_end(&self) -> T {
        self.time(self.n_time())
    }
}

/// `(X1, X2)`: columns `0..M-1` and `1..M`.
pub fn split_pairs<T: Real>(x: &SnapshotMatrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let m = x.n_time();
    if m < 2 {
        return Err(Error::WindowTooSmall { needed: 2, got: m });
    }
    Ok((x.data.columns(0, m - 1), x.data.columns(1, m)))
}

/// One exact-DMD fit. Modes are unit-norm and ordered by ascending `|omega|`
/// (ties: larger imaginary part first).
#[derive(Clone, Debug, PartialEq)]
pub struct DmdResult<T: Real> {
    pub modes: Matrix<Complex<T>>,
    pub lambdas: Vec<Complex<T>>,
    pub omegas: Vec<Complex<T>>,
    pub amplitudes: Vec<Complex<T>>,
    pub dt: T,
    pub t0: T,
    pub window_len: usize,
    /// SVD truncation rank `K` before any modes were dropped.
    pub svd_rank: usize,
    /// Modes dropped because `lambda == 0` (no continuous-time rate).
    pub dropped_zero: usize,
    /// Full singular-value spectrum of `X1`, for diagnostics.
    pub singular_values: Vec<T>,
}

impl<T: Real> DmdResult<T> {
    /// Number of modes kept.
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    /// Empty expansion over `n_space` points; evaluates to zero everywhere.
    pub fn empty(n_space: usize, dt: T, t0: T, window_len: usize) -> Self {
        Self {
            modes: Matrix::zeros(n_space, 0),
            lambdas: Vec::new(),
            omegas: Vec::new(),
            amplitudes: Vec::new(),
            dt,
            t0,
            window_len,
            svd_rank: 0,
            dropped_zero: 0,
            singular_values: Vec::new(),
        }
    }

    /// Subset of modes, in the given order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            modes: self.modes.select_columns(idx),
            lambdas: idx.iter().map(|&k| self.lambdas[k]).collect(),
            omegas: idx.iter().map(|&k| self.omegas[k]).collect(),
            amplitudes: idx.iter().map(|&k| self.amplitudes[k]).collect(),
            ..self.clone()
        }
    }

    /// `sum_k b_k psi_k exp(omega_k (t - t0))` for each time.
    pub fn reconstruct(&self, times: &[T]) -> Result<Matrix<Complex<T>>> {
        if times.iter().any(|t| !Float::is_finite(*t)) {
            return Err(Error::InvalidInput("reconstruction times must be finite".into()));
        }
        let n = self.modes.rows();
        let mut out = Matrix::zeros(n, times.len());
        self.accumulate(times, self.t0, &mut out, |_| true);
        Ok(out)
    }

    /// Real part of [`reconstruct`](Self::reconstruct); for real input data
    /// the imaginary part cancels across conjugate pairs.
    pub fn reconstruct_real(&self, times: &[T]) -> Result<Matrix<T>> {
        Ok(self.reconstruct(times)?.real_part())
    }

    /// Reconstruction at the window's own sampling times.
    pub fn reconstruct_window(&self) -> Matrix<Complex<T>> {
        let times: Vec<T> = (0..self.window_len)
            .map(|j| self.t0 + T::from_usize_lossy(j) * self.dt)
            .collect();
        self.reconstruct(&times).expect("window times are finite")
    }

    /// Adds this expansion, evaluated with time origin `origin`, into the
    /// columns of `out` for which `active(column)` holds.
    pub(crate) fn accumulate(
        &self,
        times: &[T],
        origin: T,
        out: &mut Matrix<Complex<T>>,
        active: impl Fn(usize) -> bool,
    ) {
        for (col, &t) in times.iter().enumerate() {
            if !active(col) {
                continue;
            }
            let tau = c(t - origin, T::zero());
            let dst = out.col_mut(col);
            for k in 0..self.rank() {
                let coef = self.amplitudes[k] * (self.omegas[k] * tau).exp();
                for (d, &p) in dst.iter_mut().zip(self.modes.col(k)) {
                    *d += coef * p;
                }
            }
        }
    }
}

/// Least-squares amplitudes `b = pinv(modes) x1`.
pub fn amplitudes<E: Scalar>(modes: &Matrix<Complex<E::Real>>, x1: &[E]) -> Result<Vec<Complex<E::Real>>> {
    if modes.rows() != x1.len() {
        return Err(Error::Parameter(format!(
            "modes have {} rows but the state vector has length {}",
            modes.rows(),
            x1.len()
        )));
    }
    if modes.cols() == 0 {
        return Ok(Vec::new());
    }
    let x: Vec<Complex<E::Real>> = x1.iter().map(|v| v.to_complex()).collect();
    Ok(pinv(modes)?.matvec(&x))
}

/// Exact DMD of a snapshot window.
pub fn fit<T: Real>(x: &SnapshotMatrix<T>, policy: RankPolicy) -> Result<DmdResult<T>> {
    let (x1, x2) = split_pairs(x)?;
    let (rows, cols) = x1.shape();
    let f = svd(&x1, policy)?;
    let k = f.rank();

    // Retained singular values must be numerically nonzero for Sigma^{-1}.
    let usable = numerical_rank(&f.spectrum, rows, cols);
    if usable < k {
        return Err(Error::RankDeficient { index: usable + 1, rank: k });
    }

    // B = X2 V Sigma^{-1}; Atilde = U^H B.
    let mut b = x2.matmul(&f.v);
    let inv: Vec<T> = f.singular_values.iter().map(|&s| T::one() / s).collect();
    b.scale_columns(&inv);
    let atilde = f.u.adjoint_matmul(&b);
    let e = eig(&atilde)?;

    // Psi = B W.
    let psi = b.to_complex().matmul(&e.eigenvectors);

    // Eigenvalues carry backward error ~eps*|Atilde|; anything that small is zero.
    let lam_tol = T::lit(100.0) * T::epsilon() * T::from_usize_lossy(k) * atilde.frobenius_norm();
    let mut keep = Vec::with_capacity(k);
    let mut dropped = 0;
    let mut modes_cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(k);
    for j in 0..k {
        let lambda = e.eigenvalues[j];
        let col = psi.col(j);
        let nrm = crate::numerics::norm2(col);
        if lambda.norm() <= lam_tol || nrm == T::zero() {
            dropped += 1;
            continue;
        }
        keep.push(j);
        modes_cols.push(col.iter().map(|v| v / nrm).collect());
    }

    let dt = x.dt();
    let lambdas: Vec<Complex<T>> = keep.iter().map(|&j| e.eigenvalues[j]).collect();
    let omegas: Vec<Complex<T>> = lambdas.iter().map(|l| l.ln() / dt).collect();

    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (omegas[i], omegas[j]);
        a.norm()
            .partial_cmp(&b.norm())
            .expect("finite omegas")
            .then(b.im.partial_cmp(&a.im).expect("finite omegas"))
            .then(i.cmp(&j))
    });
    let cols_sorted: Vec<&Vec<Complex<T>>> = order.iter().map(|&i| &modes_cols[i]).collect();
    let modes = if cols_sorted.is_empty() {
        Matrix::zeros(x.n_space(), 0)
    } else {
        Matrix::from_columns(&cols_sorted.iter().map(|c| c.as_slice()).collect::<Vec<_>>())?
    };
    let lambdas: Vec<Complex<T>> = order.iter().map(|&i| lambdas[i]).collect();
    let omegas: Vec<Complex<T>> = order.iter().map(|&i| omegas[i]).collect();
    let amps = amplitudes(&modes, x.data().col(0))?;

    Ok(DmdResult {
        modes,
        lambdas,
        omegas,
        amplitudes: amps,
        dt,
        t0: x.t0(),
        window_len: x.n_time(),
        svd_rank: k,
        dropped_zero: dropped,
        singular_values: f.spectrum,
    })
}

/// `(background, foreground)`: the window reconstruction from modes with
/// `|omega| <= rho`, and the data minus it. Their sum is the data.
pub fn background_foreground_split<T: Real>(
    r: &DmdResult<T>,
    x: &SnapshotMatrix<T>,
    rho: T,
) -> Result<(Matrix<T>, Matrix<T>)> {
    if !(rho >= T::zero()) {
        return Err(Error::Parameter(format!("rho must be nonnegative, got {rho}")));
    }
    if r.modes.rows() != x.n_space() {
        return Err(Error::Shape("DMD result and snapshots differ in spatial size".into()));
    }
    let idx: Vec<usize> = (0..r.rank()).filter(|&k| r.omegas[k].norm() <= rho).collect();
    let background = r.select(&idx).reconstruct_real(&x.times())?;
    let foreground = x.data().sub(&background);
    Ok((background, foreground))
}
