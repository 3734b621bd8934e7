//! Dense linear algebra kernels: matrices, QR, SVD, eigendecomposition,
//! pseudo-inverse and rank selection.

mod eig;
mod matrix;
mod qr;
mod rank;
mod svd;

pub use eig::{eig, EigResult, MAX_QR_ITERATIONS_PER_EIGENVALUE};
pub use matrix::{axpy, dot_conj, norm2, Matrix};
pub use qr::{qr_thin, HouseholderQr};
pub use rank::{gd_omega, numerical_rank, optimal_rank, RankPolicy, AUTO_RELATIVE_FLOOR};
pub use svd::{pinv, svd, SvdResult, MAX_JACOBI_SWEEPS};
