//! Exact dynamic mode decomposition (DMD) and its recursive multi-resolution
//! extension (mrDMD), built on self-contained dense linear algebra.
//!
//! ```
//! use mrdmd::{dmd::SnapshotMatrix, mrdmd::{decompose, MrdmdConfig}, Matrix};
//!
//! // A standing wave plus a constant background.
//! let x = Matrix::from_fn(8, 64, |i, j| 1.0 + (i as f64 * 0.4).sin() * (j as f64 * 0.05).cos());
//! let x = SnapshotMatrix::new(x, 1.0, 0.0)?;
//! let tree = decompose(&x, &MrdmdConfig::new(3))?;
//! assert_eq!(tree.nodes().len(), 7);
//! # Ok::<(), mrdmd::Error>(())
//! ```

pub mod dmd;
pub mod error;
pub mod io;
pub mod metrics;
pub mod mrdmd;
pub mod numerics;
pub mod scalar;
pub mod scenarios;

pub use error::{Error, Result};
pub use numerics::{Matrix, RankPolicy};
pub use scalar::{Real, Scalar};

pub type Matrix64 = Matrix<f64>;
pub type ComplexMatrix64 = Matrix<num_complex::Complex<f64>>;
pub type SnapshotMatrix64 = dmd::SnapshotMatrix<f64>;
pub type DmdResult64 = dmd::DmdResult<f64>;
pub type MrdmdTree64 = mrdmd::MrdmdTree<f64>;
pub type MrdmdConfig64 = mrdmd::MrdmdConfig<f64>;
