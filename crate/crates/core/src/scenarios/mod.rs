//! Deterministic synthetic data sets with known ground truth.

mod config;
mod linear;
mod moving;
mod video;
mod wave;

use num_complex::Complex;

use crate::dmd::SnapshotMatrix;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub use config::{parse_scenario, scenario_to_config};
pub use linear::{random_spectrum, LinearSystemParams};
pub use moving::MovingGaussiansParams;
pub use video::FourModeVideoParams;
pub use wave::TravelingWaveParams;

#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioSpec {
    FourModeVideo(FourModeVideoParams),
    MovingGaussians(MovingGaussiansParams),
    LinearSystem(LinearSystemParams),
    TravelingWave(TravelingWaveParams),
}

impl ScenarioSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioSpec::FourModeVideo(_) => "four_mode_video",
            ScenarioSpec::MovingGaussians(_) => "moving_gaussians",
            ScenarioSpec::LinearSystem(_) => "linear_system",
            ScenarioSpec::TravelingWave(_) => "traveling_wave",
        }
    }

    /// RNG seed, for the generators that draw random numbers.
    pub fn seed(&self) -> Option<u64> {
        match self {
            ScenarioSpec::LinearSystem(p) => Some(p.seed),
            _ => None,
        }
    }

    pub fn generate(&self) -> Result<Scenario> {
        match self {
            ScenarioSpec::FourModeVideo(p) => p.generate(),
            ScenarioSpec::MovingGaussians(p) => p.generate(),
            ScenarioSpec::LinearSystem(p) => p.generate(),
            ScenarioSpec::TravelingWave(p) => p.generate(),
        }
    }
}

/// Spatial layout of a snapshot column. Point `(ix, iy)` is stored at index
/// `iy * nx + ix`; a 1-D field has `ny == 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Parameter(format!("grid dimensions must be positive, got {nx}x{ny}")));
        }
        Ok(Self { nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }
}

/// `n` evenly spaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// An isotropic Gaussian `exp(-sigma |r - c(t)|^2)` translating at constant
/// velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MovingObject {
    pub center0: (f64, f64),
    pub velocity: (f64, f64),
    pub sigma: f64,
}

impl MovingObject {
    pub fn center(&self, t: f64) -> (f64, f64) {
        (self.center0.0 + self.velocity.0 * t, self.center0.1 + self.velocity.1 * t)
    }

    pub fn value(&self, x: f64, y: f64, t: f64) -> f64 {
        let (cx, cy) = self.center(t);
        (-self.sigma * (x - cx).powi(2) - self.sigma * (y - cy).powi(2)).exp()
    }
}

/// What a generator knows about the field it produced.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub kind: String,
    pub grid: Grid,
    /// Physical coordinates of the grid columns and rows.
    pub x_coords: Vec<f64>,
    pub y_coords: Vec<f64>,
    /// Unit-norm spatial modes, one per column (`N x J`; may be empty).
    pub true_modes: Matrix<Complex<f64>>,
    /// `a_j(t)` at the snapshot times (`J x M`).
    pub time_series: Matrix<Complex<f64>>,
    /// Moving objects, in the order of `true_modes`, whose modes are the
    /// objects' shapes at `t = 0`.
    pub objects: Vec<MovingObject>,
    /// Object centres at each snapshot time, `tracks[object][snapshot]`.
    pub tracks: Vec<Vec<(f64, f64)>>,
    /// Exact discrete-time spectrum, for linear systems.
    pub spectrum: Vec<Complex<f64>>,
}

impl GroundTruth {
    pub(crate) fn empty(kind: &str, grid: Grid, x: Vec<f64>, y: Vec<f64>, m: usize) -> Self {
        Self {
            kind: kind.to_string(),
            grid,
            x_coords: x,
            y_coords: y,
            true_modes: Matrix::zeros(grid.len(), 0),
            time_series: Matrix::zeros(0, m),
            objects: Vec::new(),
            tracks: Vec::new(),
            spectrum: Vec::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.true_modes.cols()
    }

    /// Object `j`'s unit-normalized shape centred where it is at time `t`.
    pub fn object_mode_at(&self, j: usize, t: f64) -> Vec<Complex<f64>> {
        let c = self.objects[j].center(t);
        self.object_mode_over_centers(j, &[c])
    }

    /// Object `j`'s shape averaged over snapshots `start..start + len`, unit
    /// normalized: what a zero-frequency mode fitted on that window sees of
    /// a translating object.
    pub fn object_mode_over(&self, j: usize, start: usize, len: usize) -> Vec<Complex<f64>> {
        let track = &self.tracks[j];
        let end = (start + len).min(track.len());
        self.object_mode_over_centers(j, &track[start.min(end)..end])
    }

    fn object_mode_over_centers(&self, j: usize, centers: &[(f64, f64)]) -> Vec<Complex<f64>> {
        let obj = MovingObject { velocity: (0.0, 0.0), ..self.objects[j] };
        let mut v = vec![Complex::new(0.0, 0.0); self.grid.len()];
        for &c in centers {
            let o = MovingObject { center0: c, ..obj };
            let mut idx = 0;
            for &y in &self.y_coords {
                for &x in &self.x_coords {
                    v[idx].re += o.value(x, y, 0.0);
                    idx += 1;
                }
            }
        }
        let n = crate::numerics::norm2(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|z| *z /= n);
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub snapshots: SnapshotMatrix<f64>,
    pub truth: GroundTruth,
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

pub(crate) fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite, got {v}")))
    }
}

pub(crate) fn check_snapshots(m: usize) -> Result<()> {
    if m >= 2 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("need at least 2 snapshots, got {m}")))
    }
}

/// Normalizes each column to unit norm in place.
pub(crate) fn normalize_columns(m: &mut Matrix<Complex<f64>>) {
    for j in 0..m.cols() {
        let n = crate::numerics::norm2(m.col(j));
        if n > 0.0 {
            m.col_mut(j).iter_mut().for_each(|z| *z /= n);
        }
    }
}
