use super::{check_finite, check_positive, check_snapshots, linspace, Grid, GroundTruth, Scenario};
use crate::dmd::SnapshotMatrix;
use crate::error::Result;
use crate::numerics::Matrix;

/// `u(x, t) = exp(-((x - x0 - c t) / w)^2)` on a 1-D grid, without periodic
/// wrap: the profile leaves through the right boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct TravelingWaveParams {
    pub n: usize,
    pub m: usize,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x0: f64,
    pub speed: f64,
    pub width: f64,
}

impl Default for TravelingWaveParams {
    fn default() -> Self {
        Self {
            n: 256,
            m: 128,
            dt: 1.0 / 128.0,
            x_min: 0.0,
            x_max: 1.0,
            x0: 0.2,
            speed: 0.6,
            width: 0.05,
        }
    }
}

impl TravelingWaveParams {
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n, 1)?;
        check_snapshots(self.m)?;
        check_positive("dt", self.dt)?;
        check_positive("width", self.width)?;
        check_positive("x_max - x_min", self.x_max - self.x_min)?;
        check_finite("x0", self.x0)?;
        check_finite("speed", self.speed)?;
        Ok(())
    }

    pub fn generate(&self) -> Result<Scenario> {
        self.validate()?;
        let xs = linspace(self.x_min, self.x_max, self.n);
        let data = Matrix::from_fn(self.n, self.m, |i, j| {
            let t = self.dt * j as f64;
            (-((xs[i] - self.x0 - self.speed * t) / self.width).powi(2)).exp()
        });
        let truth = GroundTruth::empty("traveling_wave", Grid::new(self.n, 1)?, xs, vec![0.0], self.m);
        Ok(Scenario {
            snapshots: SnapshotMatrix::new(data, self.dt, 0.0)?,
            truth,
        })
    }
}
