use num_complex::Complex;

use super::{check_finite, check_positive, check_snapshots, linspace, Grid, GroundTruth, MovingObject, Scenario};
use crate::dmd::SnapshotMatrix;
use crate::error::Result;
use crate::numerics::Matrix;

/// Two Gaussians translating at different speeds: a fast one along `+x` at
/// `speed_ratio * velocity` and a slow one along `+y` at `velocity`.
#[derive(Clone, Debug, PartialEq)]
pub struct MovingGaussiansParams {
    pub nx: usize,
    pub ny: usize,
    pub m: usize,
    /// Total time covered; snapshots are spaced `duration / m` apart.
    pub duration: f64,
    pub extent: f64,
    pub sigma: f64,
    pub fast_center: (f64, f64),
    pub slow_center: (f64, f64),
    pub velocity: f64,
    pub speed_ratio: f64,
}

impl Default for MovingGaussiansParams {
    /// 64x64 grid on `[-50, 50]^2`, 512 snapshots, and a duration of 272:
    /// the time the fast object needs to travel from `x = -18` to the edge
    /// of the domain.
    fn default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            m: 512,
            duration: 272.0,
            extent: 50.0,
            sigma: 0.1,
            fast_center: (-18.0, 20.0),
            slow_center: (-20.0, -9.0),
            velocity: 1.0 / 40.0,
            speed_ratio: 10.0,
        }
    }
}

impl MovingGaussiansParams {
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.nx, self.ny)?;
        check_snapshots(self.m)?;
        check_positive("duration", self.duration)?;
        check_positive("extent", self.extent)?;
        check_positive("sigma", self.sigma)?;
        check_positive("speed_ratio", self.speed_ratio)?;
        for (name, v) in [
            ("fast_x", self.fast_center.0),
            ("fast_y", self.fast_center.1),
            ("slow_x", self.slow_center.0),
            ("slow_y", self.slow_center.1),
            ("velocity", self.velocity),
        ] {
            check_finite(name, v)?;
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.m as f64
    }

    /// `[fast, slow]`.
    pub fn objects(&self) -> [MovingObject; 2] {
        [
            MovingObject {
                center0: self.fast_center,
                velocity: (self.speed_ratio * self.velocity, 0.0),
                sigma: self.sigma,
            },
            MovingObject {
                center0: self.slow_center,
                velocity: (0.0, self.velocity),
                sigma: self.sigma,
            },
        ]
    }

    pub fn generate(&self) -> Result<Scenario> {
        self.validate()?;
        let grid = Grid::new(self.nx, self.ny)?;
        let xs = linspace(-self.extent, self.extent, self.nx);
        let ys = linspace(-self.extent, self.extent, self.ny);
        let objects = self.objects();
        let dt = self.dt();

        let mut data = Matrix::zeros(grid.len(), self.m);
        for s in 0..self.m {
            let t = dt * s as f64;
            let col = data.col_mut(s);
            for (iy, &y) in ys.iter().enumerate() {
                for (ix, &x) in xs.iter().enumerate() {
                    col[grid.index(ix, iy)] = objects[0].value(x, y, t) + objects[1].value(x, y, t);
                }
            }
        }

        let mut truth = GroundTruth::empty("moving_gaussians", grid, xs, ys, self.m);
        truth.objects = objects.to_vec();
        truth.tracks = objects
            .iter()
            .map(|o| (0..self.m).map(|s| o.center(dt * s as f64)).collect())
            .collect();
        let cols: Vec<Vec<Complex<f64>>> = (0..2).map(|j| truth.object_mode_at(j, 0.0)).collect();
        truth.true_modes = Matrix::from_columns(&cols)?;
        truth.time_series = Matrix::from_fn(2, self.m, |_, _| Complex::new(1.0, 0.0));
        Ok(Scenario {
            snapshots: SnapshotMatrix::new(data, dt, 0.0)?,
            truth,
        })
    }
}
