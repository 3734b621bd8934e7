use std::f64::consts::TAU;

use num_complex::Complex;

use super::{check_finite, check_positive, check_snapshots, linspace, normalize_columns, Grid, GroundTruth, Scenario};
use crate::dmd::SnapshotMatrix;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Four Gaussian blobs with distinct temporal behaviour:
///
/// * blob 1 (upper left) is a constant background;
/// * blob 2 (upper right) oscillates slowly for the whole record;
/// * blob 3 (lower left) oscillates fast and switches off at `t_off`;
/// * blob 4 (lower right) oscillates fast and switches on at `t_on`.
///
/// The oscillating blobs carry a spatial carrier `exp(i k (x - cx))` and a
/// complex coefficient `exp(i 2 pi t / T)`, so each contributes a travelling
/// (rank-2) pattern to the real field `Re sum_j a_j(t) psi_j`. A real
/// standing oscillation `sin(wt) psi` would be rank one and invisible to a
/// linear propagator.
#[derive(Clone, Debug, PartialEq)]
pub struct FourModeVideoParams {
    pub nx: usize,
    pub ny: usize,
    pub m: usize,
    /// Length of the record; snapshots are spaced `record / m` apart.
    pub record: f64,
    /// Half-width of the square domain `[-extent, extent]^2`.
    pub extent: f64,
    /// Gaussian standard deviation of each blob.
    pub width: f64,
    pub wavenumber: f64,
    pub period2: f64,
    pub period3: f64,
    pub period4: f64,
    pub amplitude2: f64,
    pub t_off: f64,
    pub t_on: f64,
}

impl Default for FourModeVideoParams {
    fn default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            m: 256,
            record: 128.0,
            extent: 50.0,
            width: 6.0,
            wavenumber: TAU / 24.0,
            period2: 96.0,
            period3: 40.0,
            period4: 40.0,
            amplitude2: 1.0,
            t_off: 64.0,
            t_on: 96.0,
        }
    }
}

pub(crate) const VIDEO_CENTERS: [(f64, f64); 4] = [(-0.5, 0.5), (0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)];

impl FourModeVideoParams {
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.nx, self.ny)?;
        check_snapshots(self.m)?;
        for (name, v) in [
            ("record", self.record),
            ("extent", self.extent),
            ("width", self.width),
            ("period2", self.period2),
            ("period3", self.period3),
            ("period4", self.period4),
        ] {
            check_positive(name, v)?;
        }
        for (name, v) in [
            ("wavenumber", self.wavenumber),
            ("amplitude2", self.amplitude2),
            ("t_off", self.t_off),
            ("t_on", self.t_on),
        ] {
            check_finite(name, v)?;
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.record / self.m as f64
    }

    /// Complex coefficients `a_j(t)`.
    pub fn coefficients(&self, t: f64) -> [Complex<f64>; 4] {
        let osc = |period: f64| Complex::from_polar(1.0, TAU * t / period);
        let on = |b: bool| if b { 1.0 } else { 0.0 };
        [
            Complex::new(1.0, 0.0),
            osc(self.period2) * self.amplitude2,
            osc(self.period3) * on(t < self.t_off),
            osc(self.period4) * on(t >= self.t_on),
        ]
    }

    pub fn generate(&self) -> Result<Scenario> {
        self.validate()?;
        let grid = Grid::new(self.nx, self.ny)?;
        let xs = linspace(-self.extent, self.extent, self.nx);
        let ys = linspace(-self.extent, self.extent, self.ny);
        let n = grid.len();

        let mut modes = Matrix::zeros(n, 4);
        let two_w2 = 2.0 * self.width * self.width;
        for (j, &(fx, fy)) in VIDEO_CENTERS.iter().enumerate() {
            let (cx, cy) = (fx * self.extent, fy * self.extent);
            let col = modes.col_mut(j);
            for (iy, &y) in ys.iter().enumerate() {
                for (ix, &x) in xs.iter().enumerate() {
                    let g = (-((x - cx).powi(2) + (y - cy).powi(2)) / two_w2).exp();
                    let carrier = if j == 0 {
                        Complex::new(1.0, 0.0)
                    } else {
                        Complex::from_polar(1.0, self.wavenumber * (x - cx))
                    };
                    col[grid.index(ix, iy)] = carrier * g;
                }
            }
        }
        normalize_columns(&mut modes);

        let dt = self.dt();
        let mut series = Matrix::zeros(4, self.m);
        let mut data = Matrix::zeros(n, self.m);
        for s in 0..self.m {
            let a = self.coefficients(dt * s as f64);
            for j in 0..4 {
                series[(j, s)] = a[j];
                if a[j] == Complex::new(0.0, 0.0) {
                    continue;
                }
                for (dst, &p) in data.col_mut(s).iter_mut().zip(modes.col(j)) {
                    *dst += (a[j] * p).re;
                }
            }
        }
        if !data.all_finite() {
            return Err(Error::Parameter("four-mode video produced non-finite values".into()));
        }
        let mut truth = GroundTruth::empty("four_mode_video", grid, xs, ys, self.m);
        truth.true_modes = modes;
        truth.time_series = series;
        Ok(Scenario {
            snapshots: SnapshotMatrix::new(data, dt, 0.0)?,
            truth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dot_conj, svd, RankPolicy};

    #[test]
    fn blob_four_absent_before_switch_on() {
        let p = FourModeVideoParams::default();
        let s = p.generate().unwrap();
        let psi4 = s.truth.true_modes.col(3);
        let dt = p.dt();
        for j in 0..p.m {
            let t = dt * j as f64;
            let col: Vec<Complex<f64>> = s.snapshots.data().col(j).iter().map(|&v| Complex::new(v, 0.0)).collect();
            let proj = dot_conj(psi4, &col).norm();
            if t < p.t_on {
                assert!(proj < 1e-6, "t = {t}: {proj}");
            } else {
                assert!(proj > 0.1);
            }
        }
    }

    #[test]
    fn rank_is_seven() {
        // One real background plus three travelling (rank-2) blobs.
        let s = FourModeVideoParams::default().generate().unwrap();
        let sv = svd(s.snapshots.data(), RankPolicy::Full).unwrap().spectrum;
        assert!(sv[6] / sv[0] > 1e-3);
        assert!(sv[7] / sv[0] <= 1e-12);
    }

    #[test]
    fn field_matches_formula() {
        let p = FourModeVideoParams { nx: 9, ny: 7, m: 20, ..Default::default() };
        let s = p.generate().unwrap();
        let (xs, ys) = (&s.truth.x_coords, &s.truth.y_coords);
        let norms: Vec<f64> = (0..4)
            .map(|j| {
                let (cx, cy) = (VIDEO_CENTERS[j].0 * 50.0, VIDEO_CENTERS[j].1 * 50.0);
                let mut ss = 0.0;
                for &y in ys {
                    for &x in xs {
                        ss += (-((x - cx).powi(2) + (y - cy).powi(2)) / 72.0).exp().powi(2);
                    }
                }
                ss.sqrt()
            })
            .collect();
        for sidx in 0..p.m {
            let t = p.dt() * sidx as f64;
            let a = p.coefficients(t);
            for (iy, &y) in ys.iter().enumerate() {
                for (ix, &x) in xs.iter().enumerate() {
                    let mut v = 0.0;
                    for j in 0..4 {
                        let (cx, cy) = (VIDEO_CENTERS[j].0 * 50.0, VIDEO_CENTERS[j].1 * 50.0);
                        let g = (-((x - cx).powi(2) + (y - cy).powi(2)) / 72.0).exp() / norms[j];
                        let carrier = if j == 0 { Complex::new(1.0, 0.0) } else { Complex::from_polar(1.0, p.wavenumber * (x - cx)) };
                        v += (a[j] * carrier * g).re;
                    }
                    let got = s.snapshots.data()[(iy * p.nx + ix, sidx)];
                    assert!((got - v).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FourModeVideoParams { m: 1, ..Default::default() }.generate().is_err());
        assert!(FourModeVideoParams { width: 0.0, ..Default::default() }.generate().is_err());
        assert!(FourModeVideoParams { nx: 0, ..Default::default() }.generate().is_err());
    }
}
