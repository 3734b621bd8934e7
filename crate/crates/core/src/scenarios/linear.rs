use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{check_positive, check_snapshots, Grid, GroundTruth, Scenario};
use crate::dmd::SnapshotMatrix;
use crate::error::{Error, Result};
use crate::numerics::{qr_thin, Matrix};

/// `x_{j+1} = A x_j` with a real `A` of prescribed spectrum: a block-diagonal
/// matrix of 1x1 real eigenvalues and 2x2 blocks `[[a, -b], [b, a]]` for
/// pairs `a +- ib`, rotated by a seeded random orthonormal basis. The initial
/// state excites every eigenvalue; directions outside the basis stay at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystemParams {
    pub n: usize,
    pub m: usize,
    pub dt: f64,
    pub eigenvalues: Vec<Complex<f64>>,
    pub seed: u64,
}

impl Default for LinearSystemParams {
    fn default() -> Self {
        Self {
            n: 50,
            m: 40,
            dt: 1.0,
            eigenvalues: vec![Complex::from_polar(0.9, 0.3), Complex::from_polar(0.9, -0.3)],
            seed: 0,
        }
    }
}

enum Block {
    Real(f64),
    Pair(f64, f64),
}

impl LinearSystemParams {
    pub fn validate(&self) -> Result<()> {
        check_snapshots(self.m)?;
        check_positive("dt", self.dt)?;
        if self.eigenvalues.is_empty() {
            return Err(Error::Parameter("at least one eigenvalue is required".into()));
        }
        if self.eigenvalues.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
            return Err(Error::Parameter("eigenvalues must be finite".into()));
        }
        if self.eigenvalues.len() > self.n {
            return Err(Error::Parameter(format!(
                "{} eigenvalues do not fit in dimension {}",
                self.eigenvalues.len(),
                self.n
            )));
        }
        self.blocks().map(|_| ())
    }

    /// Groups the spectrum into real values and conjugate pairs.
    fn blocks(&self) -> Result<Vec<Block>> {
        let mut used = vec![false; self.eigenvalues.len()];
        let mut blocks = Vec::new();
        for (i, l) in self.eigenvalues.iter().enumerate() {
            if used[i] {
                continue;
            }
            used[i] = true;
            if l.im == 0.0 {
                blocks.push(Block::Real(l.re));
                continue;
            }
            let tol = 1e-12 * l.norm().max(1.0);
            let partner = (0..self.eigenvalues.len())
                .find(|&k| !used[k] && (self.eigenvalues[k] - l.conj()).norm() <= tol)
                .ok_or_else(|| {
                    Error::Parameter(format!("eigenvalue {l} has no conjugate partner in the spectrum"))
                })?;
            used[partner] = true;
            blocks.push(Block::Pair(l.re, l.im.abs()));
        }
        Ok(blocks)
    }

    pub fn generate(&self) -> Result<Scenario> {
        self.validate()?;
        let blocks = self.blocks()?;
        let r = self.eigenvalues.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let g = Matrix::from_fn(self.n, r, |_, _| rng.sample::<f64, _>(StandardNormal));
        let (q, _) = qr_thin(&g);

        // Reduced state z in block coordinates; x = Q z.
        let mut z: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..1.5)).collect();
        let mut data = Matrix::zeros(self.n, self.m);
        for s in 0..self.m {
            data.col_mut(s).copy_from_slice(&q.matvec(&z));
            let mut next = vec![0.0; r];
            let mut k = 0;
            for b in &blocks {
                match *b {
                    Block::Real(l) => {
                        next[k] = l * z[k];
                        k += 1;
                    }
                    Block::Pair(a, bb) => {
                        next[k] = a * z[k] - bb * z[k + 1];
                        next[k + 1] = bb * z[k] + a * z[k + 1];
                        k += 2;
                    }
                }
            }
            z = next;
        }

        // Eigenvectors: e_k for real blocks, (e_k -+ i e_{k+1})/sqrt 2 for
        // a +- ib.
        let qc = q.to_complex();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut spectrum = Vec::with_capacity(r);
        let mut coords: Vec<Vec<Complex<f64>>> = Vec::with_capacity(r);
        let mut k = 0;
        for b in &blocks {
            match *b {
                Block::Real(l) => {
                    spectrum.push(Complex::new(l, 0.0));
                    let mut e = vec![Complex::new(0.0, 0.0); r];
                    e[k] = Complex::new(1.0, 0.0);
                    coords.push(e);
                    k += 1;
                }
                Block::Pair(a, bb) => {
                    for sign in [1.0, -1.0] {
                        spectrum.push(Complex::new(a, sign * bb));
                        let mut e = vec![Complex::new(0.0, 0.0); r];
                        e[k] = Complex::new(h, 0.0);
                        e[k + 1] = Complex::new(0.0, -sign * h);
                        coords.push(e);
                    }
                    k += 2;
                }
            }
        }
        let modes: Vec<Vec<Complex<f64>>> = coords.iter().map(|e| qc.matvec(e)).collect();

        let grid = Grid::new(self.n, 1)?;
        let xs = (0..self.n).map(|i| i as f64).collect();
        let mut truth = GroundTruth::empty("linear_system", grid, xs, vec![0.0], self.m);
        truth.true_modes = Matrix::from_columns(&modes)?;
        truth.time_series = Matrix::from_fn(r, self.m, |j, s| spectrum[j].powu(s as u32));
        truth.spectrum = spectrum;
        Ok(Scenario {
            snapshots: SnapshotMatrix::new(data, self.dt, 0.0)?,
            truth,
        })
    }
}

/// A conjugate-closed spectrum of exactly `rank` distinct eigenvalues with
/// moduli in `[0.8, 1.0]`: a mix of damped/neutral oscillating pairs and, if
/// `rank` is odd, one real decaying value.
pub fn random_spectrum(rank: usize, seed: u64) -> Vec<Complex<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let mut out = Vec::with_capacity(rank);
    let pairs = rank / 2;
    // Well-separated angles in (0.15, 2.9).
    let spacing = 2.75 / pairs.max(1) as f64;
    for p in 0..pairs {
        let theta = 0.15 + spacing * (p as f64 + rng.random_range(0.2..0.8));
        let modulus = if rng.random_bool(0.25) { 1.0 } else { rng.random_range(0.8..0.99) };
        let l = Complex::from_polar(modulus, theta);
        out.push(l);
        out.push(l.conj());
    }
    if rank % 2 == 1 {
        out.push(Complex::new(rng.random_range(0.8..0.95), 0.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{svd, RankPolicy};

    #[test]
    fn unit_eigenvalue_gives_constant_data() {
        let p = LinearSystemParams { eigenvalues: vec![Complex::new(1.0, 0.0)], n: 5, m: 6, ..Default::default() };
        let s = p.generate().unwrap();
        let d = s.snapshots.data();
        for j in 1..6 {
            assert_eq!(d.col(j), d.col(0));
        }
    }

    #[test]
    fn six_eigenvalues_give_rank_six() {
        let p = LinearSystemParams { eigenvalues: random_spectrum(6, 3), n: 50, m: 30, ..Default::default() };
        let s = p.generate().unwrap();
        let sv = svd(s.snapshots.data(), RankPolicy::Full).unwrap().spectrum;
        assert!(sv[5] / sv[0] > 1e-6);
        assert!(sv[6] / sv[0] < 1e-13);
    }

    #[test]
    fn truth_modes_are_eigenvectors() {
        // A x = Q B Q^T x; check via the data: x_{j+1} = sum_k c_k lambda_k^{j+1} psi_k.
        let p = LinearSystemParams { eigenvalues: random_spectrum(5, 1), n: 12, m: 8, ..Default::default() };
        let s = p.generate().unwrap();
        let psi = &s.truth.true_modes;
        let c = crate::dmd::amplitudes(psi, s.snapshots.data().col(0)).unwrap();
        for j in 0..8 {
            for i in 0..12 {
                let v: Complex<f64> = (0..5).map(|k| c[k] * s.truth.spectrum[k].powu(j as u32) * psi[(i, k)]).sum();
                assert!((v.re - s.snapshots.data()[(i, j)]).abs() < 1e-12);
                assert!(v.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_conjugate_spectrum_rejected() {
        let p = LinearSystemParams { eigenvalues: vec![Complex::new(0.5, 0.2)], ..Default::default() };
        assert!(matches!(p.generate(), Err(Error::Parameter(_))));
    }

    #[test]
    fn random_spectrum_is_closed_and_sized() {
        for rank in 1..=8 {
            let s = random_spectrum(rank, rank as u64);
            assert_eq!(s.len(), rank);
            for l in &s {
                assert!(s.iter().any(|m| *m == l.conj()));
                assert!(l.norm() >= 0.8 && l.norm() <= 1.0);
            }
        }
    }
}
