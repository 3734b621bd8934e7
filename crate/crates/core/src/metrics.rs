//! Comparing decompositions with ground truth.

use num_complex::Complex;
use num_traits::Zero;

use crate::dmd::DmdResult;
use crate::error::{Error, Result};
use crate::mrdmd::MrdmdTree;
use crate::numerics::{dot_conj, norm2, Matrix};
use crate::scalar::{Real, Scalar};
use crate::scenarios::GroundTruth;

/// `min_theta |a - e^{i theta} b|` after scaling both to unit norm, together
/// with the minimizing `e^{i theta}`.
pub fn mode_error_with_phase<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<(T, Complex<T>)> {
    if a.len() != b.len() {
        return Err(Error::Parameter(format!(
            "mode lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (norm2(a), norm2(b));
    if na == T::zero() || nb == T::zero() {
        return Err(Error::Parameter("cannot compare a zero mode".into()));
    }
    let inner = dot_conj(a, b) / (na * nb);
    let phase = if inner.norm() == T::zero() {
        Complex::new(T::one(), T::zero())
    } else {
        inner.conj() / inner.norm()
    };
    // Evaluate the distance directly rather than as sqrt(2 - 2|<a,b>|), which
    // loses half the digits for nearly equal modes.
    let diff: Vec<Complex<T>> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x / na - phase * y / nb)
        .collect();
    Ok((norm2(&diff), phase))
}

pub fn mode_error<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<T> {
    mode_error_with_phase(a, b).map(|(r, _)| r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionError<T> {
    pub value: T,
    /// `false` when the truth is identically zero and `value` is the
    /// absolute Frobenius error instead.
    pub relative: bool,
}

/// `|truth - approx|_F / |truth|_F`, or the absolute error when the truth is
/// zero.
pub fn reconstruction_error<E: Scalar>(truth: &Matrix<E>, approx: &Matrix<E>) -> Result<ReconstructionError<E::Real>> {
    if truth.shape() != approx.shape() {
        return Err(Error::Shape(format!(
            "truth is {:?} but approximation is {:?}",
            truth.shape(),
            approx.shape()
        )));
    }
    let err = truth.sub(approx).frobenius_norm();
    let scale = truth.frobenius_norm();
    if scale == E::Real::zero() {
        Ok(ReconstructionError { value: err, relative: false })
    } else {
        Ok(ReconstructionError { value: err / scale, relative: true })
    }
}

/// Where a recovered mode lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeId {
    /// Retained mode `k` (1-based) of mrDMD node `(level, bin)`.
    Tree { level: usize, bin: usize, k: usize },
    /// Mode `index` (1-based) of a single DMD fit.
    Dmd { index: usize },
}

impl ModeId {
    pub fn level(&self) -> Option<usize> {
        match self {
            ModeId::Tree { level, .. } => Some(*level),
            ModeId::Dmd { .. } => None,
        }
    }

    fn order_key(&self) -> (usize, usize, usize) {
        match *self {
            ModeId::Tree { level, bin, k } => (level, bin, k),
            ModeId::Dmd { index } => (0, 0, index),
        }
    }
}

impl std::fmt::Display for ModeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeId::Tree { level, bin, k } => write!(f, "({level},{bin},{k})"),
            ModeId::Dmd { index } => write!(f, "dmd[{index}]"),
        }
    }
}

/// A recovered mode and the snapshot range it was fitted on.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub id: ModeId,
    pub mode: Vec<Complex<f64>>,
    pub start: usize,
    pub len: usize,
}

pub fn tree_candidates(tree: &MrdmdTree<f64>) -> Vec<Candidate> {
    let mut out = Vec::new();
    for node in tree.nodes() {
        for k in 0..node.retained_count() {
            out.push(Candidate {
                id: ModeId::Tree { level: node.level, bin: node.bin, k: k + 1 },
                mode: node.slow_modes.modes.col(k).to_vec(),
                start: node.start_index,
                len: node.len,
            });
        }
    }
    out
}

pub fn dmd_candidates(r: &DmdResult<f64>) -> Vec<Candidate> {
    (0..r.rank())
        .map(|k| Candidate {
            id: ModeId::Dmd { index: k + 1 },
            mode: r.modes.col(k).to_vec(),
            start: 0,
            len: r.window_len,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchEntry {
    /// 0-based index of the true mode.
    pub true_index: usize,
    pub id: ModeId,
    pub error: f64,
    /// Phase `e^{i theta}` applied to the recovered mode.
    pub phase: Complex<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModeMatchReport {
    /// Sorted by `true_index`; a true mode is absent only when there are
    /// fewer candidates than true modes.
    pub entries: Vec<MatchEntry>,
}

impl ModeMatchReport {
    pub fn entry(&self, true_index: usize) -> Option<&MatchEntry> {
        self.entries.iter().find(|e| e.true_index == true_index)
    }

    pub fn levels(&self) -> Vec<Option<usize>> {
        self.entries.iter().map(|e| e.id.level()).collect()
    }

    pub fn total_error(&self) -> f64 {
        self.entries.iter().map(|e| e.error).sum()
    }
}

/// Error between true mode `j` and a candidate. A moving object is compared
/// against its shape averaged over the candidate's window, since that is all
/// a mode fitted on the window can describe.
pub fn candidate_error(truth: &GroundTruth, j: usize, c: &Candidate) -> Result<(f64, Complex<f64>)> {
    if j < truth.objects.len() {
        mode_error_with_phase(&truth.object_mode_over(j, c.start, c.len), &c.mode)
    } else {
        mode_error_with_phase(truth.true_modes.col(j), &c.mode)
    }
}

/// One-to-one greedy assignment: repeatedly take the globally smallest
/// remaining error, ties broken by lower level, bin and mode index, then by
/// lower true-mode index.
pub fn match_candidates(truth: &GroundTruth, candidates: &[Candidate]) -> Result<ModeMatchReport> {
    let mut pairs = Vec::with_capacity(truth.n_modes() * candidates.len());
    for j in 0..truth.n_modes() {
        for (ci, c) in candidates.iter().enumerate() {
            let (err, phase) = candidate_error(truth, j, c)?;
            pairs.push((err, ci, j, phase));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite mode errors")
            .then_with(|| candidates[a.1].id.order_key().cmp(&candidates[b.1].id.order_key()))
            .then(a.2.cmp(&b.2))
    });
    let mut used_c = vec![false; candidates.len()];
    let mut used_t = vec![false; truth.n_modes()];
    let mut entries = Vec::new();
    for (err, ci, j, phase) in pairs {
        if used_c[ci] || used_t[j] {
            continue;
        }
        used_c[ci] = true;
        used_t[j] = true;
        entries.push(MatchEntry {
            true_index: j,
            id: candidates[ci].id,
            error: err,
            phase,
        });
    }
    entries.sort_by_key(|e| e.true_index);
    Ok(ModeMatchReport { entries })
}

pub fn match_tree(truth: &GroundTruth, tree: &MrdmdTree<f64>) -> Result<ModeMatchReport> {
    match_candidates(truth, &tree_candidates(tree))
}

pub fn match_dmd(truth: &GroundTruth, r: &DmdResult<f64>) -> Result<ModeMatchReport> {
    match_candidates(truth, &dmd_candidates(r))
}

/// Relative error of a real field given as generic reals, as `f64`.
pub fn relative_error_f64<T: Real>(truth: &Matrix<T>, approx: &Matrix<T>) -> Result<f64> {
    Ok(reconstruction_error(truth, approx)?.value.to_f64_lossy())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{linspace, Grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cv(v: &[f64]) -> Vec<Complex<f64>> {
        v.iter().map(|&x| Complex::new(x, 0.0)).collect()
    }

    #[test]
    fn mode_error_examples() {
        let a = cv(&[1.0, 2.0, 3.0]);
        assert!(mode_error(&a, &a).unwrap() < 1e-15);
        let neg: Vec<_> = a.iter().map(|z| -z).collect();
        assert!(mode_error(&a, &neg).unwrap() < 1e-15);
        let e1 = cv(&[1.0, 0.0]);
        let e2 = cv(&[0.0, 1.0]);
        assert!((mode_error(&e1, &e2).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(mode_error(&e1, &a).is_err());
        let rot: Vec<_> = a.iter().map(|z| z * Complex::from_polar(3.0, 1.1)).collect();
        let (r, ph) = mode_error_with_phase(&a, &rot).unwrap();
        assert!(r < 1e-15);
        assert!((ph - Complex::from_polar(1.0, -1.1)).norm() < 1e-15);
    }

    #[test]
    fn reconstruction_error_examples() {
        let t = Matrix::from_rows(&[vec![3.0f64, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(reconstruction_error(&t, &t).unwrap().value, 0.0);
        let z = Matrix::zeros(2, 2);
        assert_eq!(reconstruction_error(&t, &z).unwrap().value, 1.0);
        let e = Matrix::from_rows(&[vec![0.3, 0.0], vec![0.0, 0.4]]).unwrap();
        assert!((reconstruction_error(&t, &t.add(&e)).unwrap().value - 0.1).abs() < 1e-15);
        let fallback = reconstruction_error(&z, &t).unwrap();
        assert_eq!(fallback, ReconstructionError { value: 5.0, relative: false });
        assert!(reconstruction_error(&t, &Matrix::zeros(2, 3)).is_err());
    }

    fn truth_with(modes: Vec<Vec<Complex<f64>>>) -> GroundTruth {
        let n = modes[0].len();
        let mut g = GroundTruth::empty("test", Grid::new(n, 1).unwrap(), linspace(0.0, 1.0, n), vec![0.0], 2);
        g.true_modes = Matrix::from_columns(&modes).unwrap();
        g
    }

    /// Minimum total error over all injective assignments.
    fn exhaustive(truth: &GroundTruth, cands: &[Candidate]) -> f64 {
        fn rec(j: usize, truth: &GroundTruth, cands: &[Candidate], used: &mut Vec<bool>) -> f64 {
            if j == truth.n_modes() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for ci in 0..cands.len() {
                if used[ci] {
                    continue;
                }
                used[ci] = true;
                let e = candidate_error(truth, j, &cands[ci]).unwrap().0;
                best = best.min(e + rec(j + 1, truth, cands, used));
                used[ci] = false;
            }
            best
        }
        rec(0, truth, cands, &mut vec![false; cands.len()])
    }

    #[test]
    fn greedy_matches_exhaustive_on_perturbed_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 10;
        let truth_modes: Vec<Vec<Complex<f64>>> = (0..4)
            .map(|_| (0..n).map(|_| Complex::new(rng.random_range(-1.0..1.0), 0.0)).collect())
            .collect();
        let truth = truth_with(truth_modes.clone());
        let mut cands = Vec::new();
        for (j, m) in truth_modes.iter().enumerate() {
            let noisy: Vec<_> = m
                .iter()
                .map(|z| (z + Complex::new(rng.random_range(-0.05..0.05), 0.0)) * Complex::from_polar(1.0, j as f64))
                .collect();
            cands.push(Candidate { id: ModeId::Tree { level: j + 1, bin: 1, k: 1 }, mode: noisy, start: 0, len: 1 });
        }
        for k in 0..5 {
            let junk = (0..n).map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            cands.push(Candidate { id: ModeId::Tree { level: 2, bin: 2, k: k + 1 }, mode: junk, start: 0, len: 1 });
        }
        let rep = match_candidates(&truth, &cands).unwrap();
        assert_eq!(rep.levels(), vec![Some(1), Some(2), Some(3), Some(4)]);
        assert!((rep.total_error() - exhaustive(&truth, &cands)).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_lower_level() {
        let m = cv(&[1.0, 0.0]);
        let truth = truth_with(vec![m.clone()]);
        let cands = vec![
            Candidate { id: ModeId::Tree { level: 3, bin: 1, k: 1 }, mode: m.clone(), start: 0, len: 1 },
            Candidate { id: ModeId::Tree { level: 2, bin: 2, k: 1 }, mode: m.clone(), start: 0, len: 1 },
            Candidate { id: ModeId::Tree { level: 2, bin: 1, k: 2 }, mode: m, start: 0, len: 1 },
        ];
        let rep = match_candidates(&truth, &cands).unwrap();
        assert_eq!(rep.entries[0].id, ModeId::Tree { level: 2, bin: 1, k: 2 });
    }

    #[test]
    fn no_candidates_gives_empty_report() {
        let truth = truth_with(vec![cv(&[1.0, 0.0])]);
        assert!(match_candidates(&truth, &[]).unwrap().entries.is_empty());
    }
}
