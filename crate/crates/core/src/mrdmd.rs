//! Multi-resolution DMD: fit a window, keep its slow modes, subtract them,
//! halve the residual in time and recurse.

use num_complex::Complex;
use num_traits::Float;

use crate::dmd::{fit, DmdResult, SnapshotMatrix};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RankPolicy};
use crate::scalar::Real;

/// Which snapshots of a bin are handed to the DMD fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    KeepAll,
    /// At most this many snapshots per bin, taken at a uniform integer stride
    /// from the bin's first snapshot.
    FixedPerBin(usize),
}

/// Frequency measure compared against `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SlowMetric {
    /// `|omega|`, so fast growth or decay also counts as fast.
    #[default]
    Modulus,
    /// `|Im omega|`: oscillation rate only.
    ImagOnly,
}

impl std::fmt::Display for Sampling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sampling::KeepAll => f.write_str("all"),
            Sampling::FixedPerBin(m) => write!(f, "fixed:{m}"),
        }
    }
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    /// `all` or `fixed:N`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "all" {
            return Ok(Sampling::KeepAll);
        }
        s.strip_prefix("fixed:")
            .and_then(|n| n.parse().ok())
            .map(Sampling::FixedPerBin)
            .ok_or_else(|| Error::Parameter(format!("sampling must be `all` or `fixed:N`, got `{s}`")))
    }
}

impl std::fmt::Display for SlowMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SlowMetric::Modulus => "modulus",
            SlowMetric::ImagOnly => "imag",
        })
    }
}

impl std::str::FromStr for SlowMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "modulus" => Ok(SlowMetric::Modulus),
            "imag" => Ok(SlowMetric::ImagOnly),
            other => Err(Error::Parameter(format!("slow metric must be `modulus` or `imag`, got `{other}`"))),
        }
    }
}

/// Comma-separated per-level policies, e.g. `fixed:6,auto`.
pub fn parse_rank_policies(s: &str) -> Result<Vec<RankPolicy>> {
    s.split(',').map(|p| p.parse()).collect()
}

pub fn format_rank_policies(p: &[RankPolicy]) -> String {
    p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq)]
pub struct MrdmdConfig<T: Real> {
    pub max_levels: usize,
    /// Slow-mode cutoff in cycles per bin.
    pub rho: T,
    /// Rank policy for level 1, 2, ...; the last entry applies to all deeper
    /// levels.
    pub rank_policy: Vec<RankPolicy>,
    pub sampling: Sampling,
    /// Bins shorter than this are not created; their parent is marked
    /// truncated.
    pub min_bin_snapshots: usize,
    pub slow_metric: SlowMetric,
}

impl<T: Real> MrdmdConfig<T> {
    pub fn new(max_levels: usize) -> Self {
        Self {
            max_levels,
            rho: T::one(),
            rank_policy: vec![RankPolicy::HardThreshold],
            sampling: Sampling::KeepAll,
            min_bin_snapshots: 4,
            slow_metric: SlowMetric::Modulus,
        }
    }

    pub fn with_rho(mut self, rho: T) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_rank_policy(mut self, policy: RankPolicy) -> Self {
        self.rank_policy = vec![policy];
        self
    }

    pub fn with_rank_policies(mut self, policies: Vec<RankPolicy>) -> Self {
        self.rank_policy = policies;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_min_bin_snapshots(mut self, m: usize) -> Self {
        self.min_bin_snapshots = m;
        self
    }

    pub fn with_slow_metric(mut self, metric: SlowMetric) -> Self {
        self.slow_metric = metric;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_levels < 1 {
            return Err(Error::Parameter("max_levels must be at least 1".into()));
        }
        if !(self.rho >= T::zero()) || !Float::is_finite(self.rho) {
            return Err(Error::Parameter(format!("rho must be finite and nonnegative, got {}", self.rho)));
        }
        if self.rank_policy.is_empty() {
            return Err(Error::Parameter("at least one rank policy is required".into()));
        }
        if let Some(RankPolicy::Fixed(0)) = self.rank_policy.iter().find(|p| **p == RankPolicy::Fixed(0)) {
            return Err(Error::Parameter("fixed rank must be at least 1".into()));
        }
        if let Sampling::FixedPerBin(m) = self.sampling {
            if m < 2 {
                return Err(Error::Parameter(format!("fixed_per_bin needs at least 2 snapshots, got {m}")));
            }
        }
        if self.min_bin_snapshots < 2 {
            return Err(Error::Parameter(format!(
                "min_bin_snapshots must be at least 2, got {}",
                self.min_bin_snapshots
            )));
        }
        Ok(())
    }

    pub fn policy_for(&self, level: usize) -> RankPolicy {
        let i = (level.max(1) - 1).min(self.rank_policy.len() - 1);
        self.rank_policy[i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MrdmdNode<T: Real> {
    pub level: usize,
    /// 1-based position within the level.
    pub bin: usize,
    /// Index of the bin's first snapshot in the full record.
    pub start_index: usize,
    /// Number of snapshots in the bin.
    pub len: usize,
    pub t_start: T,
    pub t_end: T,
    /// Full DMD fit of the bin's (residual) data; `None` when the fit failed.
    pub spectrum: Option<DmdResult<T>>,
    /// Indices into `spectrum` of the retained slow modes.
    pub retained: Vec<usize>,
    /// The retained modes, with local time origin `t_start`.
    pub slow_modes: DmdResult<T>,
    /// Why the fit failed, if it did.
    pub diagnostic: Option<String>,
    /// Recursion stopped here because a child bin would be too short.
    pub truncated: bool,
    pub children: Vec<MrdmdNode<T>>,
}

impl<T: Real> MrdmdNode<T> {
    pub fn retained_count(&self) -> usize {
        self.slow_modes.rank()
    }

    pub fn duration(&self) -> T {
        self.t_end - self.t_start
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MrdmdTree<T: Real> {
    pub root: MrdmdNode<T>,
    pub config: MrdmdConfig<T>,
    pub n_space: usize,
    pub n_time: usize,
    pub global_t0: T,
    /// `t0 + M dt`, the end of the last snapshot's interval.
    pub global_t1: T,
    pub dt: T,
}

/// One row of [`MrdmdTree::spectrum_map`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRecord<T: Real> {
    pub level: usize,
    pub bin: usize,
    pub t_start: T,
    pub t_end: T,
    pub omegas: Vec<Complex<T>>,
    pub amplitudes: Vec<Complex<T>>,
    pub retained: Vec<bool>,
}

/// What each node did to its data; see [`decompose_with`].
pub struct NodeStep<'a, T: Real> {
    pub level: usize,
    pub bin: usize,
    pub data: &'a Matrix<T>,
    pub slow_reconstruction: &'a Matrix<T>,
    pub residual: &'a Matrix<T>,
}

/// Indices `k` with `metric(omega_k) * bin_duration / (2 pi) <= rho`.
pub fn slow_mode_filter<T: Real>(r: &DmdResult<T>, bin_duration: T, rho: T) -> Vec<usize> {
    slow_mode_filter_with(r, bin_duration, rho, SlowMetric::Modulus)
}

pub fn slow_mode_filter_with<T: Real>(
    r: &DmdResult<T>,
    bin_duration: T,
    rho: T,
    metric: SlowMetric,
) -> Vec<usize> {
    // The boundary is inclusive; the relative slack absorbs roundoff in
    // omega so that exactly rho cycles per bin still counts as slow.
    let limit = rho * (T::one() + T::lit(1e-9));
    (0..r.rank())
        .filter(|&k| {
            let w = match metric {
                SlowMetric::Modulus => r.omegas[k].norm(),
                SlowMetric::ImagOnly => r.omegas[k].im.abs(),
            };
            w * bin_duration / T::TAU() <= limit
        })
        .collect()
}

pub fn decompose<T: Real>(x: &SnapshotMatrix<T>, config: &MrdmdConfig<T>) -> Result<MrdmdTree<T>> {
    decompose_with(x, config, |_| {})
}

/// [`decompose`], reporting every node's data, subtracted slow part and
/// residual to `observer` as they are computed.
pub fn decompose_with<T: Real>(
    x: &SnapshotMatrix<T>,
    config: &MrdmdConfig<T>,
    mut observer: impl FnMut(NodeStep<'_, T>),
) -> Result<MrdmdTree<T>> {
    config.validate()?;
    // The root only needs a DMD-able window; `min_bin_snapshots` governs
    // whether children are created.
    let m = x.n_time();
    if m < 2 {
        return Err(Error::WindowTooSmall { needed: 2, got: m });
    }
    let ctx = Ctx { config, dt: x.dt(), t0: x.t0() };
    let root = ctx.node(1, 1, 0, x.data().clone(), &mut observer)?;
    Ok(MrdmdTree {
        root,
        config: config.clone(),
        n_space: x.n_space(),
        n_time: m,
        global_t0: x.t0(),
        global_t1: x.t_end(),
        dt: x.dt(),
    })
}

struct Ctx<'a, T: Real> {
    config: &'a MrdmdConfig<T>,
    dt: T,
    t0: T,
}

impl<T: Real> Ctx<'_, T> {
    fn time(&self, index: usize) -> T {
        self.t0 + T::from_usize_lossy(index) * self.dt
    }

    fn node(
        &self,
        level: usize,
        bin: usize,
        start: usize,
        data: Matrix<T>,
        observer: &mut impl FnMut(NodeStep<'_, T>),
    ) -> Result<MrdmdNode<T>> {
        let (n, len) = data.shape();
        let t_start = self.time(start);
        let t_end = self.time(start + len);

        let (spectrum, diagnostic) = match self.fit_bin(level, &data, t_start) {
            Ok(r) => (Some(r), None),
            Err(e) if e.is_numerical() => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        let retained = spectrum.as_ref().map_or_else(Vec::new, |r| {
            slow_mode_filter_with(r, t_end - t_start, self.config.rho, self.config.slow_metric)
        });
        let slow_modes = match &spectrum {
            Some(r) => r.select(&retained),
            None => DmdResult::empty(n, self.dt, t_start, len),
        };

        let times: Vec<T> = (start..start + len).map(|i| self.time(i)).collect();
        let slow = slow_modes.reconstruct_real(&times)?;
        let residual = data.sub(&slow);
        observer(NodeStep {
            level,
            bin,
            data: &data,
            slow_reconstruction: &slow,
            residual: &residual,
        });
        drop(data);

        let mut children = Vec::new();
        let mut truncated = false;
        if level < self.config.max_levels {
            let left = len.div_ceil(2);
            let right = len - left;
            if right < self.config.min_bin_snapshots.max(2) {
                truncated = true;
            } else {
                let l = self.node(level + 1, 2 * bin - 1, start, residual.columns(0, left), observer)?;
                let r = self.node(level + 1, 2 * bin, start + left, residual.columns(left, len), observer)?;
                children = vec![l, r];
            }
        }

        Ok(MrdmdNode {
            level,
            bin,
            start_index: start,
            len,
            t_start,
            t_end,
            spectrum,
            retained,
            slow_modes,
            diagnostic,
            truncated,
            children,
        })
    }

    fn fit_bin(&self, level: usize, data: &Matrix<T>, t_start: T) -> Result<DmdResult<T>> {
        let (n, len) = data.shape();
        let (sub, stride) = match self.config.sampling {
            Sampling::FixedPerBin(target) if len > target => {
                let stride = len / target;
                let idx: Vec<usize> = (0..target).map(|i| i * stride).collect();
                (data.select_columns(&idx), stride)
            }
            _ => (data.clone(), 1),
        };
        let cols = sub.cols();
        // A fixed rank larger than this bin supports is clamped, not an error.
        let policy = match self.config.policy_for(level) {
            RankPolicy::Fixed(k) => RankPolicy::Fixed(k.min(n).min(cols - 1).max(1)),
            p => p,
        };
        let x = SnapshotMatrix::new(sub, self.dt * T::from_usize_lossy(stride), t_start)?;
        let mut r = fit(&x, policy)?;
        // Keep the bin's own length so window reconstruction covers it.
        if stride > 1 {
            r.window_len = cols;
        }
        Ok(r)
    }
}

impl<T: Real> MrdmdTree<T> {
    /// All nodes, level-major then bin order.
    pub fn nodes(&self) -> Vec<&MrdmdNode<T>> {
        let mut out = Vec::new();
        let mut frontier = vec![&self.root];
        while !frontier.is_empty() {
            out.extend(frontier.iter().copied());
            frontier = frontier.iter().flat_map(|n| n.children.iter()).collect();
        }
        out
    }

    pub fn depth(&self) -> usize {
        self.nodes().iter().map(|n| n.level).max().unwrap_or(1)
    }

    /// Node `(level, bin)`, both 1-based.
    pub fn find_node(&self, level: usize, bin: usize) -> Option<&MrdmdNode<T>> {
        if level == 0 || bin == 0 || level > usize::BITS as usize || bin > 1usize << (level - 1) {
            return None;
        }
        let mut node = &self.root;
        for depth in (0..level - 1).rev() {
            let go_right = ((bin - 1) >> depth) & 1 == 1;
            node = node.children.get(go_right as usize)?;
        }
        Some(node)
    }

    /// Indicator of node `n` at time `t`: half-open bins, except that the
    /// global right endpoint belongs to the last bin.
    pub fn indicator(&self, n: &MrdmdNode<T>, t: T) -> bool {
        (n.t_start <= t && t < n.t_end) || (t == self.global_t1 && n.t_end == self.global_t1)
    }

    /// `(psi, omega, b)` of retained mode `k` (1-based) of node `(level, bin)`.
    pub fn mode_at(&self, level: usize, bin: usize, k: usize) -> Result<(Vec<Complex<T>>, Complex<T>, Complex<T>)> {
        let node = self
            .find_node(level, bin)
            .ok_or_else(|| Error::Lookup(format!("no node at level {level}, bin {bin}")))?;
        let m = node.retained_count();
        if k == 0 || k > m {
            return Err(Error::Lookup(format!(
                "mode {k} requested at ({level}, {bin}), which retains {m}"
            )));
        }
        let s = &node.slow_modes;
        Ok((s.modes.col(k - 1).to_vec(), s.omegas[k - 1], s.amplitudes[k - 1]))
    }

    /// Evaluates the expansion at `times`. Times outside `[t0, t1]` are
    /// forecasts from the first or last bin of each level and are flagged.
    pub fn evaluate(&self, times: &[T]) -> Result<(Matrix<Complex<T>>, Vec<bool>)> {
        self.evaluate_levels(times, usize::MAX)
    }

    /// [`evaluate`](Self::evaluate) restricted to levels `1..=max_level`.
    pub fn evaluate_levels(&self, times: &[T], max_level: usize) -> Result<(Matrix<Complex<T>>, Vec<bool>)> {
        if times.iter().any(|t| !Float::is_finite(*t)) {
            return Err(Error::InvalidInput("evaluation times must be finite".into()));
        }
        let flags: Vec<bool> = times
            .iter()
            .map(|&t| t < self.global_t0 || t > self.global_t1)
            .collect();
        let select: Vec<T> = times
            .iter()
            .map(|&t| t.max(self.global_t0).min(self.global_t1))
            .collect();
        let mut out = Matrix::zeros(self.n_space, times.len());
        for node in self.nodes() {
            if node.retained_count() == 0 || node.level > max_level {
                continue;
            }
            node.slow_modes
                .accumulate(times, node.t_start, &mut out, |col| self.indicator(node, select[col]));
        }
        Ok((out, flags))
    }

    /// Real part of [`evaluate`](Self::evaluate).
    pub fn evaluate_real(&self, times: &[T]) -> Result<Matrix<T>> {
        Ok(self.evaluate(times)?.0.real_part())
    }

    /// Times of the original snapshots.
    pub fn snapshot_times(&self) -> Vec<T> {
        (0..self.n_time)
            .map(|j| self.global_t0 + T::from_usize_lossy(j) * self.dt)
            .collect()
    }

    /// Every node's full spectrum with retained flags, level-major.
    pub fn spectrum_map(&self) -> Vec<SpectrumRecord<T>> {
        self.nodes()
            .into_iter()
            .map(|n| {
                let (omegas, amplitudes) = n
                    .spectrum
                    .as_ref()
                    .map_or((Vec::new(), Vec::new()), |r| (r.omegas.clone(), r.amplitudes.clone()));
                let retained = (0..omegas.len()).map(|k| n.retained.contains(&k)).collect();
                SpectrumRecord {
                    level: n.level,
                    bin: n.bin,
                    t_start: n.t_start,
                    t_end: n.t_end,
                    omegas,
                    amplitudes,
                    retained,
                }
            })
            .collect()
    }
}
