use crate::error::{Error, Result};
use crate::scalar::Real;

/// How many singular triplets an SVD keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RankPolicy {
    /// Every triplet, `min(rows, cols)`, including zero singular values.
    Full,
    /// The leading `k`.
    Fixed(usize),
    /// Gavish–Donoho optimal hard threshold for unknown noise level, capped
    /// at the count of singular values above `AUTO_RELATIVE_FLOOR * sv[0]`.
    /// The cap matters for noise-free data, where the median singular value
    /// is roundoff and the threshold would otherwise admit roundoff
    /// directions (with huge, cancelling amplitudes).
    #[default]
    HardThreshold,
}

impl RankPolicy {
    /// Resolves the policy against a descending spectrum of an `rows x cols`
    /// matrix.
    pub fn resolve<T: Real>(self, sv: &[T], rows: usize, cols: usize) -> Result<usize> {
        let p = rows.min(cols);
        match self {
            RankPolicy::Full => Ok(p),
            RankPolicy::Fixed(k) if k >= 1 && k <= p => Ok(k),
            RankPolicy::Fixed(k) => Err(Error::Parameter(format!(
                "fixed rank {k} outside 1..={p} for a {rows}x{cols} matrix"
            ))),
            RankPolicy::HardThreshold => {
                let k = optimal_rank(sv, rows, cols)?;
                let floor = T::lit(AUTO_RELATIVE_FLOOR) * sv.first().copied().unwrap_or_else(T::zero);
                let significant = sv.iter().filter(|&&s| s > floor).count();
                Ok(k.min(significant).min(numerical_rank(sv, rows, cols)).max(1))
            }
        }
    }
}

impl std::fmt::Display for RankPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankPolicy::Full => f.write_str("full"),
            RankPolicy::Fixed(k) => write!(f, "fixed:{k}"),
            RankPolicy::HardThreshold => f.write_str("auto"),
        }
    }
}

impl std::str::FromStr for RankPolicy {
    type Err = Error;

    /// `auto` (hard threshold), `full`, `fixed:K` or a bare `K >= 1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let fixed = |k: &str| -> Result<Self> {
            match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(RankPolicy::Fixed(k)),
                _ => Err(Error::Parameter(format!("rank must be a positive integer, got `{k}`"))),
            }
        };
        match s {
            "auto" | "hard_threshold" => Ok(RankPolicy::HardThreshold),
            "full" => Ok(RankPolicy::Full),
            _ => match s.strip_prefix("fixed:") {
                Some(k) => fixed(k),
                None if s.chars().all(|c| c.is_ascii_digit()) && !s.is_empty() => fixed(s),
                None => Err(Error::Parameter(format!(
                    "rank policy must be `auto`, `full`, `fixed:K` or `K`, got `{s}`"
                ))),
            },
        }
    }
}

/// Relative singular-value floor of [`RankPolicy::HardThreshold`].
pub const AUTO_RELATIVE_FLOOR: f64 = 1e-10;

/// Gavish–Donoho coefficient `omega(beta)`, polynomial approximation.
pub fn gd_omega<T: Real>(beta: T) -> T {
    let b = beta;
    T::lit(0.56) * b * b * b - T::lit(0.95) * b * b + T::lit(1.82) * b + T::lit(1.43)
}

/// Optimal hard-threshold rank: the number of singular values above
/// `omega(beta) * median(sv)`, at least 1.
pub fn optimal_rank<T: Real>(sv: &[T], rows: usize, cols: usize) -> Result<usize> {
    if sv.is_empty() {
        return Err(Error::Parameter("optimal_rank needs at least one singular value".into()));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::Parameter("optimal_rank needs a non-empty matrix shape".into()));
    }
    let beta = T::from_usize_lossy(rows.min(cols)) / T::from_usize_lossy(rows.max(cols));
    let tau = gd_omega(beta) * median(sv);
    Ok(sv.iter().filter(|&&s| s > tau).count().max(1))
}

/// Count of singular values above `2 * max(rows, cols) * eps * ||sv||_2`,
/// where `sv` is the full spectrum (so `||sv||_2` is the Frobenius norm).
/// Directions below this are indistinguishable from the factorization's own
/// roundoff.
pub fn numerical_rank<T: Real>(sv: &[T], rows: usize, cols: usize) -> usize {
    let frob = sv.iter().fold(T::zero(), |acc, &s| acc.hypot(s));
    let tol = T::lit(2.0) * T::from_usize_lossy(rows.max(cols)) * T::epsilon() * frob;
    sv.iter().filter(|&&s| s > tol).count()
}

fn median<T: Real>(v: &[T]) -> T {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite singular values"));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / T::lit(2.0)
    }
}
