use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use mrdmd::mrdmd::{parse_rank_policies, Sampling, SlowMetric};
use mrdmd::scenarios::Grid;
use mrdmd::RankPolicy;

#[derive(Debug, Parser)]
#[command(name = "mrdmd", version, about = "Exact and multi-resolution dynamic mode decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scenario: snapshots plus a ground-truth sidecar.
    Generate(GenerateArgs),
    /// Single-window exact DMD.
    Dmd(DmdArgs),
    /// Multi-resolution DMD tree.
    Mrdmd(MrdmdArgs),
    /// Match recovered modes against a scenario's ground truth.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Scenario description (`key = value` lines, `#` comments).
    pub spec: PathBuf,
    /// Snapshot file to write; `<out>.truth` and `<out>.manifest` go next to it.
    pub out: PathBuf,
}

/// Where the snapshots come from: a file, or a scenario generated on the fly.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Snapshot file (binary, or `.csv` with one row per spatial point).
    pub input: Option<PathBuf>,
    /// Scenario description to generate the snapshots from.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Time step for CSV input.
    #[arg(long, value_parser = positive)]
    pub dt: Option<f64>,
    /// Time of the first CSV snapshot.
    #[arg(long, value_parser = finite)]
    pub t0: Option<f64>,
    /// Grid of CSV input as NXxNY, for mode images.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<Grid>,
}

#[derive(Debug, Args)]
pub struct DmdArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
    /// `auto` (hard threshold), `full`, or a fixed rank K.
    #[arg(long, default_value = "auto")]
    pub rank: RankPolicy,
    /// Split into background (|omega| <= rho) and foreground snapshot files.
    #[arg(long, value_parser = non_negative)]
    pub rho: Option<f64>,
    /// Output directory (created if missing).
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MrdmdArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
    /// Maximum tree depth (level 1 is the whole record).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..=40))]
    pub levels: u32,
    /// Slow-mode cutoff in cycles per bin.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub rho: f64,
    /// Rank policy per level, comma separated; the last repeats.
    #[arg(long, default_value = "auto")]
    pub rank_policy: PolicyList,
    /// `all` or `fixed:N` snapshots per bin.
    #[arg(long, default_value = "all")]
    pub sampling: Sampling,
    /// Bins shorter than this are not split further.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(2..))]
    pub min_bin: u32,
    /// `modulus` (|omega|) or `imag` (|Im omega|) for the slow test.
    #[arg(long, default_value = "modulus")]
    pub slow_metric: SlowMetric,
    /// Exit 0 even if some bins failed to fit.
    #[arg(long)]
    pub keep_going: bool,
    /// Output directory (created if missing).
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Ground-truth sidecar written by `generate`.
    pub truth: PathBuf,
    /// Directory written by `mrdmd` (or its `tree` subdirectory).
    pub tree_dir: PathBuf,
    /// Directory written by `dmd` (or its `dmd` subdirectory).
    pub dmd_dir: PathBuf,
    /// Output directory (created if missing).
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyList(pub Vec<RankPolicy>);

impl FromStr for PolicyList {
    type Err = mrdmd::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rank_policies(s).map(PolicyList)
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("expected a non-negative number, got `{s}`")),
    }
}

fn finite(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a finite number, got `{s}`"))
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let (nx, ny) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NXxNY, got `{s}`"))?;
    let nx = nx.trim().parse().map_err(|_| format!("bad grid width `{nx}`"))?;
    let ny = ny.trim().parse().map_err(|_| format!("bad grid height `{ny}`"))?;
    Grid::new(nx, ny).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn grids_and_numbers() {
        assert_eq!(parse_grid("64x32").unwrap(), Grid { nx: 64, ny: 32 });
        assert!(parse_grid("64").is_err() && parse_grid("0x3").is_err());
        assert!(positive("0").is_err() && positive("nan").is_err() && positive("2.5").is_ok());
        assert!(non_negative("0").is_ok() && non_negative("-1").is_err());
    }

    #[test]
    fn input_sources_are_exclusive() {
        let parse = |v: &[&str]| Cli::try_parse_from(v.iter().copied());
        assert!(parse(&["mrdmd", "dmd", "x.snp", "-o", "out"]).is_ok());
        assert!(parse(&["mrdmd", "dmd", "--scenario", "s.cfg", "-o", "out"]).is_ok());
        assert!(parse(&["mrdmd", "dmd", "x.snp", "--scenario", "s.cfg", "-o", "out"]).is_err());
        assert!(parse(&["mrdmd", "dmd", "-o", "out"]).is_err());
        assert!(parse(&["mrdmd", "dmd", "x.snp", "--rank", "0", "-o", "out"]).is_err());
        assert!(parse(&["mrdmd", "mrdmd", "x.snp", "--levels", "0", "-o", "out"]).is_err());
        let ok = parse(&["mrdmd", "mrdmd", "x.snp", "--rank-policy", "fixed:6,auto", "-o", "o"]).unwrap();
        match ok.command {
            Command::Mrdmd(a) => assert_eq!(a.rank_policy.0, vec![RankPolicy::Fixed(6), RankPolicy::HardThreshold]),
            _ => unreachable!(),
        }
    }
}
