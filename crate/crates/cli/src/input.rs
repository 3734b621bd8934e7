use std::path::{Path, PathBuf};

use mrdmd::dmd::SnapshotMatrix;
use mrdmd::io::{read_csv_snapshots, read_snapshots, read_truth_sidecar};
use mrdmd::scenarios::{Grid, ScenarioSpec};

use crate::args::{CsvArgs, InputArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::digest_file;

pub enum Source {
    File { path: PathBuf, sha256: String },
    Scenario { path: PathBuf, sha256: String, spec: ScenarioSpec },
}

pub struct Loaded {
    pub snapshots: SnapshotMatrix<f64>,
    pub grid: Option<Grid>,
    pub source: Source,
    /// Zero-filled CSV cells.
    pub missing: usize,
}

pub fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn load(input: &InputArgs, csv: &CsvArgs) -> CliResult<Loaded> {
    if let Some(path) = &input.scenario {
        reject_csv_flags(csv, "--scenario")?;
        let spec = read_truth_sidecar(path)?;
        let s = spec.generate()?;
        return Ok(Loaded {
            snapshots: s.snapshots,
            grid: Some(s.truth.grid),
            source: Source::Scenario { path: path.clone(), sha256: digest_file(path)?, spec },
            missing: 0,
        });
    }
    let path = input.input.as_ref().expect("clap enforces one input source");
    let sha256 = digest_file(path)?;
    let source = Source::File { path: path.clone(), sha256 };
    if is_csv(path) {
        let c = read_csv_snapshots(path, csv.dt.unwrap_or(1.0), csv.t0.unwrap_or(0.0))?;
        let missing = c.missing_count();
        if let Some(g) = csv.grid {
            if g.len() != c.snapshots.n_space() {
                return Err(CliError::Usage(format!(
                    "--grid {}x{} does not cover {} spatial points",
                    g.nx,
                    g.ny,
                    c.snapshots.n_space()
                )));
            }
        }
        return Ok(Loaded { snapshots: c.snapshots, grid: csv.grid, source, missing });
    }
    reject_csv_flags(csv, "binary snapshot input")?;
    let f = read_snapshots(path)?;
    Ok(Loaded { snapshots: f.snapshots, grid: f.grid, source, missing: 0 })
}

fn reject_csv_flags(csv: &CsvArgs, with: &str) -> CliResult<()> {
    if csv.dt.is_some() || csv.t0.is_some() || csv.grid.is_some() {
        return Err(CliError::Usage(format!("--dt, --t0 and --grid only apply to CSV input, not {with}")));
    }
    Ok(())
}
