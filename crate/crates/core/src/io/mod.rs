//! File formats. All binary data is little-endian `f64`; text records are
//! line oriented. Writers are deterministic and readers reject anything
//! malformed with a typed error.

mod binary;
mod export;
mod format;
mod image;
mod table;

use std::path::Path;

pub use binary::{
    decode_modes, decode_snapshots, encode_modes, encode_snapshots, read_snapshots, write_snapshots, SnapshotFile,
    SNAPSHOT_HEADER_LEN, SNAPSHOT_MAGIC,
};
pub use export::{export_dmd, export_tree, node_stem, read_dmd_export, read_tree_export, DMD_MODES, DMD_RECORD, MANIFEST};
pub use format::FormatError;
pub use image::{export_mode_image, render_pgm};
pub use table::{parse_csv_snapshots, read_csv_snapshots, CsvSnapshots};

use crate::error::{Error, Result};
use crate::scenarios::{parse_scenario, scenario_to_config, ScenarioSpec};

/// Ground-truth sidecar: the scenario description, from which the truth
/// (and the snapshots) regenerate deterministically.
pub fn write_truth_sidecar(spec: &ScenarioSpec, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), scenario_to_config(spec).as_bytes())
}

pub fn read_truth_sidecar(path: impl AsRef<Path>) -> Result<ScenarioSpec> {
    let path = path.as_ref();
    let text = String::from_utf8(read_file(path)?)
        .map_err(|_| Error::InvalidInput(format!("{} is not valid UTF-8", path.display())))?;
    parse_scenario(&text)
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
