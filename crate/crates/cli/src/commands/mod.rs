mod compare;
mod dmd;
mod generate;
mod mrdmd;

use std::path::{Path, PathBuf};

pub use compare::{cmd_compare, CompareReport};
pub use dmd::{cmd_dmd, DmdReport};
pub use generate::{cmd_generate, GenerateReport};
pub use mrdmd::{cmd_mrdmd, MrdmdReport};

use crate::error::CliResult;

pub(crate) fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| ::mrdmd::Error::Io { path: dir.to_path_buf(), source: e })?;
    Ok(())
}

pub(crate) fn write_text(path: PathBuf, text: &str) -> CliResult<PathBuf> {
    std::fs::write(&path, text).map_err(|e| ::mrdmd::Error::Io { path: path.clone(), source: e })?;
    Ok(path)
}

pub(crate) fn fmt_error(e: f64) -> String {
    format!("{e:.6e}")
}
