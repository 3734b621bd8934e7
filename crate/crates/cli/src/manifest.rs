//! Run manifests: flags, input digests and the digest of every artifact,
//! with no timestamps, so identical runs produce identical manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::input::Source;

pub const RUN_MANIFEST: &str = "run_manifest.txt";

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn digest_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| mrdmd::Error::Io { path: path.to_path_buf(), source: e })?;
    Ok(digest(&bytes))
}

pub struct RunManifest {
    text: String,
    artifacts: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut text = String::from("# mrdmd run manifest\n");
        let _ = writeln!(text, "version {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "command {command}");
        Self { text, artifacts: Vec::new() }
    }

    pub fn flag(&mut self, name: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "flag {name} {value}");
        self
    }

    pub fn input(&mut self, role: &str, path: &Path, sha256: &str) -> &mut Self {
        let _ = writeln!(self.text, "input {role} {} sha256 {sha256}", path.display());
        self
    }

    /// Records the input and, for generated data, the scenario kind and seed.
    pub fn source(&mut self, source: &Source) -> &mut Self {
        match source {
            Source::File { path, sha256 } => self.input("snapshots", path, sha256),
            Source::Scenario { path, sha256, spec } => {
                self.input("scenario", path, sha256);
                let _ = writeln!(self.text, "scenario {}", spec.kind());
                self.seed(spec.seed())
            }
        }
    }

    pub fn seed(&mut self, seed: Option<u64>) -> &mut Self {
        match seed {
            Some(s) => writeln!(self.text, "seed {s}"),
            None => writeln!(self.text, "seed none"),
        }
        .expect("writing to a String");
        self
    }

    pub fn artifacts(&mut self, paths: impl IntoIterator<Item = PathBuf>) -> &mut Self {
        self.artifacts.extend(paths);
        self
    }

    /// Writes `run_manifest.txt` into `dir`, listing artifacts relative to it.
    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        self.write_to(dir, &dir.join(RUN_MANIFEST))
    }

    pub fn write_to(&self, base: &Path, path: &Path) -> CliResult<PathBuf> {
        let mut rows = Vec::new();
        for a in &self.artifacts {
            let rel = a.strip_prefix(base).unwrap_or(a);
            let name = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            rows.push((name, digest_file(a)?));
        }
        rows.sort();
        rows.dedup();
        let mut text = self.text.clone();
        for (name, d) in rows {
            let _ = writeln!(text, "artifact {name} sha256 {d}");
        }
        std::fs::write(path, text).map_err(|e| CliError::Core(mrdmd::Error::Io { path: path.to_path_buf(), source: e }))?;
        Ok(path.to_path_buf())
    }
}
