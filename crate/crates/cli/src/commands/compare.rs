use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mrdmd::io::{read_dmd_export, read_truth_sidecar, read_tree_export, DMD_RECORD, MANIFEST};
use mrdmd::metrics::{match_dmd, match_tree, relative_error_f64, ModeMatchReport};

use super::{create_dir, fmt_error, write_text};
use crate::args::CompareArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::{digest_file, RunManifest};

pub struct CompareReport {
    pub tree_matches: ModeMatchReport,
    pub dmd_matches: ModeMatchReport,
    pub tree_error: f64,
    pub dmd_error: f64,
    pub message: String,
}

/// Accepts either the export directory itself or the run directory holding
/// it under `sub`.
fn locate(dir: &Path, sub: &str, marker: &str) -> PathBuf {
    if !dir.join(marker).exists() && dir.join(sub).join(marker).exists() {
        dir.join(sub)
    } else {
        dir.to_path_buf()
    }
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<CompareReport> {
    let spec = read_truth_sidecar(&args.truth)?;
    let scenario = spec.generate()?;
    let x = &scenario.snapshots;
    let tree_dir = locate(&args.tree_dir, "tree", MANIFEST);
    let dmd_dir = locate(&args.dmd_dir, "dmd", DMD_RECORD);
    let tree = read_tree_export(&tree_dir)?;
    let (dmd, _) = read_dmd_export(&dmd_dir)?;
    if tree.n_space != x.n_space() || tree.n_time != x.n_time() || dmd.modes.rows() != x.n_space() {
        return Err(CliError::Usage(format!(
            "outputs do not belong to this scenario: truth is {} x {}, tree is {} x {}, DMD has {} points",
            x.n_space(),
            x.n_time(),
            tree.n_space,
            tree.n_time,
            dmd.modes.rows()
        )));
    }

    let tree_matches = match_tree(&scenario.truth, &tree)?;
    let dmd_matches = match_dmd(&scenario.truth, &dmd)?;
    let times = x.times();
    let tree_error = relative_error_f64(x.data(), &tree.evaluate_real(&times)?)?;
    let dmd_error = relative_error_f64(x.data(), &dmd.reconstruct_real(&times)?)?;

    let mut s = String::from("# true_mode mrdmd_mode mrdmd_error dmd_mode dmd_error\n");
    for j in 0..scenario.truth.n_modes() {
        let cell = |r: &ModeMatchReport| {
            r.entry(j)
                .map_or(("-".to_string(), "-".to_string()), |e| (e.id.to_string(), fmt_error(e.error)))
        };
        let (ti, te) = cell(&tree_matches);
        let (di, de) = cell(&dmd_matches);
        let _ = writeln!(s, "{} {ti} {te} {di} {de}", j + 1);
    }
    let _ = writeln!(s, "reconstruction_error mrdmd {} dmd {}", fmt_error(tree_error), fmt_error(dmd_error));

    create_dir(&args.out)?;
    let report = write_text(args.out.join("report.txt"), &s)?;
    let mut m = RunManifest::new("compare");
    m.input("truth", &args.truth, &digest_file(&args.truth)?)
        .input("tree", &tree_dir.join(MANIFEST), &digest_file(&tree_dir.join(MANIFEST))?)
        .input("dmd", &dmd_dir.join(DMD_RECORD), &digest_file(&dmd_dir.join(DMD_RECORD))?)
        .seed(spec.seed())
        .artifacts([report]);
    m.write(&args.out)?;

    Ok(CompareReport { tree_matches, dmd_matches, tree_error, dmd_error, message: s })
}
