use std::ffi::OsString;
use std::path::{Path, PathBuf};

use mrdmd::io::{read_truth_sidecar, write_snapshots, write_truth_sidecar};
use mrdmd::scenarios::ScenarioSpec;

use crate::args::GenerateArgs;
use crate::error::CliResult;
use crate::manifest::{digest_file, RunManifest};

pub struct GenerateReport {
    pub spec: ScenarioSpec,
    pub snapshots: PathBuf,
    pub truth: PathBuf,
    pub manifest: PathBuf,
    pub message: String,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(path.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<GenerateReport> {
    let spec = read_truth_sidecar(&args.spec)?;
    let scenario = spec.generate()?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        super::create_dir(parent)?;
    }
    let truth = sibling(&args.out, ".truth");
    write_snapshots(&scenario.snapshots, Some(scenario.truth.grid), &args.out)?;
    write_truth_sidecar(&spec, &truth)?;

    let mut m = RunManifest::new("generate");
    m.input("scenario", &args.spec, &digest_file(&args.spec)?)
        .flag("kind", spec.kind())
        .seed(spec.seed())
        .artifacts([args.out.clone(), truth.clone()]);
    let base = args.out.parent().unwrap_or(Path::new(""));
    let manifest = m.write_to(base, &sibling(&args.out, ".manifest"))?;

    let x = &scenario.snapshots;
    let g = scenario.truth.grid;
    let message = format!(
        "generated {}: {} points ({}x{} grid) x {} snapshots, dt {}\nsnapshots {}\ntruth {}\n",
        spec.kind(),
        x.n_space(),
        g.nx,
        g.ny,
        x.n_time(),
        x.dt(),
        args.out.display(),
        truth.display()
    );
    Ok(GenerateReport { spec, snapshots: args.out.clone(), truth, manifest, message })
}
