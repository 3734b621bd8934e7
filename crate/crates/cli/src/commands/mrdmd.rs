use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::PathBuf;

use mrdmd::io::{export_mode_image, export_tree};
use mrdmd::metrics::relative_error_f64;
use mrdmd::mrdmd::{decompose, format_rank_policies, MrdmdConfig, MrdmdTree};

use super::{create_dir, fmt_error, write_text};
use crate::args::MrdmdArgs;
use crate::error::{CliError, CliResult};
use crate::input::load;
use crate::manifest::RunManifest;

pub struct NodeIssue {
    pub level: usize,
    pub bin: usize,
    pub message: String,
}

pub struct MrdmdReport {
    pub tree: MrdmdTree<f64>,
    pub relative_error: f64,
    /// Error of the reconstruction from levels `1..=l`, for each `l`.
    pub level_errors: Vec<(usize, f64)>,
    /// Bins whose DMD fit failed.
    pub failures: Vec<NodeIssue>,
    /// Bins where recursion stopped early.
    pub truncated: Vec<(usize, usize)>,
    pub artifacts: Vec<PathBuf>,
    pub message: String,
}

pub fn cmd_mrdmd(args: &MrdmdArgs) -> CliResult<MrdmdReport> {
    let input = load(&args.input, &args.csv)?;
    let x = &input.snapshots;
    let config = MrdmdConfig::new(args.levels as usize)
        .with_rho(args.rho)
        .with_rank_policies(args.rank_policy.0.clone())
        .with_sampling(args.sampling)
        .with_min_bin_snapshots(args.min_bin as usize)
        .with_slow_metric(args.slow_metric);
    let tree = decompose(x, &config)?;

    let times = tree.snapshot_times();
    let relative_error = relative_error_f64(x.data(), &tree.evaluate_real(&times)?)?;
    let mut level_errors = Vec::new();
    for l in 1..=tree.depth() {
        let rec = tree.evaluate_levels(&times, l)?.0.real_part();
        level_errors.push((l, relative_error_f64(x.data(), &rec)?));
    }
    let nodes = tree.nodes();
    let failures: Vec<NodeIssue> = nodes
        .iter()
        .filter_map(|n| {
            n.diagnostic
                .as_ref()
                .map(|d| NodeIssue { level: n.level, bin: n.bin, message: d.clone() })
        })
        .collect();
    let truncated: Vec<(usize, usize)> = nodes.iter().filter(|n| n.truncated).map(|n| (n.level, n.bin)).collect();

    let out = &args.out;
    create_dir(out)?;
    let mut artifacts = export_tree(&tree, out.join("tree"))?;
    artifacts.push(write_text(out.join("spectrum_map.txt"), &spectrum_map(&tree))?);
    if let Some(grid) = input.grid {
        let dir = out.join("images");
        create_dir(&dir)?;
        for n in &nodes {
            for k in 0..n.retained_count() {
                let path = dir.join(format!("node_L{}_B{}_m{}.pgm", n.level, n.bin, k + 1));
                export_mode_image(n.slow_modes.modes.col(k), grid, &path)?;
                artifacts.push(path);
            }
        }
    }

    let mut s = String::new();
    let _ = writeln!(s, "snapshots {} x {}", x.n_space(), x.n_time());
    let _ = writeln!(s, "levels {} (requested {})", tree.depth(), args.levels);
    let _ = writeln!(s, "nodes {}", nodes.len());
    let _ = writeln!(s, "retained_modes {}", nodes.iter().map(|n| n.retained_count()).sum::<usize>());
    if input.missing > 0 {
        let _ = writeln!(s, "zero_filled_cells {}", input.missing);
    }
    let _ = writeln!(s, "relative_error {}", fmt_error(relative_error));
    for (l, e) in &level_errors {
        let _ = writeln!(s, "level_error {l} {}", fmt_error(*e));
    }
    for (l, b) in &truncated {
        let _ = writeln!(s, "truncated {l} {b}");
    }
    for f in &failures {
        let _ = writeln!(s, "failed {} {} {}", f.level, f.bin, f.message);
    }
    if tree.depth() < args.levels as usize {
        let _ = writeln!(
            s,
            "note: recursion stopped at level {} because bins reached the {}-snapshot minimum",
            tree.depth(),
            args.min_bin
        );
    }
    artifacts.push(write_text(out.join("summary.txt"), &s)?);

    let mut m = RunManifest::new("mrdmd");
    m.source(&input.source)
        .flag("levels", args.levels)
        .flag("rho", args.rho)
        .flag("rank_policy", format_rank_policies(&args.rank_policy.0))
        .flag("sampling", args.sampling)
        .flag("min_bin", args.min_bin)
        .flag("slow_metric", args.slow_metric);
    if let Some(dt) = args.csv.dt {
        m.flag("dt", dt);
    }
    if let Some(t0) = args.csv.t0 {
        m.flag("t0", t0);
    }
    m.artifacts(artifacts.clone());
    m.write(out)?;

    if let (Some(f), false) = (failures.first(), args.keep_going) {
        return Err(CliError::Numerical(format!(
            "bin (level {}, bin {}) failed: {} ({} failed bins; outputs written to {})",
            f.level,
            f.bin,
            f.message,
            failures.len(),
            out.display()
        )));
    }
    Ok(MrdmdReport { tree, relative_error, level_errors, failures, truncated, artifacts, message: s })
}

fn spectrum_map(tree: &MrdmdTree<f64>) -> String {
    let mut s = String::from(
        "# level bin t_start t_end k omega_re omega_im abs_omega cycles_per_bin b_re b_im abs_b retained\n",
    );
    for r in tree.spectrum_map() {
        let span = r.t_end - r.t_start;
        for (k, (w, b)) in r.omegas.iter().zip(&r.amplitudes).enumerate() {
            let _ = writeln!(
                s,
                "{} {} {:e} {:e} {} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {}",
                r.level,
                r.bin,
                r.t_start,
                r.t_end,
                k + 1,
                w.re,
                w.im,
                w.norm(),
                w.norm() * span / TAU,
                b.re,
                b.im,
                b.norm(),
                u8::from(r.retained[k])
            );
        }
    }
    s
}
