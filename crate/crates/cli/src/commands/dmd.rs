use std::fmt::Write as _;
use std::path::PathBuf;

use mrdmd::dmd::{background_foreground_split, fit, DmdResult, SnapshotMatrix};
use mrdmd::io::{export_dmd, export_mode_image, write_snapshots};
use mrdmd::metrics::relative_error_f64;

use super::{create_dir, fmt_error, write_text};
use crate::args::DmdArgs;
use crate::error::{CliError, CliResult};
use crate::input::load;
use crate::manifest::RunManifest;

pub struct DmdReport {
    pub result: DmdResult<f64>,
    /// Background membership per mode (all false without `--rho`).
    pub background: Vec<bool>,
    pub relative_error: f64,
    pub artifacts: Vec<PathBuf>,
    pub message: String,
}

pub fn cmd_dmd(args: &DmdArgs) -> CliResult<DmdReport> {
    let input = load(&args.input, &args.csv)?;
    let x = &input.snapshots;
    let r = fit(x, args.rank).map_err(|e| match e {
        e if e.is_numerical() => CliError::Numerical(format!("DMD fit of the full window: {e}")),
        e => CliError::Core(e),
    })?;
    let background: Vec<bool> = match args.rho {
        Some(rho) => r.omegas.iter().map(|w| w.norm() <= rho).collect(),
        None => vec![false; r.rank()],
    };
    let rec = r.reconstruct_real(&x.times())?;
    let err = relative_error_f64(x.data(), &rec)?;

    let out = &args.out;
    create_dir(out)?;
    let mut artifacts = export_dmd(&r, &background, out.join("dmd"))?;
    artifacts.push(write_text(out.join("spectrum.txt"), &spectrum_table(&r, &background))?);
    if let Some(grid) = input.grid {
        let dir = out.join("images");
        create_dir(&dir)?;
        for k in 0..r.rank() {
            let path = dir.join(format!("mode_{:03}.pgm", k + 1));
            export_mode_image(r.modes.col(k), grid, &path)?;
            artifacts.push(path);
        }
    }
    if let Some(rho) = args.rho {
        let (bg, fg) = background_foreground_split(&r, x, rho)?;
        for (name, data) in [("background.snp", bg), ("foreground.snp", fg)] {
            let path = out.join(name);
            write_snapshots(&SnapshotMatrix::new(data, x.dt(), x.t0())?, input.grid, &path)?;
            artifacts.push(path);
        }
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "snapshots {} x {}", x.n_space(), x.n_time());
    let _ = writeln!(summary, "svd_rank {}", r.svd_rank);
    let _ = writeln!(summary, "modes {}", r.rank());
    let _ = writeln!(summary, "dropped_zero_eigenvalues {}", r.dropped_zero);
    if input.missing > 0 {
        let _ = writeln!(summary, "zero_filled_cells {}", input.missing);
    }
    if args.rho.is_some() {
        let _ = writeln!(summary, "background_modes {}", background.iter().filter(|&&b| b).count());
    }
    let _ = writeln!(summary, "relative_error {}", fmt_error(err));
    artifacts.push(write_text(out.join("summary.txt"), &summary)?);

    let mut m = RunManifest::new("dmd");
    m.source(&input.source).flag("rank", args.rank);
    if let Some(rho) = args.rho {
        m.flag("rho", rho);
    }
    if let Some(dt) = args.csv.dt {
        m.flag("dt", dt);
    }
    if let Some(t0) = args.csv.t0 {
        m.flag("t0", t0);
    }
    m.artifacts(artifacts.clone());
    m.write(out)?;

    let mut message = summary;
    message.push_str(&spectrum_table(&r, &background));
    Ok(DmdReport { result: r, background, relative_error: err, artifacts, message })
}

fn spectrum_table(r: &DmdResult<f64>, background: &[bool]) -> String {
    let mut s = String::from("# k lambda_re lambda_im omega_re omega_im abs_omega b_re b_im abs_b background\n");
    for k in 0..r.rank() {
        let (l, w, b) = (r.lambdas[k], r.omegas[k], r.amplitudes[k]);
        let _ = writeln!(
            s,
            "{} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {}",
            k + 1,
            l.re,
            l.im,
            w.re,
            w.im,
            w.norm(),
            b.re,
            b.im,
            b.norm(),
            u8::from(background[k])
        );
    }
    s
}
