//! Line-oriented text records for decomposition outputs.
//!
//! Every record line is `key value...`, whitespace separated; `#` starts a
//! comment line. Floats are written in shortest round-trip `{:e}` form, so
//! reading an export back reproduces the in-memory values exactly. Mode
//! vectors live in sibling `MRDMDMOD` binary files.
//!
//! A tree export is a directory holding `manifest.txt` (global metadata and
//! the configuration, then one `node level bin file` line per node,
//! level-major) plus `node_L{level}_B{bin}.txt` and, for fitted nodes,
//! `node_L{level}_B{bin}.modes`. A single-window export is `dmd.txt` and
//! `dmd.modes`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex;

use super::binary::{decode_modes, encode_modes};
use super::{read_file, write_file, FormatError};
use crate::dmd::DmdResult;
use crate::error::{Error, Result};
use crate::mrdmd::{format_rank_policies, parse_rank_policies, MrdmdConfig, MrdmdNode, MrdmdTree};

pub const MANIFEST: &str = "manifest.txt";
pub const DMD_RECORD: &str = "dmd.txt";
pub const DMD_MODES: &str = "dmd.modes";
const FORMAT_VERSION: usize = 1;

pub fn node_stem(level: usize, bin: usize) -> String {
    format!("node_L{level}_B{bin}")
}

/// Writes the tree into `dir` (created if needed) and returns the files
/// written, manifest first.
pub fn export_tree(tree: &MrdmdTree<f64>, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let c = &tree.config;
    let mut m = String::from("# mrdmd tree export\n");
    kv(&mut m, "format", FORMAT_VERSION);
    kv(&mut m, "n_space", tree.n_space);
    kv(&mut m, "n_time", tree.n_time);
    kv(&mut m, "dt", fmt_f(tree.dt));
    kv(&mut m, "global_t0", fmt_f(tree.global_t0));
    kv(&mut m, "global_t1", fmt_f(tree.global_t1));
    kv(&mut m, "max_levels", c.max_levels);
    kv(&mut m, "rho", fmt_f(c.rho));
    kv(&mut m, "rank_policy", format_rank_policies(&c.rank_policy));
    kv(&mut m, "sampling", c.sampling);
    kv(&mut m, "min_bin_snapshots", c.min_bin_snapshots);
    kv(&mut m, "slow_metric", c.slow_metric);
    let nodes = tree.nodes();
    kv(&mut m, "nodes", nodes.len());

    let mut files = vec![dir.join(MANIFEST)];
    let mut pending = Vec::new();
    for n in &nodes {
        let stem = node_stem(n.level, n.bin);
        let _ = writeln!(m, "node {} {} {stem}.txt", n.level, n.bin);
        pending.push((dir.join(format!("{stem}.txt")), node_record(n).into_bytes()));
        if let Some(r) = &n.spectrum {
            pending.push((dir.join(format!("{stem}.modes")), encode_modes(&r.modes)));
        }
    }
    write_file(&files[0], m.as_bytes())?;
    for (path, bytes) in pending {
        write_file(&path, &bytes)?;
        files.push(path);
    }
    Ok(files)
}

fn node_record(n: &MrdmdNode<f64>) -> String {
    let mut s = String::from("# mrdmd node record\n");
    kv(&mut s, "level", n.level);
    kv(&mut s, "bin", n.bin);
    kv(&mut s, "start_index", n.start_index);
    kv(&mut s, "len", n.len);
    kv(&mut s, "t_start", fmt_f(n.t_start));
    kv(&mut s, "t_end", fmt_f(n.t_end));
    kv(&mut s, "truncated", u8::from(n.truncated));
    kv(&mut s, "children", n.children.len());
    let diag = n.diagnostic.as_deref().map_or("-".to_string(), |d| d.replace(['\n', '\r'], " "));
    kv(&mut s, "diagnostic", diag);
    kv(&mut s, "fit", u8::from(n.spectrum.is_some()));
    if let Some(r) = &n.spectrum {
        let flags: Vec<bool> = (0..r.rank()).map(|k| n.retained.contains(&k)).collect();
        fit_block(&mut s, r, &flags, "retained");
    }
    s
}

/// Single-window fit; `flags` (one per mode, e.g. background membership) is
/// stored alongside each mode.
pub fn export_dmd(r: &DmdResult<f64>, flags: &[bool], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if flags.len() != r.rank() {
        return Err(Error::Parameter(format!("{} flags for {} modes", flags.len(), r.rank())));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut s = String::from("# dmd fit\n");
    kv(&mut s, "format", FORMAT_VERSION);
    kv(&mut s, "n_space", r.modes.rows());
    fit_block(&mut s, r, flags, "flag");
    let files = vec![dir.join(DMD_RECORD), dir.join(DMD_MODES)];
    write_file(&files[0], s.as_bytes())?;
    write_file(&files[1], &encode_modes(&r.modes))?;
    Ok(files)
}

pub fn read_dmd_export(dir: impl AsRef<Path>) -> Result<(DmdResult<f64>, Vec<bool>)> {
    let dir = dir.as_ref();
    let text = read_text(&dir.join(DMD_RECORD))?;
    let mut rec = Records::new(DMD_RECORD, &text)?;
    rec.version()?;
    let n: usize = rec.one("n_space")?;
    let modes = decode_modes(&read_file(&dir.join(DMD_MODES))?)?;
    let out = read_fit_block(&mut rec, modes, n)?;
    rec.finish()?;
    Ok(out)
}

fn fit_block(s: &mut String, r: &DmdResult<f64>, flags: &[bool], flag_name: &str) {
    kv(s, "dt", fmt_f(r.dt));
    kv(s, "t0", fmt_f(r.t0));
    kv(s, "window_len", r.window_len);
    kv(s, "svd_rank", r.svd_rank);
    kv(s, "dropped_zero", r.dropped_zero);
    let mut sv = r.singular_values.len().to_string();
    for v in &r.singular_values {
        sv.push(' ');
        sv.push_str(&fmt_f(*v));
    }
    kv(s, "singular_values", sv);
    kv(s, "modes", r.rank());
    let _ = writeln!(s, "# k lambda_re lambda_im omega_re omega_im b_re b_im {flag_name}");
    for k in 0..r.rank() {
        let _ = writeln!(
            s,
            "mode {} {} {} {} {}",
            k + 1,
            fmt_c(r.lambdas[k]),
            fmt_c(r.omegas[k]),
            fmt_c(r.amplitudes[k]),
            u8::from(flags[k])
        );
    }
}

fn read_fit_block(
    rec: &mut Records<'_>,
    modes: crate::Matrix<Complex<f64>>,
    n_space: usize,
) -> Result<(DmdResult<f64>, Vec<bool>)> {
    let dt = rec.one("dt")?;
    let t0 = rec.one("t0")?;
    let window_len = rec.one("window_len")?;
    let svd_rank = rec.one("svd_rank")?;
    let dropped_zero = rec.one("dropped_zero")?;
    let (line, sv) = rec.next("singular_values")?;
    let count: usize = rec.parse(line, sv.first().copied().unwrap_or(""))?;
    if sv.len() != count + 1 {
        return Err(rec.err(line, format!("expected {count} singular values, found {}", sv.len() - 1)));
    }
    let singular_values = sv[1..].iter().map(|v| rec.parse(line, v)).collect::<Result<Vec<f64>>>()?;
    let r: usize = rec.one("modes")?;
    if modes.shape() != (n_space, r) {
        return Err(rec.err(
            line,
            format!("mode file is {}x{}, record expects {n_space}x{r}", modes.rows(), modes.cols()),
        ));
    }
    let (mut lambdas, mut omegas, mut amplitudes, mut flags) = (vec![], vec![], vec![], vec![]);
    for k in 1..=r {
        let (line, v) = rec.next("mode")?;
        if v.len() != 8 {
            return Err(rec.err(line, format!("mode line needs 8 fields, found {}", v.len())));
        }
        if rec.parse::<usize>(line, v[0])? != k {
            return Err(rec.err(line, format!("expected mode {k}")));
        }
        let f: Vec<f64> = v[1..7].iter().map(|x| rec.parse(line, x)).collect::<Result<_>>()?;
        lambdas.push(Complex::new(f[0], f[1]));
        omegas.push(Complex::new(f[2], f[3]));
        amplitudes.push(Complex::new(f[4], f[5]));
        flags.push(match v[7] {
            "0" => false,
            "1" => true,
            x => return Err(rec.err(line, format!("flag must be 0 or 1, got `{x}`"))),
        });
    }
    let res = DmdResult { modes, lambdas, omegas, amplitudes, dt, t0, window_len, svd_rank, dropped_zero, singular_values };
    Ok((res, flags))
}

/// Rebuilds the tree written by [`export_tree`].
pub fn read_tree_export(dir: impl AsRef<Path>) -> Result<MrdmdTree<f64>> {
    let dir = dir.as_ref();
    let text = read_text(&dir.join(MANIFEST))?;
    let mut rec = Records::new(MANIFEST, &text)?;
    rec.version()?;
    let n_space = rec.one("n_space")?;
    let n_time = rec.one("n_time")?;
    let dt = rec.one("dt")?;
    let global_t0 = rec.one("global_t0")?;
    let global_t1 = rec.one("global_t1")?;
    let max_levels = rec.one("max_levels")?;
    let rho = rec.one("rho")?;
    let (line, v) = rec.next("rank_policy")?;
    let policies = parse_rank_policies(v.first().copied().unwrap_or(""))
        .map_err(|e| rec.err(line, e.to_string()))?;
    let config = MrdmdConfig::new(max_levels)
        .with_rho(rho)
        .with_rank_policies(policies)
        .with_sampling(rec.one("sampling")?)
        .with_min_bin_snapshots(rec.one("min_bin_snapshots")?)
        .with_slow_metric(rec.one("slow_metric")?);
    config.validate()?;
    let count: usize = rec.one("nodes")?;
    let mut records = BTreeMap::new();
    for _ in 0..count {
        let (line, v) = rec.next("node")?;
        if v.len() != 3 {
            return Err(rec.err(line, "node line needs `level bin file`".into()));
        }
        let key: (usize, usize) = (rec.parse(line, v[0])?, rec.parse(line, v[1])?);
        let file = v[2];
        if file.contains(['/', '\\']) || file != format!("{}.txt", node_stem(key.0, key.1)) {
            return Err(rec.err(line, format!("unexpected node file name `{file}`")));
        }
        let node = read_node(dir, file, n_space, dt)?;
        if (node.0.level, node.0.bin) != key {
            return Err(rec.err(line, format!("{file} describes node ({}, {})", node.0.level, node.0.bin)));
        }
        if records.insert(key, node).is_some() {
            return Err(rec.err(line, format!("duplicate node ({}, {})", key.0, key.1)));
        }
    }
    rec.finish()?;
    let root = assemble(&mut records, 1, 1)?;
    if let Some((l, b)) = records.keys().next() {
        return Err(FormatError::Record {
            file: MANIFEST.into(),
            line: 0,
            message: format!("node ({l}, {b}) is not reachable from the root"),
        }
        .into());
    }
    Ok(MrdmdTree { root, config, n_space, n_time, global_t0, global_t1, dt })
}

fn assemble(
    records: &mut BTreeMap<(usize, usize), (MrdmdNode<f64>, usize)>,
    level: usize,
    bin: usize,
) -> Result<MrdmdNode<f64>> {
    let (mut node, n_children) = records.remove(&(level, bin)).ok_or_else(|| FormatError::Record {
        file: MANIFEST.into(),
        line: 0,
        message: format!("missing node ({level}, {bin})"),
    })?;
    if n_children == 2 {
        node.children = vec![assemble(records, level + 1, 2 * bin - 1)?, assemble(records, level + 1, 2 * bin)?];
    }
    Ok(node)
}

fn read_node(dir: &Path, file: &str, n_space: usize, tree_dt: f64) -> Result<(MrdmdNode<f64>, usize)> {
    let text = read_text(&dir.join(file))?;
    let mut rec = Records::new(file, &text)?;
    let level = rec.one("level")?;
    let bin = rec.one("bin")?;
    let start_index = rec.one("start_index")?;
    let len = rec.one("len")?;
    let t_start = rec.one("t_start")?;
    let t_end = rec.one("t_end")?;
    let truncated = rec.flag("truncated")?;
    let (line, v) = rec.next("children")?;
    let children: usize = rec.parse(line, v.first().copied().unwrap_or(""))?;
    if children != 0 && children != 2 {
        return Err(rec.err(line, format!("a node has 0 or 2 children, not {children}")));
    }
    let (_, d) = rec.next("diagnostic")?;
    let diagnostic = match d.join(" ") {
        s if s == "-" => None,
        s => Some(s),
    };
    let (spectrum, retained) = if rec.flag("fit")? {
        let stem = file.trim_end_matches(".txt");
        let modes = decode_modes(&read_file(&dir.join(format!("{stem}.modes")))?)?;
        let (r, flags) = read_fit_block(&mut rec, modes, n_space)?;
        let idx = flags.iter().enumerate().filter(|(_, &f)| f).map(|(k, _)| k).collect();
        (Some(r), idx)
    } else {
        (None, Vec::new())
    };
    rec.finish()?;
    let slow_modes = match &spectrum {
        Some(r) => r.select(&retained),
        None => DmdResult::empty(n_space, tree_dt, t_start, len),
    };
    let node = MrdmdNode {
        level,
        bin,
        start_index,
        len,
        t_start,
        t_end,
        spectrum,
        retained,
        slow_modes,
        diagnostic,
        truncated,
        children: Vec::new(),
    };
    Ok((node, children))
}

fn kv(s: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(s, "{key} {value}");
}

fn fmt_f(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_c(z: Complex<f64>) -> String {
    format!("{:e} {:e}", z.re, z.im)
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?).map_err(|_| {
        FormatError::Record {
            file: path.display().to_string(),
            line: 0,
            message: "not valid UTF-8".into(),
        }
        .into()
    })
}

/// Strictly ordered `key value...` lines.
struct Records<'a> {
    file: &'a str,
    lines: Vec<(usize, &'a str, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Records<'a> {
    fn new(file: &'a str, text: &'a str) -> Result<Self> {
        let lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| {
                let mut it = l.split_whitespace();
                let key = it.next().unwrap_or("");
                (i + 1, key, it.collect())
            })
            .collect();
        Ok(Self { file, lines, pos: 0 })
    }

    fn err(&self, line: usize, message: String) -> Error {
        FormatError::Record { file: self.file.to_string(), line, message }.into()
    }

    fn next(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.lines.get(self.pos) {
            Some((line, k, v)) if *k == key => {
                self.pos += 1;
                Ok((*line, v.clone()))
            }
            Some((line, k, _)) => Err(self.err(*line, format!("expected `{key}`, found `{k}`"))),
            None => {
                let last = self.lines.last().map_or(0, |l| l.0);
                Err(self.err(last, format!("unexpected end of file, expected `{key}`")))
            }
        }
    }

    fn parse<T: FromStr>(&self, line: usize, v: &str) -> Result<T> {
        v.parse().map_err(|_| self.err(line, format!("cannot parse `{v}`")))
    }

    /// A line with exactly one value.
    fn one<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, v) = self.next(key)?;
        if v.len() != 1 {
            return Err(self.err(line, format!("`{key}` takes one value, found {}", v.len())));
        }
        self.parse(line, v[0])
    }

    fn flag(&mut self, key: &str) -> Result<bool> {
        let (line, v) = self.next(key)?;
        match v.as_slice() {
            ["0"] => Ok(false),
            ["1"] => Ok(true),
            _ => Err(self.err(line, format!("`{key}` must be 0 or 1"))),
        }
    }

    fn version(&mut self) -> Result<()> {
        let (line, v) = self.next("format")?;
        match v.as_slice() {
            [x] if *x == FORMAT_VERSION.to_string() => Ok(()),
            _ => Err(self.err(line, format!("unsupported format version `{}`", v.join(" ")))),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            None => Ok(()),
            Some((line, k, _)) => Err(self.err(*line, format!("unexpected trailing `{k}`"))),
        }
    }
}
