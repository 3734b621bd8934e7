//! CSV ingestion: one row per spatial point, one column per snapshot.

use std::path::Path;

use super::{read_file, FormatError};
use crate::dmd::SnapshotMatrix;
use crate::error::Result;
use crate::numerics::Matrix;

/// Parsed CSV snapshots. Missing (`NaN`) cells are zero-filled in
/// `snapshots` and flagged in `mask`, so the grid geometry is preserved.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvSnapshots {
    pub snapshots: SnapshotMatrix<f64>,
    /// Column-major like the data; `true` where the cell was `NaN`.
    pub mask: Vec<bool>,
}

impl CsvSnapshots {
    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.snapshots.n_space() + i]
    }

    pub fn missing_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

pub fn read_csv_snapshots(path: impl AsRef<Path>, dt: f64, t0: f64) -> Result<CsvSnapshots> {
    parse_csv_snapshots(&read_file(path.as_ref())?, dt, t0)
}

pub fn parse_csv_snapshots(bytes: &[u8], dt: f64, t0: f64) -> Result<CsvSnapshots> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FormatError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(rows.len() as u64 + 1, |p| p.line());
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(FormatError::Csv {
                line,
                message: format!("ragged row: {} fields, expected {w}", rec.len()),
            }
            .into());
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| parse_cell(cell).ok_or_else(|| FormatError::Csv {
                line,
                message: format!("column {}: `{cell}` is not a number", c + 1),
            }))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    let m = width.unwrap_or(0);
    if n == 0 || m == 0 {
        return Err(FormatError::Csv { line: 1, message: "no data".into() }.into());
    }
    let mut mask = vec![false; n * m];
    let data = Matrix::from_fn(n, m, |i, j| {
        let v = rows[i][j];
        if v.is_nan() {
            mask[j * n + i] = true;
            0.0
        } else {
            v
        }
    });
    Ok(CsvSnapshots { snapshots: SnapshotMatrix::new(data, dt, t0)?, mask })
}

/// Finite numbers, or `NaN` (any case) for a missing value.
fn parse_cell(cell: &str) -> Option<f64> {
    if cell.eq_ignore_ascii_case("nan") {
        return Some(f64::NAN);
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}
