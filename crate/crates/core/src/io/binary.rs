//! Fixed little-endian binary containers: snapshot matrices (`MRDMDSNP`) and
//! complex mode sets (`MRDMDMOD`).

use std::path::Path;

use num_complex::Complex;

use super::{read_file, write_file, FormatError};
use crate::dmd::SnapshotMatrix;
use crate::error::Result;
use crate::numerics::Matrix;
use crate::scenarios::Grid;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"MRDMDSNP";
pub const MODES_MAGIC: &[u8; 8] = b"MRDMDMOD";
pub const VERSION: u16 = 1;
/// magic, version, n_space, m_time, dt, t0, grid_ny, grid_nx.
pub const SNAPSHOT_HEADER_LEN: usize = 8 + 2 + 6 * 8;
const MODES_HEADER_LEN: usize = 8 + 2 + 2 * 8;

/// Snapshot matrix plus the grid it lives on, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub snapshots: SnapshotMatrix<f64>,
    pub grid: Option<Grid>,
}

pub fn encode_snapshots(x: &SnapshotMatrix<f64>, grid: Option<Grid>) -> Result<Vec<u8>> {
    let n = x.n_space();
    if let Some(g) = grid {
        check_grid(n, g)?;
    }
    let (ny, nx) = grid.map_or((0, 0), |g| (g.ny, g.nx));
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 8 * x.data().as_slice().len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [n, x.n_time()] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&x.dt().to_le_bytes());
    out.extend_from_slice(&x.t0().to_le_bytes());
    for v in [ny, nx] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for v in x.data().as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_snapshots(bytes: &[u8]) -> Result<SnapshotFile> {
    let mut r = Reader::new(bytes, SNAPSHOT_MAGIC, SNAPSHOT_HEADER_LEN)?;
    let n = r.size()?;
    let m = r.size()?;
    let dt = r.f64();
    let t0 = r.f64();
    let ny = r.size()?;
    let nx = r.size()?;
    let grid = match (ny, nx) {
        (0, 0) => None,
        _ => {
            let g = Grid { nx, ny };
            check_grid(n, g)?;
            Some(g)
        }
    };
    let values = r.payload(n, m, 1)?;
    let data = Matrix::from_col_major(n, m, values)?;
    Ok(SnapshotFile { snapshots: SnapshotMatrix::new(data, dt, t0)?, grid })
}

pub fn write_snapshots(x: &SnapshotMatrix<f64>, grid: Option<Grid>, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_snapshots(x, grid)?)
}

pub fn read_snapshots(path: impl AsRef<Path>) -> Result<SnapshotFile> {
    decode_snapshots(&read_file(path.as_ref())?)
}

pub fn encode_modes(modes: &Matrix<Complex<f64>>) -> Vec<u8> {
    let mut out = Vec::with_capacity(MODES_HEADER_LEN + 16 * modes.as_slice().len());
    out.extend_from_slice(MODES_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [modes.rows(), modes.cols()] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for z in modes.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_modes(bytes: &[u8]) -> Result<Matrix<Complex<f64>>> {
    let mut r = Reader::new(bytes, MODES_MAGIC, MODES_HEADER_LEN)?;
    let rows = r.size()?;
    let cols = r.size()?;
    let v = r.payload(rows, cols, 2)?;
    if cols == 0 {
        return Ok(Matrix::zeros(rows, 0));
    }
    let data = v.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect();
    Matrix::from_col_major(rows, cols, data)
}

fn check_grid(n_space: usize, g: Grid) -> Result<()> {
    if g.nx.checked_mul(g.ny) != Some(n_space) {
        return Err(FormatError::GridMismatch { n_space, ny: g.ny, nx: g.nx }.into());
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Checks length, magic and version, leaving the cursor after them.
    fn new(bytes: &'a [u8], magic: &[u8; 8], header_len: usize) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..8] != magic {
            let found = &bytes[..bytes.len().min(8)];
            return Err(FormatError::BadMagic {
                expected: String::from_utf8_lossy(magic).into_owned(),
                found: String::from_utf8_lossy(found).into_owned(),
            }
            .into());
        }
        if bytes.len() < header_len {
            return Err(truncated(header_len as u64, bytes.len()));
        }
        let version = u16::from_le_bytes([bytes[8], bytes[9]]);
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion { expected: VERSION, found: version }.into());
        }
        Ok(Self { bytes, pos: 10 })
    }

    fn take8(&mut self) -> [u8; 8] {
        let b = self.bytes[self.pos..self.pos + 8].try_into().expect("header length checked");
        self.pos += 8;
        b
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take8())
    }

    fn size(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take8());
        usize::try_from(v).map_err(|_| FormatError::BadHeader(format!("dimension {v} too large")).into())
    }

    /// `rows * cols * per_entry` f64 values filling the rest of the file.
    fn payload(&mut self, rows: usize, cols: usize, per_entry: usize) -> Result<Vec<f64>> {
        let count = rows
            .checked_mul(cols)
            .and_then(|c| c.checked_mul(per_entry))
            .filter(|c| c.checked_mul(8).is_some())
            .ok_or_else(|| FormatError::BadHeader(format!("dimensions {rows}x{cols} overflow")))?;
        let rest = &self.bytes[self.pos..];
        let need = count * 8;
        if rest.len() < need {
            return Err(truncated((self.pos + need) as u64, self.bytes.len()));
        }
        if rest.len() > need {
            return Err(FormatError::TrailingBytes { extra: (rest.len() - need) as u64 }.into());
        }
        Ok(rest
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}

fn truncated(expected: u64, found: usize) -> crate::Error {
    FormatError::Truncated { expected, found: found as u64 }.into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn sample() -> SnapshotMatrix<f64> {
        let data = Matrix::from_fn(10, 5, |i, j| ((i * 7 + j * 3) as f64).sin() * 1e3 + 1.0 / (1.0 + j as f64));
        SnapshotMatrix::new(data, 0.25, -3.5).unwrap()
    }

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let x = sample();
        let bytes = encode_snapshots(&x, Some(Grid { nx: 5, ny: 2 })).unwrap();
        assert_eq!(bytes.len(), SNAPSHOT_HEADER_LEN + 400);
        assert_eq!(SNAPSHOT_HEADER_LEN, 58);
        let back = decode_snapshots(&bytes).unwrap();
        assert_eq!(back.grid, Some(Grid { nx: 5, ny: 2 }));
        let a: Vec<u64> = x.data().as_slice().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = back.snapshots.data().as_slice().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
        assert_eq!(back.snapshots.dt().to_bits(), 0.25f64.to_bits());
        assert_eq!(back.snapshots.t0(), -3.5);
        assert_eq!(decode_snapshots(&encode_snapshots(&x, None).unwrap()).unwrap().grid, None);
    }

    #[test]
    fn payload_is_column_major_little_endian() {
        let x = sample();
        let bytes = encode_snapshots(&x, None).unwrap();
        // Second snapshot, first point.
        let off = SNAPSHOT_HEADER_LEN + 10 * 8;
        assert_eq!(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()), x.data()[(0, 1)]);
    }

    #[test]
    fn malformed_files_are_distinct_errors() {
        let mut bytes = encode_snapshots(&sample(), None).unwrap();
        let mut bad = bytes.clone();
        bad[..8].copy_from_slice(b"XXXXXXXX");
        assert!(matches!(decode_snapshots(&bad), Err(Error::Format(FormatError::BadMagic { .. }))));

        let mut bad = bytes.clone();
        bad[8] = 2;
        assert!(matches!(
            decode_snapshots(&bad),
            Err(Error::Format(FormatError::UnsupportedVersion { found: 2, .. }))
        ));

        let short = &bytes[..bytes.len() - 8];
        assert!(matches!(decode_snapshots(short), Err(Error::Format(FormatError::Truncated { .. }))));
        assert!(matches!(
            decode_snapshots(&bytes[..20]),
            Err(Error::Format(FormatError::Truncated { .. }))
        ));

        bytes.push(0);
        assert!(matches!(
            decode_snapshots(&bytes),
            Err(Error::Format(FormatError::TrailingBytes { extra: 1 }))
        ));
    }

    #[test]
    fn grid_must_cover_the_points() {
        assert!(matches!(
            encode_snapshots(&sample(), Some(Grid { nx: 3, ny: 3 })),
            Err(Error::Format(FormatError::GridMismatch { .. }))
        ));
        let mut bytes = encode_snapshots(&sample(), None).unwrap();
        bytes[42..50].copy_from_slice(&3u64.to_le_bytes());
        bytes[50..58].copy_from_slice(&3u64.to_le_bytes());
        assert!(matches!(
            decode_snapshots(&bytes),
            Err(Error::Format(FormatError::GridMismatch { .. }))
        ));
    }

    #[test]
    fn modes_round_trip() {
        let m = Matrix::from_fn(4, 3, |i, j| Complex::new(i as f64 - 0.5, -(j as f64) * 1e-300));
        let back = decode_modes(&encode_modes(&m)).unwrap();
        assert_eq!(back, m);
        let empty = Matrix::<Complex<f64>>::zeros(4, 0);
        assert_eq!(decode_modes(&encode_modes(&empty)).unwrap().shape(), (4, 0));
        assert!(decode_modes(&encode_snapshots(&sample(), None).unwrap()).is_err());
    }
}
