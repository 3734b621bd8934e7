//! Grayscale PGM (`P5`) rendering of spatial fields.

use std::path::Path;

use num_complex::Complex;

use super::{write_file, FormatError};
use crate::error::{Error, Result};
use crate::scenarios::Grid;

/// Binary PGM of the real part of `field`, row `iy = 0` first. Values map
/// linearly from [min, max] onto [0, 255]; a constant field is mid-gray.
pub fn render_pgm(field: &[Complex<f64>], grid: Grid) -> Result<Vec<u8>> {
    if grid.nx.checked_mul(grid.ny) != Some(field.len()) {
        return Err(FormatError::GridMismatch { n_space: field.len(), ny: grid.ny, nx: grid.nx }.into());
    }
    if field.iter().any(|z| !z.re.is_finite()) {
        return Err(Error::InvalidInput("cannot render a non-finite field".into()));
    }
    let (lo, hi) = field
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
    // Ranges at roundoff level are treated as constant rather than
    // stretching noise over the full gray scale.
    let scale = lo.abs().max(hi.abs());
    let flat = hi - lo <= 64.0 * f64::EPSILON * scale;
    let mut out = format!("P5 {} {} 255\n", grid.nx, grid.ny).into_bytes();
    out.extend(field.iter().map(|z| {
        if flat {
            128
        } else {
            ((z.re - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
        }
    }));
    Ok(out)
}

pub fn export_mode_image(field: &[Complex<f64>], grid: Grid, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &render_pgm(field, grid)?)
}
