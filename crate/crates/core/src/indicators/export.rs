//! CSV and PGM writers for indicator maps and eigen-curves.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::{Error, Result};

use super::rte::EigenCurve;
use super::IndicatorGrid;

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// `x,y,value` rows in point order.
pub fn grid_csv(grid: &IndicatorGrid) -> String {
    let mut s = String::from("x,y,value\n");
    for (p, v) in grid.points.iter().zip(&grid.values) {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", p.x, p.y, v);
    }
    s
}

pub fn write_grid_csv(path: impl AsRef<Path>, grid: &IndicatorGrid) -> Result<()> {
    write_file(path.as_ref(), grid_csv(grid).as_bytes())
}

/// Normalization constants of an 8-bit image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmRange {
    pub min: f64,
    pub max: f64,
}

impl PgmRange {
    pub fn sidecar(&self) -> String {
        format!("min={:.16e}\nmax={:.16e}\n", self.min, self.max)
    }
}

/// Binary PGM of a grid whose points are row-major with `x` fastest and `y`
/// increasing; the image is flipped so that `y` points up. A constant map
/// is drawn black.
pub fn grid_pgm(grid: &IndicatorGrid, shape: (usize, usize)) -> Result<(Vec<u8>, PgmRange)> {
    let (nx, ny) = shape;
    if nx * ny != grid.values.len() {
        return Err(Error::Dimension(format!("{}x{} image for {} values", nx, ny, grid.values.len())));
    }
    let min = grid.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = grid.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = if grid.values.is_empty() { PgmRange { min: 0.0, max: 0.0 } } else { PgmRange { min, max } };
    let span = range.max - range.min;
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for row in (0..ny).rev() {
        for col in 0..nx {
            let v = grid.values[row * nx + col];
            let level = if span > 0.0 { ((v - range.min) / span * 255.0).round() } else { 0.0 };
            out.push(level.clamp(0.0, 255.0) as u8);
        }
    }
    Ok((out, range))
}

/// Path of the normalization sidecar written next to an image.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".range");
    PathBuf::from(s)
}

/// Writes the image and its `.range` sidecar.
pub fn write_grid_pgm(path: impl AsRef<Path>, grid: &IndicatorGrid, shape: (usize, usize)) -> Result<PgmRange> {
    let path = path.as_ref();
    let (bytes, range) = grid_pgm(grid, shape)?;
    write_file(path, &bytes)?;
    write_file(&sidecar_path(path), range.sidecar().as_bytes())?;
    Ok(range)
}

/// `k,E` rows.
pub fn curve_csv(curve: &EigenCurve) -> String {
    let mut s = String::from("k,E\n");
    for (k, e) in &curve.samples {
        let _ = writeln!(s, "{k:.16e},{e:.16e}");
    }
    s
}

pub fn write_curve_csv(path: impl AsRef<Path>, curve: &EigenCurve) -> Result<()> {
    write_file(path.as_ref(), curve_csv(curve).as_bytes())
}
