//! `FFM v1` text files and multi-frequency dataset directories.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::FarFieldMatrix;
use crate::geometry::DirectionGrid;
use crate::linalg::CMatrix;
use crate::{Error, Result, C64};

pub const MANIFEST: &str = "manifest.csv";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse { path: path.to_path_buf(), message: format!("line {line}: {msg}") }
}

/// Serializes a far-field matrix with 17 significant digits per float.
pub fn format_ffm(f: &FarFieldMatrix) -> String {
    let n = f.grid().len();
    let mut s = String::with_capacity(48 * n * n + 32);
    s.push_str("FFM v1\n");
    let _ = writeln!(s, "k={:.16e} N={n}", f.k());
    for q in 0..n {
        for p in 0..n {
            let z = f.entries()[(q, p)];
            let _ = writeln!(s, "{:.16e} {:.16e}", z.re, z.im);
        }
    }
    s
}

pub fn write_ffm(path: impl AsRef<Path>, f: &FarFieldMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_ffm(f)).map_err(io_err(path))
}

pub fn read_ffm(path: impl AsRef<Path>) -> Result<FarFieldMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("FFM v1") {
        return Err(parse_err(path, 1, "expected header `FFM v1`"));
    }
    let header = lines.next().ok_or_else(|| parse_err(path, 2, "missing `k=... N=...` line"))?;
    let mut k = None;
    let mut n = None;
    for tok in header.split_whitespace() {
        match tok.split_once('=') {
            Some(("k", v)) => k = v.parse::<f64>().ok(),
            Some(("N", v)) => n = v.parse::<usize>().ok(),
            _ => return Err(parse_err(path, 2, format!("unexpected token `{tok}`"))),
        }
    }
    let (k, n) = match (k, n) {
        (Some(k), Some(n)) => (k, n),
        _ => return Err(parse_err(path, 2, "expected `k=<float> N=<int>`")),
    };
    let grid = DirectionGrid::new(n)?;
    let mut entries = CMatrix::zeros(n, n);
    let mut count = 0;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 3;
        if line.trim().is_empty() {
            continue;
        }
        if count >= n * n {
            return Err(parse_err(path, line_no, "too many entries"));
        }
        let mut it = line.split_whitespace();
        let re = it.next().and_then(|v| v.parse::<f64>().ok());
        let im = it.next().and_then(|v| v.parse::<f64>().ok());
        match (re, im, it.next()) {
            (Some(re), Some(im), None) => entries[(count / n, count % n)] = C64::new(re, im),
            _ => return Err(parse_err(path, line_no, "expected `re im`")),
        }
        count += 1;
    }
    if count != n * n {
        return Err(parse_err(path, count + 2, format!("expected {} entries, found {count}", n * n)));
    }
    FarFieldMatrix::new(k, grid, entries)
}

/// One line of a dataset manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub index: usize,
    pub k: f64,
    pub file: String,
}

/// Writes `ffm_XXXX.txt` files plus `manifest.csv`; returns the written paths.
pub fn write_dataset(dir: impl AsRef<Path>, data: &[FarFieldMatrix]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = String::from("index,k,file\n");
    let mut written = Vec::with_capacity(data.len() + 1);
    for (i, f) in data.iter().enumerate() {
        let name = format!("ffm_{i:04}.txt");
        let path = dir.join(&name);
        write_ffm(&path, f)?;
        let _ = writeln!(manifest, "{i},{:.16e},{name}", f.k());
        written.push(path);
    }
    let mpath = dir.join(MANIFEST);
    fs::write(&mpath, manifest).map_err(io_err(&mpath))?;
    written.push(mpath);
    Ok(written)
}

/// Reads a dataset directory in manifest order.
pub fn read_dataset(dir: impl AsRef<Path>) -> Result<Vec<FarFieldMatrix>> {
    let dir = dir.as_ref();
    let mpath = dir.join(MANIFEST);
    let text = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != "index,k,file" {
                return Err(parse_err(&mpath, 1, "expected header `index,k,file`"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let parsed = match cols.as_slice() {
            [i, k, f] => i.parse::<usize>().ok().zip(k.parse::<f64>().ok()).map(|(i, k)| DatasetEntry {
                index: i,
                k,
                file: f.trim().to_string(),
            }),
            _ => None,
        };
        entries.push(parsed.ok_or_else(|| parse_err(&mpath, idx + 1, "expected `index,k,file`"))?);
    }
    entries.sort_by_key(|e| e.index);
    entries
        .iter()
        .map(|e| {
            let f = read_ffm(dir.join(&e.file))?;
            if (f.k() - e.k).abs() > 1e-12 * e.k.abs() {
                return Err(Error::Parse {
                    path: mpath.clone(),
                    message: format!("manifest k={} disagrees with {} (k={})", e.k, e.file, f.k()),
                });
            }
            Ok(f)
        })
        .collect()
}
