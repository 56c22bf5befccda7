//! Imaging maps: the multi-frequency eigenvalue indicator, the fixed-frequency
//! differential indicators and the factorization map.

mod dlsm;
mod export;
mod fm;
mod rte;

pub use dlsm::{dlsm_grids, dlsm_indicator, dlsm_indicator_im, dlsm_values, flux_discrepancy, DlsmSetup, DlsmValues};
pub use export::{
    curve_csv, grid_csv, grid_pgm, sidecar_path, write_curve_csv, write_grid_csv, write_grid_pgm, PgmRange,
};
pub use fm::{fm_indicator, FmSetup};
pub use rte::{
    average_neighbors, detect_peaks, disk_distance, eigen_curve, grid_from_distances, rte_indicator, spectrum_distance,
    BandData, BandEntry, DiskDistance, EigenCurve, SpectrumDistance,
};

use std::f64::consts::PI;

use crate::geometry::{ArtificialDisk, Point};
use crate::{Error, Result};

/// Interior sampling rule: the center plus two rings of four points, the
/// outer ring rotated by `pi/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZRule {
    pub inner: f64,
    pub outer: f64,
}

impl Default for ZRule {
    fn default() -> Self {
        Self { inner: 0.3, outer: 0.7 }
    }
}

impl ZRule {
    pub fn points(&self, disk: &ArtificialDisk) -> Vec<Point> {
        let mut out = vec![disk.center];
        for (r, shift) in [(self.inner, 0.0), (self.outer, PI / 4.0)] {
            for j in 0..4 {
                let a = shift + j as f64 * PI / 2.0;
                out.push(disk.center + r * disk.radius * Point::new(a.cos(), a.sin()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndicatorKind {
    Rte,
    Dlsm,
    DlsmIm,
    Fm,
}

impl IndicatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            IndicatorKind::Rte => "rte",
            IndicatorKind::Dlsm => "dlsm",
            IndicatorKind::DlsmIm => "dlsm_im",
            IndicatorKind::Fm => "fm",
        }
    }
}

/// One nonnegative value per sampling point.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorGrid {
    pub kind: IndicatorKind,
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    /// Some value relied on a fallback convention.
    pub flagged: bool,
}

impl IndicatorGrid {
    pub fn new(kind: IndicatorKind, points: Vec<Point>, values: Vec<f64>, flagged: bool) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Dimension(format!("{} points with {} values", points.len(), values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Numerical(format!("{} indicator value {v} is not finite and nonnegative", kind.name())));
        }
        Ok(Self { kind, points, values, flagged })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}

/// Fixed-order mean, `0` for an empty slice.
pub(crate) fn ordered_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut s = 0.0;
    for v in values {
        s += v;
    }
    s / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_rule_layout() {
        let d = ArtificialDisk::new(Point::new(1.0, -1.0), 0.5).unwrap();
        let pts = ZRule::default().points(&d);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], d.center);
        for p in &pts[1..5] {
            assert!(((p - d.center).norm() - 0.15).abs() < 1e-14);
        }
        for p in &pts[5..] {
            assert!(((p - d.center).norm() - 0.35).abs() < 1e-14);
        }
        let s: Point = pts.iter().fold(Point::zeros(), |a, p| a + (p - d.center));
        assert!(s.norm() < 1e-14);
    }

    #[test]
    fn grid_rejects_negative() {
        assert!(IndicatorGrid::new(IndicatorKind::Fm, vec![Point::zeros()], vec![-1.0], false).is_err());
        assert!(IndicatorGrid::new(IndicatorKind::Fm, vec![Point::zeros()], vec![], false).is_err());
    }
}
