//! Fixed-frequency differential indicators `J(t)` and `J~(t)`.

use crate::diskbg::{interior_reference_flux, near_eigenvalue, BoundaryTrace, FluxOperator};
use crate::forward::FarFieldMatrix;
use crate::geometry::{ArtificialDisk, Point};
use crate::{Error, Result};

use super::rte::BandEntry;
use super::{ordered_mean, IndicatorGrid, IndicatorKind, ZRule};

/// Sobolev index of the flux norm.
const FLUX_INDEX: f64 = -0.5;

/// Data shared by every disk center at one `(k, rho)`.
#[derive(Debug, Clone)]
pub struct DlsmSetup {
    entry: BandEntry,
    flux: FluxOperator,
    rho: f64,
    pub z_rule: ZRule,
}

/// `J` and `J~` at one disk center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlsmValues {
    pub j: f64,
    pub j_im: f64,
    /// Some GLSM solve fell back to a bracket endpoint or least squares.
    pub flagged: bool,
}

/// Squared norms `(||Re h - r||^2, ||Im h||^2)` for a flux `h` and a real reference `r`.
pub fn flux_discrepancy(h: &BoundaryTrace, reference: &BoundaryTrace) -> Result<(f64, f64)> {
    let re = h.real_part().sub(reference)?;
    Ok((re.sobolev_norm_squared(FLUX_INDEX), h.imag_part().sobolev_norm_squared(FLUX_INDEX)))
}

impl DlsmSetup {
    /// Rejects `k` within tolerance of a Dirichlet eigenvalue of the disk.
    pub fn new(f: &FarFieldMatrix, rho: f64, delta: f64, z_rule: ZRule) -> Result<Self> {
        let k = f.k();
        if let Some(e) = near_eigenvalue(rho, k) {
            return Err(Error::NearEigenvalue { k, eigen: e.k, order: e.order });
        }
        Ok(Self {
            entry: BandEntry::new(f.clone(), rho, delta)?,
            flux: FluxOperator::new(rho, k, &f.grid()),
            rho,
            z_rule,
        })
    }

    pub fn k(&self) -> f64 {
        self.entry.k()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Both indicators for the disk centered at `t`. Per sample `z` the
    /// values are `sqrt(a + b)` and `sqrt(b)` with `b = ||Im h||^2`, so
    /// `J~ <= J` holds in floating point as well.
    pub fn values(&self, t: Point) -> Result<DlsmValues> {
        let disk = ArtificialDisk::new(t, self.rho)?;
        let grid = self.entry.f.grid();
        let problem = self.entry.problem(t)?;
        let mut j = Vec::new();
        let mut j_im = Vec::new();
        let mut flagged = false;
        for z in self.z_rule.points(&disk) {
            let sol = problem.solve_point(z);
            flagged |= sol.flagged;
            let h = self.flux.apply(t, &sol.g, &grid)?;
            let r = interior_reference_flux(&disk, self.k(), z)?;
            let (a, b) = flux_discrepancy(&h, &r)?;
            j.push((a + b).sqrt());
            j_im.push(b.sqrt());
        }
        Ok(DlsmValues { j: ordered_mean(&j), j_im: ordered_mean(&j_im), flagged })
    }
}

pub fn dlsm_values(t: Point, rho: f64, f: &FarFieldMatrix, delta: f64, z_rule: ZRule) -> Result<DlsmValues> {
    DlsmSetup::new(f, rho, delta, z_rule)?.values(t)
}

/// `J(t)`: mean over `z` of `||H g_z - d_nu(w_z - Phi_z)||` in `H^{-1/2}`.
pub fn dlsm_indicator(t: Point, rho: f64, f: &FarFieldMatrix, delta: f64, z_rule: ZRule) -> Result<f64> {
    Ok(dlsm_values(t, rho, f, delta, z_rule)?.j)
}

/// `J~(t)`: mean over `z` of `||Im H g_z||` in `H^{-1/2}`.
pub fn dlsm_indicator_im(t: Point, rho: f64, f: &FarFieldMatrix, delta: f64, z_rule: ZRule) -> Result<f64> {
    Ok(dlsm_values(t, rho, f, delta, z_rule)?.j_im)
}

/// Builds the `J` and `J~` grids from per-point values.
pub fn dlsm_grids(points: &[Point], values: &[DlsmValues]) -> Result<(IndicatorGrid, IndicatorGrid)> {
    let flagged = values.iter().any(|v| v.flagged);
    Ok((
        IndicatorGrid::new(IndicatorKind::Dlsm, points.to_vec(), values.iter().map(|v| v.j).collect(), flagged)?,
        IndicatorGrid::new(IndicatorKind::DlsmIm, points.to_vec(), values.iter().map(|v| v.j_im).collect(), flagged)?,
    ))
}
