//! Factorization-method map from the spectral decomposition of `F#`.

use std::f64::consts::PI;

use crate::diskbg::point_source_far_field;
use crate::forward::FarFieldMatrix;
use crate::geometry::{DirectionGrid, FmTest, Point};
use crate::glsm::{sharp_operator, SharpSource};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::{Result, C64};

use super::{IndicatorGrid, IndicatorKind};

/// Smallest relative cutoff, used when the noise level is zero.
pub const CUTOFF_FLOOR: f64 = 1e-12;

/// Retained eigenpairs of `F#`.
#[derive(Debug, Clone)]
pub struct FmSetup {
    k: f64,
    grid: DirectionGrid,
    values: Vec<f64>,
    vectors: CMatrix,
    test: FmTest,
    orientations: usize,
}

impl FmSetup {
    /// Eigenvalues below `max(delta, 1e-12) * ||F#||` are discarded and the
    /// rest are divided by `||F#||`, so the map is invariant under positive
    /// scaling of `F`.
    pub fn new(f: &FarFieldMatrix, delta: f64, test: FmTest, orientations: usize) -> Result<Self> {
        let sharp = sharp_operator(f, SharpSource::Measured)?;
        let (vals, vecs) = hermitian_eigen(sharp.matrix());
        let cut = delta.max(CUTOFF_FLOOR) * sharp.norm();
        let keep: Vec<usize> = (0..vals.len()).filter(|&j| vals[j] > cut && vals[j] > 0.0).collect();
        let n = vals.len();
        let vectors = CMatrix::from_fn(n, keep.len(), |r, c| vecs[(r, keep[c])]);
        let values = keep.iter().map(|&j| vals[j] / sharp.norm()).collect();
        Ok(Self { k: f.k(), grid: f.grid(), values, vectors, test, orientations: orientations.max(1) })
    }

    /// Nothing survived the cutoff; the map is zero.
    pub fn is_degenerate(&self) -> bool {
        self.values.is_empty()
    }

    pub fn retained(&self) -> usize {
        self.values.len()
    }

    /// `1 / sum_j |<phi, psi_j>|^2 / lambda_j`, zero for an empty sum.
    fn picard(&self, phi: &CVector) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let w = self.grid.weight();
        let c = self.vectors.adjoint() * phi;
        let s: f64 = c.iter().zip(&self.values).map(|(c, l)| c.norm_sqr() * w / l).sum();
        if s > 0.0 {
            1.0 / s
        } else {
            0.0
        }
    }

    pub fn value(&self, z: Point) -> f64 {
        let phi = point_source_far_field(z, self.k, &self.grid);
        match self.test {
            FmTest::Monopole => self.picard(&phi),
            FmTest::Dipole => (0..self.orientations)
                .map(|j| {
                    let a = j as f64 * PI / self.orientations as f64;
                    let nu = Point::new(a.cos(), a.sin());
                    let d = CVector::from_iterator(
                        phi.len(),
                        phi.iter()
                            .enumerate()
                            .map(|(q, p)| C64::new(0.0, -self.k * self.grid.direction(q).dot(&nu)) * p),
                    );
                    self.picard(&d)
                })
                .fold(0.0, f64::max),
        }
    }
}

/// FM map over `points`; flagged when every eigenvalue fell below the cutoff.
pub fn fm_indicator(
    f: &FarFieldMatrix,
    points: &[Point],
    delta: f64,
    test: FmTest,
    orientations: usize,
) -> Result<IndicatorGrid> {
    let setup = FmSetup::new(f, delta, test, orientations)?;
    let values = points.iter().map(|&z| setup.value(z)).collect();
    IndicatorGrid::new(IndicatorKind::Fm, points.to_vec(), values, setup.is_degenerate())
}
