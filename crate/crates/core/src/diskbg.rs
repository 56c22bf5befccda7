//! Closed-form quantities for a sound-soft disk `B(t, rho)`.
//!
//! Every series is truncated at `M = ceil(k rho + 6 (k rho)^{1/3} + 12)`.

use std::f64::consts::PI;

use crate::bessel::{bessel_j, bessel_j_seq, CylinderFunctions};
use crate::forward::FarFieldMatrix;
use crate::geometry::{ArtificialDisk, DirectionGrid, Point};
use crate::linalg::{CMatrix, CVector};
use crate::{Error, Result, C64};

/// Relative distance `|k - k_eig| / k` below which `k` counts as an eigenvalue.
pub const EIGEN_TOLERANCE: f64 = 1e-6;

pub fn truncation(k: f64, rho: f64) -> usize {
    let x = k * rho;
    (x + 6.0 * x.cbrt() + 12.0).ceil() as usize
}

/// Function on the disk boundary, `f(phi) = sum_{|m| <= M} f_m e^{i m phi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub disk: ArtificialDisk,
    /// Coefficients for `m = -M..=M`.
    coefficients: Vec<C64>,
}

impl BoundaryTrace {
    pub fn new(disk: ArtificialDisk, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len().is_multiple_of(2) {
            return Err(Error::Dimension("trace needs 2M+1 coefficients".into()));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical("trace has non-finite coefficients".into()));
        }
        Ok(Self { disk, coefficients })
    }

    pub fn zeros(disk: ArtificialDisk, m: usize) -> Self {
        Self { disk, coefficients: vec![C64::new(0.0, 0.0); 2 * m + 1] }
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn coefficient(&self, m: i64) -> C64 {
        let big_m = self.truncation() as i64;
        if m.abs() > big_m {
            C64::new(0.0, 0.0)
        } else {
            self.coefficients[(m + big_m) as usize]
        }
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    /// `(sum (1 + m^2)^s |f_m|^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_squared(s).sqrt()
    }

    pub fn sobolev_norm_squared(&self, s: f64) -> f64 {
        let big_m = self.truncation() as i64;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let m = (i as i64 - big_m) as f64;
                (1.0 + m * m).powf(s) * c.norm_sqr()
            })
            .sum::<f64>()
    }

    fn map_pairs(&self, f: impl Fn(C64, C64) -> C64) -> Self {
        let big_m = self.truncation() as i64;
        let coefficients = (-big_m..=big_m).map(|m| f(self.coefficient(m), self.coefficient(-m).conj())).collect();
        Self { disk: self.disk, coefficients }
    }

    /// Coefficients of the pointwise imaginary part.
    pub fn imag_part(&self) -> Self {
        self.map_pairs(|a, b| (a - b) / C64::new(0.0, 2.0))
    }

    /// Coefficients of the pointwise real part.
    pub fn real_part(&self) -> Self {
        self.map_pairs(|a, b| (a + b) * 0.5)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.truncation() != other.truncation() {
            return Err(Error::Dimension("traces with different truncations".into()));
        }
        let coefficients = self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a - b).collect();
        Ok(Self { disk: self.disk, coefficients })
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { disk: self.disk, coefficients: self.coefficients.iter().map(|z| z * c).collect() }
    }

    /// Value at polar angle `phi` around the disk center.
    pub fn evaluate(&self, phi: f64) -> C64 {
        let big_m = self.truncation() as i64;
        (-big_m..=big_m).map(|m| self.coefficient(m) * C64::new(0.0, m as f64 * phi).exp()).sum()
    }
}

/// Squared eigen-wavenumbers inside a band.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    values: Vec<f64>,
    band: (f64, f64),
}

impl SpectrumEstimate {
    /// Sorts `values`; every value must lie in the closed band (in `k^2`).
    pub fn new(mut values: Vec<f64>, band: (f64, f64)) -> Result<Self> {
        if !(band.0 <= band.1) {
            return Err(Error::Config(format!("invalid band [{}, {}]", band.0, band.1)));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= band.0 && **v <= band.1)) {
            return Err(Error::Numerical(format!("spectral value {v} outside band")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values, band })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
}

/// One Dirichlet eigenvalue of the disk: `k rho = j_{m, index}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskEigen {
    pub k: f64,
    pub order: usize,
    /// 1-based zero index.
    pub index: usize,
}

fn bisect_zero(m: usize, mut a: f64, mut b: f64) -> f64 {
    let order = m as i32;
    let mut fa = bessel_j(order, a);
    for _ in 0..200 {
        if b - a <= 1e-14 * b.max(1.0) {
            break;
        }
        let c = 0.5 * (a + b);
        let fc = bessel_j(order, c);
        if fc == 0.0 {
            return c;
        }
        if (fa < 0.0) == (fc < 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    0.5 * (a + b)
}

/// Zeros of `J_m` in `(0, x_max]`, in ascending order.
pub fn bessel_zeros(m: usize, x_max: f64) -> Vec<f64> {
    let step = PI / 4.0;
    let order = m as i32;
    let mut out = Vec::new();
    // j_{m,1} > m, and J_m(x) > 0 just after x = 0.
    let mut a = if m == 0 { 0.0 } else { m as f64 };
    let mut fa = bessel_j(order, a);
    while a < x_max {
        let b = (a + step).min(x_max);
        let fb = bessel_j(order, b);
        if fb == 0.0 {
            out.push(b);
        } else if fa != 0.0 && (fa < 0.0) != (fb < 0.0) {
            out.push(bisect_zero(m, a, b));
        }
        a = b;
        fa = fb;
    }
    out
}

/// Dirichlet eigen-wavenumbers of the disk with `k` in `[k_min, k_max]`,
/// one entry per `(m, zero)`; orders `m >= 1` appear once with multiplicity two.
pub fn disk_eigenvalues(rho: f64, k_min: f64, k_max: f64) -> Vec<DiskEigen> {
    let x_max = k_max * rho;
    let mut out = Vec::new();
    let mut m = 0;
    while (m as f64) < x_max {
        let zeros = bessel_zeros(m, x_max);
        if zeros.is_empty() {
            break;
        }
        for (i, &x) in zeros.iter().enumerate() {
            let k = x / rho;
            if k >= k_min && k <= k_max {
                out.push(DiskEigen { k, order: m, index: i + 1 });
            }
        }
        m += 1;
    }
    out.sort_by(|a, b| a.k.total_cmp(&b.k));
    out
}

/// `sigma_empty`: squared eigen-wavenumbers in the band, with multiplicity.
pub fn dirichlet_spectrum(disk: &ArtificialDisk, band: (f64, f64)) -> Result<SpectrumEstimate> {
    if !(band.0 > 0.0) || !(band.0 <= band.1) {
        return Err(Error::Config(format!("invalid band [{}, {}]", band.0, band.1)));
    }
    let mut values = Vec::new();
    for e in disk_eigenvalues(disk.radius, band.0, band.1) {
        let copies = if e.order == 0 { 1 } else { 2 };
        values.extend(std::iter::repeat_n(e.k * e.k, copies));
    }
    SpectrumEstimate::new(values, (band.0 * band.0, band.1 * band.1))
}

/// Closest disk eigen-wavenumber within the relative tolerance, if any.
pub fn near_eigenvalue(rho: f64, k: f64) -> Option<DiskEigen> {
    let tol = EIGEN_TOLERANCE * k;
    disk_eigenvalues(rho, k - tol, k + tol).into_iter().min_by(|a, b| (a.k - k).abs().total_cmp(&(b.k - k).abs()))
}

/// `e^{-i k t . theta_q}`, so that `F_t = D F_0 D*`.
pub fn translation_phases(k: f64, t: Point, grid: &DirectionGrid) -> CVector {
    CVector::from_iterator(grid.len(), (0..grid.len()).map(|q| C64::new(0.0, -k * t.dot(&grid.direction(q))).exp()))
}

/// `4 i J_m(k rho) / H_m(k rho)` for `m = -M..=M`.
fn disk_modes(k: f64, rho: f64) -> Vec<C64> {
    let big_m = truncation(k, rho);
    let cf = CylinderFunctions::new(big_m, k * rho);
    (-(big_m as i64)..=big_m as i64).map(|m| C64::new(0.0, 4.0) * cf.j_signed(m) / cf.h_signed(m)).collect()
}

/// Per-mode scattering coefficients `1 - 2 J_m / H_m`, `m = 0..=M`.
pub fn disk_mode_scattering(k: f64, rho: f64) -> Vec<C64> {
    let big_m = truncation(k, rho);
    let cf = CylinderFunctions::new(big_m, k * rho);
    (0..=big_m).map(|m| C64::new(1.0, 0.0) - cf.j[m] / cf.h[m] * 2.0).collect()
}

/// Far field of the disk for plane-wave incidence `exp(i k theta_p . x)`:
/// `e^{i k t.(theta_p - theta_q)} 4 i sum_m J_m / H_m e^{i m (theta_q - theta_p)}`.
pub fn disk_far_field(disk: &ArtificialDisk, k: f64, grid: DirectionGrid) -> Result<FarFieldMatrix> {
    if !(k > 0.0) {
        return Err(Error::Config(format!("wavenumber must be positive, got {k}")));
    }
    let modes = disk_modes(k, disk.radius);
    let big_m = (modes.len() / 2) as i64;
    let n = grid.len();
    // Circulant: entry depends on (q - p) mod N only.
    let kernel: Vec<C64> = (0..n)
        .map(|d| {
            let a = grid.angle(d);
            (-big_m..=big_m).map(|m| modes[(m + big_m) as usize] * C64::new(0.0, m as f64 * a).exp()).sum()
        })
        .collect();
    let phases = translation_phases(k, disk.center, &grid);
    let entries = CMatrix::from_fn(n, n, |q, p| kernel[(q + n - p) % n] * phases[q] * phases[p].conj());
    FarFieldMatrix::new(k, grid, entries)
}

/// `F^r_t = F^delta - F^b_t`.
pub fn relative_operator(f_delta: &FarFieldMatrix, f_b: &FarFieldMatrix) -> Result<FarFieldMatrix> {
    if !f_delta.same_setting(f_b) {
        return Err(Error::Dimension(format!(
            "relative operator of k = {} (N = {}) and k = {} (N = {})",
            f_delta.k(),
            f_delta.grid().len(),
            f_b.k(),
            f_b.grid().len()
        )));
    }
    FarFieldMatrix::new(f_delta.k(), f_delta.grid(), f_delta.entries() - f_b.entries())
}

/// Warns when `k` sits on a Dirichlet eigenvalue of the disk.
fn warn_near_eigen(disk: &ArtificialDisk, k: f64) {
    if let Some(e) = near_eigenvalue(disk.radius, k) {
        log::warn!("k = {k} is within tolerance of the disk eigen-wavenumber {} (J_{} zero {})", e.k, e.order, e.index);
    }
}

/// Precomputed per-`(disk radius, k)` data for Herglotz fluxes.
#[derive(Debug, Clone)]
pub struct FluxOperator {
    k: f64,
    rho: f64,
    big_m: usize,
    /// Row `m + M`: `W (-2 i) i^m e^{-i m theta_p} / (pi rho H_m)`.
    rows: CMatrix,
}

impl FluxOperator {
    pub fn new(rho: f64, k: f64, grid: &DirectionGrid) -> Self {
        let big_m = truncation(k, rho);
        let cf = CylinderFunctions::new(big_m, k * rho);
        let w = grid.weight();
        let n = grid.len();
        let rows = CMatrix::from_fn(2 * big_m + 1, n, |r, p| {
            let m = r as i64 - big_m as i64;
            let im = C64::new(0.0, 1.0).powi(m.rem_euclid(4) as i32);
            let pre = C64::new(0.0, -2.0) * im / (cf.h_signed(m) * (PI * rho)) * w;
            pre * C64::new(0.0, -(m as f64) * grid.angle(p)).exp()
        });
        Self { k, rho, big_m, rows }
    }

    /// `H_{dOmega} g` for the disk centered at `center`.
    pub fn apply(&self, center: Point, g: &CVector, grid: &DirectionGrid) -> Result<BoundaryTrace> {
        if g.len() != grid.len() || self.rows.ncols() != g.len() {
            return Err(Error::Dimension(format!("density of length {} on {} directions", g.len(), grid.len())));
        }
        let phases = translation_phases(self.k, center, grid);
        let shifted = CVector::from_iterator(g.len(), g.iter().zip(phases.iter()).map(|(a, d)| a * d.conj()));
        let coeffs = &self.rows * shifted;
        BoundaryTrace::new(ArtificialDisk::new(center, self.rho)?, coeffs.iter().cloned().collect())
    }

    pub fn truncation(&self) -> usize {
        self.big_m
    }
}

/// `H_{dOmega} g = d_nu u_b` on the disk boundary for the Herglotz incident
/// wave `v_g = int exp(i k theta . x) g(theta) dtheta`.
pub fn boundary_flux_herglotz(
    disk: &ArtificialDisk,
    k: f64,
    g: &CVector,
    grid: &DirectionGrid,
) -> Result<BoundaryTrace> {
    warn_near_eigen(disk, k);
    FluxOperator::new(disk.radius, k, grid).apply(disk.center, g, grid)
}

/// `d_nu (w_z - Phi_z)` on the disk boundary, where `w_z` solves the interior
/// Dirichlet problem with data `Phi_z`. Coefficients are
/// `J_m(k r_z) e^{-i m phi_z} / (2 pi rho J_m(k rho))`, so the trace is real.
pub fn interior_reference_flux(disk: &ArtificialDisk, k: f64, z: Point) -> Result<BoundaryTrace> {
    let d = z - disk.center;
    let rz = d.norm();
    if rz >= disk.radius {
        return Err(Error::OutsideDisk { distance: rz, radius: disk.radius });
    }
    if let Some(e) = near_eigenvalue(disk.radius, k) {
        return Err(Error::NearEigenvalue { k, eigen: e.k, order: e.order });
    }
    let big_m = truncation(k, disk.radius);
    let jr = bessel_j_seq(big_m, k * rz);
    let jb = bessel_j_seq(big_m, k * disk.radius);
    let phi_z = d.y.atan2(d.x);
    let scale = 1.0 / (2.0 * PI * disk.radius);
    let mut coeffs = vec![C64::new(0.0, 0.0); 2 * big_m + 1];
    for m in 0..=big_m {
        let a = jr[m] / jb[m] * scale;
        let e = C64::new(0.0, -(m as f64) * phi_z).exp();
        coeffs[big_m + m] = e * a;
        // m -> -m: same ratio, conjugate phase; keeps the trace exactly real.
        coeffs[big_m - m] = e.conj() * a;
    }
    BoundaryTrace::new(*disk, coeffs)
}

/// `Phi^inf_z(theta) = exp(-i k z . theta)`.
pub fn point_source_far_field(z: Point, k: f64, grid: &DirectionGrid) -> CVector {
    CVector::from_iterator(grid.len(), (0..grid.len()).map(|q| C64::new(0.0, -k * z.dot(&grid.direction(q))).exp()))
}
