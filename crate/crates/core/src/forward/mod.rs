//! Direct scattering by sound-hard cracks, far-field matrices and noise.
//!
//! | constant | value |
//! |---|---|
//! | far-field normalization `eta_2` | `e^{i pi/4} / sqrt(8 pi k)` |
//! | far field of `Phi_z` | `exp(-i k z . theta)` |
//! | double-layer far-field kernel | `-i k theta . nu(y) exp(-i k theta . y)` |
//! | operator weight `W` | `2 pi / N` |

mod bem;
mod io;

pub use bem::{ArcDensity, CrackSystem, JumpDensity, SolverOptions};
pub use io::{format_ffm, read_dataset, read_ffm, write_dataset, write_ffm, DatasetEntry, MANIFEST};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::geometry::{CrackNetwork, DirectionGrid, Point};
use crate::linalg::{spectral_norm, CMatrix};
use crate::{Error, Result, C64};

/// Samples `u_inf(theta_q, theta_p)` on a direction grid at one wavenumber.
///
/// Entry `(q, p)` is the far field in direction `theta_q` for incidence
/// `theta_p`. Acting on densities, the operator is `W * entries` with
/// `W = 2 pi / N`; see [`FarFieldMatrix::operator`].
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    k: f64,
    grid: DirectionGrid,
    entries: CMatrix,
}

impl FarFieldMatrix {
    pub fn new(k: f64, grid: DirectionGrid, entries: CMatrix) -> Result<Self> {
        let n = grid.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::Dimension(format!(
                "far-field matrix is {}x{}, grid has {n} directions",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Config(format!("wavenumber must be positive, got {k}")));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("far-field matrix has non-finite entries".into()));
        }
        Ok(Self { k, grid, entries })
    }

    pub fn zeros(k: f64, grid: DirectionGrid) -> Self {
        Self { k, grid, entries: CMatrix::zeros(grid.len(), grid.len()) }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn grid(&self) -> DirectionGrid {
        self.grid
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// `W * entries`, the discretized integral operator.
    pub fn operator(&self) -> CMatrix {
        &self.entries * C64::new(self.grid.weight(), 0.0)
    }

    /// Spectral norm of the weighted operator.
    pub fn operator_norm(&self) -> f64 {
        spectral_norm(&self.operator())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { entries: &self.entries * c, ..self.clone() }
    }

    pub(crate) fn with_entries(&self, entries: CMatrix) -> Self {
        Self { entries, ..self.clone() }
    }

    pub fn same_setting(&self, other: &Self) -> bool {
        self.grid == other.grid && self.k == other.k
    }
}

/// Solves the crack problem for one plane wave `exp(i k theta_i . x)`.
pub fn solve_crack_scattering(
    network: &CrackNetwork,
    k: f64,
    incident: Point,
    opts: &SolverOptions,
) -> Result<JumpDensity> {
    let mut sys = CrackSystem::assemble(network, k, opts)?;
    sys.solve_plane_wave(incident)
}

/// Far-field matrix of a crack network; zero for an empty network.
pub fn far_field_matrix(
    network: &CrackNetwork,
    k: f64,
    grid: DirectionGrid,
    opts: &SolverOptions,
) -> Result<FarFieldMatrix> {
    if network.is_empty() {
        if !(k > 0.0) {
            return Err(Error::Config(format!("wavenumber must be positive, got {k}")));
        }
        return Ok(FarFieldMatrix::zeros(k, grid));
    }
    let mut sys = CrackSystem::assemble(network, k, opts)?;
    let entries = sys.far_field(&grid)?;
    log::info!("far field at k = {k}: {} unknowns, condition {:.3e}", sys.unknowns(), sys.condition);
    FarFieldMatrix::new(k, grid, entries)
}

/// Multiplicative uniform noise with a bound on the weighted operator norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub delta: f64,
    pub seed: u64,
    /// ChaCha stream, so several matrices can share one seed.
    pub stream: u64,
}

impl NoiseModel {
    pub fn new(delta: f64, seed: u64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::Config(format!("noise level must be nonnegative, got {delta}")));
        }
        Ok(Self { delta, seed, stream: 0 })
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }
}

/// `F^delta = F o (1 + gamma N)` with `||W (F^delta - F)|| <= delta`.
///
/// Real and imaginary parts of `N` are i.i.d. uniform on `[-1, 1]`, drawn in
/// row-major order; `gamma` makes the bound tight up to one part in `1e12`.
pub fn add_noise(f: &FarFieldMatrix, noise: &NoiseModel) -> FarFieldMatrix {
    if noise.delta == 0.0 {
        return f.clone();
    }
    let mut rng = ChaCha20Rng::seed_from_u64(noise.seed);
    rng.set_stream(noise.stream);
    let n = f.grid.len();
    let mut pert = CMatrix::zeros(n, n);
    for q in 0..n {
        for p in 0..n {
            let z = C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            pert[(q, p)] = f.entries[(q, p)] * z;
        }
    }
    let norm = spectral_norm(&pert) * f.grid.weight();
    if norm == 0.0 {
        return f.clone();
    }
    let gamma = noise.delta / norm * (1.0 - 1e-12);
    f.with_entries(&f.entries + pert * C64::new(gamma, 0.0))
}
