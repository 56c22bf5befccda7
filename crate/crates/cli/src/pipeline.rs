//! Data synthesis and indicator sweeps on a worker pool. Every parallel map
//! collects in input order, so results do not depend on the worker count.

use rayon::prelude::*;
use rayon::ThreadPool;

use crackmap::diskbg::SpectrumEstimate;
use crackmap::forward::{add_noise, far_field_matrix, FarFieldMatrix, NoiseModel, SolverOptions};
use crackmap::geometry::{CrackNetwork, NoiseLevel, Point, Scenario};
use crackmap::indicators::{
    dlsm_grids, grid_from_distances, BandData, BandEntry, DiskDistance, DlsmSetup, FmSetup, IndicatorGrid,
    IndicatorKind, ZRule,
};
use crackmap::{Error, Result};

use crate::CliError;

/// Relative tolerance for matching wavenumbers between a dataset and a scenario.
const K_MATCH: f64 = 1e-9;

fn same_k(a: f64, b: f64) -> bool {
    (a - b).abs() <= K_MATCH * a.abs().max(b.abs())
}

/// Band wavenumbers plus the fixed wavenumber, sorted.
pub fn data_wavenumbers(sc: &Scenario) -> Vec<f64> {
    let mut ks = sc.band.wavenumbers();
    if !ks.iter().any(|&k| same_k(k, sc.fixed_k)) {
        ks.push(sc.fixed_k);
        ks.sort_by(f64::total_cmp);
    }
    ks
}

pub fn solver_options(sc: &Scenario) -> SolverOptions {
    SolverOptions { base_order: sc.base_order, order_per_klength: sc.order_per_klength, ..SolverOptions::default() }
}

/// Noise level attached to a (possibly noisy) matrix.
pub fn noise_delta(sc: &Scenario, f: &FarFieldMatrix) -> f64 {
    match sc.noise {
        NoiseLevel::Absolute(d) => d,
        NoiseLevel::Relative(r) => r * f.operator_norm(),
    }
}

/// Noise-free far-field matrices for `network` at every data wavenumber.
pub fn simulate_clean(
    pool: &ThreadPool,
    sc: &Scenario,
    network: &CrackNetwork,
) -> Result<Vec<FarFieldMatrix>, CliError> {
    let opts = solver_options(sc);
    let ks = data_wavenumbers(sc);
    pool.install(|| {
        ks.par_iter()
            .map(|&k| {
                far_field_matrix(network, k, sc.grid, &opts).map_err(CliError::in_stage(format!("simulate k={k}")))
            })
            .collect()
    })
}

/// Noise for entry `i` is drawn from stream `i` of the scenario seed.
pub fn add_scenario_noise(sc: &Scenario, clean: &[FarFieldMatrix]) -> Result<Vec<FarFieldMatrix>> {
    clean
        .iter()
        .enumerate()
        .map(|(i, f)| Ok(add_noise(f, &NoiseModel::new(noise_delta(sc, f), sc.seed)?.with_stream(i as u64))))
        .collect()
}

pub fn simulate(pool: &ThreadPool, sc: &Scenario, network: &CrackNetwork) -> Result<Vec<FarFieldMatrix>, CliError> {
    Ok(add_scenario_noise(sc, &simulate_clean(pool, sc, network)?)?)
}

fn check_grid(sc: &Scenario, f: &FarFieldMatrix) -> Result<()> {
    if f.grid() != sc.grid {
        return Err(Error::Config(format!(
            "dataset has {} directions, scenario expects {}",
            f.grid().len(),
            sc.grid.len()
        )));
    }
    Ok(())
}

/// Matrices at the band wavenumbers, in band order.
pub fn band_matrices<'a>(sc: &Scenario, data: &'a [FarFieldMatrix]) -> Result<Vec<&'a FarFieldMatrix>> {
    sc.band
        .wavenumbers()
        .into_iter()
        .map(|k| {
            let f = data
                .iter()
                .find(|f| same_k(f.k(), k))
                .ok_or_else(|| Error::Config(format!("dataset has no matrix at band wavenumber {k}")))?;
            check_grid(sc, f)?;
            Ok(f)
        })
        .collect()
}

pub fn fixed_matrix<'a>(sc: &Scenario, data: &'a [FarFieldMatrix]) -> Result<&'a FarFieldMatrix> {
    let f = data
        .iter()
        .find(|f| same_k(f.k(), sc.fixed_k))
        .ok_or_else(|| Error::Config(format!("dataset has no matrix at fixed_k = {}", sc.fixed_k)))?;
    check_grid(sc, f)?;
    Ok(f)
}

#[derive(Debug, Clone)]
pub struct RteRun {
    pub grid: IndicatorGrid,
    pub disks: Vec<DiskDistance>,
    pub reference: SpectrumEstimate,
}

pub fn run_rte(pool: &ThreadPool, sc: &Scenario, data: &[FarFieldMatrix]) -> Result<RteRun, CliError> {
    let mats = band_matrices(sc, data)?;
    let entries = pool.install(|| {
        mats.par_iter()
            .map(|f| BandEntry::new((*f).clone(), sc.disk_radius, noise_delta(sc, f)))
            .collect::<Result<Vec<_>>>()
    })?;
    let band = BandData::from_entries(sc.disk_radius, ZRule::default(), entries)?;
    let reference = band.reference_spectrum()?;
    if reference.is_empty() {
        log::warn!("the band holds no Dirichlet eigenvalue of a disk of radius {}", sc.disk_radius);
    }
    let points = sc.sweep.points();
    let disks = pool.install(|| {
        points
            .par_iter()
            .map(|&t| crackmap::indicators::disk_distance(&band, t, &reference, sc.peak_prominence))
            .collect::<Result<Vec<_>>>()
    })?;
    let grid = grid_from_distances(&points, &disks, sc.averaging_radius)?;
    Ok(RteRun { grid, disks, reference })
}

/// `J` and `J~` maps for one radius.
pub fn run_dlsm(
    pool: &ThreadPool,
    sc: &Scenario,
    data: &[FarFieldMatrix],
    rho: f64,
) -> Result<(IndicatorGrid, IndicatorGrid), CliError> {
    let f = fixed_matrix(sc, data)?;
    let setup = DlsmSetup::new(f, rho, noise_delta(sc, f), ZRule::default())?;
    let points = sc.sweep.points();
    let values = pool.install(|| points.par_iter().map(|&t| setup.values(t)).collect::<Result<Vec<_>>>())?;
    Ok(dlsm_grids(&points, &values)?)
}

pub fn run_fm(pool: &ThreadPool, sc: &Scenario, data: &[FarFieldMatrix]) -> Result<IndicatorGrid, CliError> {
    let f = fixed_matrix(sc, data)?;
    let setup = FmSetup::new(f, fm_cutoff(sc, f), sc.fm_test, sc.fm_orientations)?;
    let points: Vec<Point> = sc.sweep.points();
    let values = pool.install(|| points.par_iter().map(|&z| setup.value(z)).collect::<Vec<_>>());
    Ok(IndicatorGrid::new(IndicatorKind::Fm, points, values, setup.is_degenerate())?)
}

/// Relative spectral cutoff: the noise level measured against `||F||`.
pub fn fm_cutoff(sc: &Scenario, f: &FarFieldMatrix) -> f64 {
    let norm = f.operator_norm();
    if norm > 0.0 {
        noise_delta(sc, f) / norm
    } else {
        0.0
    }
}
