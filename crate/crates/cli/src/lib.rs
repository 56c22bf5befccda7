//! Command line driver: synthesizes far-field data and writes indicator maps.

mod error;
pub mod manifest;
pub mod pipeline;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::ThreadPool;

use crackmap::diskbg::disk_eigenvalues;
use crackmap::forward::{format_ffm, read_dataset, FarFieldMatrix, MANIFEST};
use crackmap::geometry::{load_scenario, Scenario};
use crackmap::indicators::{curve_csv, grid_csv, grid_pgm, sidecar_path, IndicatorGrid};

pub use error::CliError;
use manifest::{sha256_hex, Recorder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pgm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Write noisy far-field matrices for every wavenumber.
    Simulate,
    /// Multi-frequency eigenvalue indicator.
    Rte,
    /// Fixed-frequency differential indicators.
    Dlsm,
    /// Factorization-method map.
    Fm,
    /// All indicators on a progressive crack series.
    Compare,
    /// Dirichlet eigen-wavenumbers of the artificial disks.
    Spectrum,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Rte => "rte",
            Command::Dlsm => "dlsm",
            Command::Fm => "fm",
            Command::Compare => "compare",
            Command::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "crackmap", version, about = "Imaging of crack networks from far-field data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, default_value = "scenario.toml")]
    pub scenario: PathBuf,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Dataset directory written by `simulate`; data is synthesized when absent.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Worker threads, defaults to the number of logical cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "both")]
    pub format: Format,
}

struct Context {
    scenario: Scenario,
    scenario_hash: String,
    pool: ThreadPool,
    format: Format,
    data_dir: Option<PathBuf>,
}

impl Context {
    fn data(&self, rec: &mut Recorder) -> Result<Vec<FarFieldMatrix>, CliError> {
        match &self.data_dir {
            Some(dir) => Ok(read_dataset(dir)?),
            None => {
                let t = Instant::now();
                let d = pipeline::simulate(&self.pool, &self.scenario, &self.scenario.network)?;
                rec.time("simulate", t.elapsed());
                Ok(d)
            }
        }
    }

    fn write_grid(&self, rec: &mut Recorder, stem: &str, grid: &IndicatorGrid) -> Result<(), CliError> {
        if matches!(self.format, Format::Csv | Format::Both) {
            rec.write(&format!("{stem}.csv"), grid_csv(grid).as_bytes())?;
        }
        if matches!(self.format, Format::Pgm | Format::Both) {
            let (bytes, range) = grid_pgm(grid, self.scenario.sweep.shape())?;
            let name = format!("{stem}.pgm");
            rec.write(&name, &bytes)?;
            let side = sidecar_path(Path::new(&name));
            rec.write(&side.to_string_lossy(), range.sidecar().as_bytes())?;
        }
        Ok(())
    }
}

/// Runs one command; returns the written manifest.
pub fn run(cli: &Cli) -> Result<manifest::RunManifest, CliError> {
    let text = fs::read(&cli.scenario).map_err(|source| crackmap::Error::Io { path: cli.scenario.clone(), source })?;
    let mut scenario = load_scenario(&cli.scenario)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let ctx =
        Context { scenario, scenario_hash: sha256_hex(&text), pool, format: cli.format, data_dir: cli.data.clone() };
    let mut rec = Recorder::new(&cli.out)?;
    log::info!("{} -> {}", cli.command.name(), cli.out.display());
    match cli.command {
        Command::Simulate => cmd_simulate(&ctx, &mut rec)?,
        Command::Rte => cmd_rte(&ctx, &mut rec)?,
        Command::Dlsm => cmd_dlsm(&ctx, &mut rec)?,
        Command::Fm => cmd_fm(&ctx, &mut rec)?,
        Command::Compare => cmd_compare(&ctx, &mut rec)?,
        Command::Spectrum => cmd_spectrum(&ctx, &mut rec)?,
    }
    rec.finish(cli.command.name(), ctx.scenario_hash.clone(), ctx.scenario.seed, cli.data.as_deref())
}

fn cmd_simulate(ctx: &Context, rec: &mut Recorder) -> Result<(), CliError> {
    let sc = &ctx.scenario;
    let t = Instant::now();
    let clean = pipeline::simulate_clean(&ctx.pool, sc, &sc.network)?;
    let noisy = pipeline::add_scenario_noise(sc, &clean)?;
    rec.time("simulate", t.elapsed());

    let mut manifest = String::from("index,k,file\n");
    let mut noise = String::from("index,k,delta,relative_change\n");
    for (i, (f, c)) in noisy.iter().zip(&clean).enumerate() {
        let name = format!("ffm_{i:04}.txt");
        rec.write(&format!("data/{name}"), format_ffm(f).as_bytes())?;
        let _ = writeln!(manifest, "{i},{:.16e},{name}", f.k());
        let diff = crackmap::linalg::spectral_norm(&(f.operator() - c.operator()));
        let base = c.operator_norm();
        let rel = if base > 0.0 { diff / base } else { 0.0 };
        let _ = writeln!(noise, "{i},{:.16e},{:.16e},{:.16e}", f.k(), pipeline::noise_delta(sc, f), rel);
    }
    rec.write(&format!("data/{MANIFEST}"), manifest.as_bytes())?;
    rec.write("noise.csv", noise.as_bytes())?;
    Ok(())
}

fn cmd_rte(ctx: &Context, rec: &mut Recorder) -> Result<(), CliError> {
    let data = ctx.data(rec)?;
    let t = Instant::now();
    let res = pipeline::run_rte(&ctx.pool, &ctx.scenario, &data)?;
    rec.time("rte", t.elapsed());
    ctx.write_grid(rec, "rte", &res.grid)?;
    let mut disks = String::from("index,x,y,distance,flagged,peaks_k2\n");
    for (i, d) in res.disks.iter().enumerate() {
        let peaks: Vec<String> = d.sigma_gamma.values().iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(
            disks,
            "{i},{:.16e},{:.16e},{:.16e},{},{}",
            d.curve.t.x,
            d.curve.t.y,
            d.distance.value,
            d.distance.flagged,
            peaks.join(";")
        );
        rec.write(&format!("curves/curve_{i:04}.csv"), curve_csv(&d.curve).as_bytes())?;
    }
    rec.write("rte_disks.csv", disks.as_bytes())?;
    Ok(())
}

fn cmd_dlsm(ctx: &Context, rec: &mut Recorder) -> Result<(), CliError> {
    let data = ctx.data(rec)?;
    for (i, &rho) in ctx.scenario.dlsm_radii.iter().enumerate() {
        let t = Instant::now();
        let (j, j_im) = pipeline::run_dlsm(&ctx.pool, &ctx.scenario, &data, rho)?;
        rec.time(format!("dlsm rho={rho}"), t.elapsed());
        ctx.write_grid(rec, &format!("dlsm_{i}"), &j)?;
        ctx.write_grid(rec, &format!("dlsm_im_{i}"), &j_im)?;
    }
    let mut radii = String::from("index,rho\n");
    for (i, rho) in ctx.scenario.dlsm_radii.iter().enumerate() {
        let _ = writeln!(radii, "{i},{rho:.16e}");
    }
    rec.write("dlsm_radii.csv", radii.as_bytes())
}

fn cmd_fm(ctx: &Context, rec: &mut Recorder) -> Result<(), CliError> {
    let data = ctx.data(rec)?;
    let t = Instant::now();
    let grid = pipeline::run_fm(&ctx.pool, &ctx.scenario, &data)?;
    rec.time("fm", t.elapsed());
    ctx.write_grid(rec, "fm", &grid)
}

fn cmd_compare(ctx: &Context, rec: &mut Recorder) -> Result<(), CliError> {
    if ctx.data_dir.is_some() {
        log::warn!("compare synthesizes data for every crack level; --data is ignored");
    }
    let sc = &ctx.scenario;
    let mut report = String::from("level,cracks,indicator,max,mean,flagged\n");
    let mut timings = String::from("level,indicator,seconds\n");
    for &level in &sc.compare_levels {
        let network = sc.network.prefix(level);
        let level_sc = Scenario { network, ..sc.clone() };
        let t = Instant::now();
        let data = pipeline::simulate(&ctx.pool, &level_sc, &level_sc.network)?;
        let _ = writeln!(timings, "{level},simulate,{:.6}", t.elapsed().as_secs_f64());

        let mut grids = Vec::new();
        let t = Instant::now();
        grids.push(pipeline::run_rte(&ctx.pool, &level_sc, &data)?.grid);
        let _ = writeln!(timings, "{level},rte,{:.6}", t.elapsed().as_secs_f64());
        let t = Instant::now();
        let (j, j_im) = pipeline::run_dlsm(&ctx.pool, &level_sc, &data, sc.dlsm_radii[0])?;
        grids.push(j);
        grids.push(j_im);
        let _ = writeln!(timings, "{level},dlsm,{:.6}", t.elapsed().as_secs_f64());
        let t = Instant::now();
        grids.push(pipeline::run_fm(&ctx.pool, &level_sc, &data)?);
        let _ = writeln!(timings, "{level},fm,{:.6}", t.elapsed().as_secs_f64());

        for g in &grids {
            let _ = writeln!(
                report,
                "{level},{},{},{:.16e},{:.16e},{}",
                level_sc.network.len(),
                g.kind.name(),
                g.max(),
                g.mean(),
                g.flagged
            );
            rec.write(&format!("compare/level_{level}_{}.csv", g.kind.name()), grid_csv(g).as_bytes())?;
        }
    }
    rec.write("compare.csv", report.as_bytes())?;
    // Wall times are not reproducible and stay out of the checksummed outputs.
    let path = rec.path("compare_timings.csv");
    fs::write(&path, timings).map_err(|source| crackmap::Error::Io { path, source })?;
    Ok(())
}

fn cmd_spectrum(ctx: &Context, rec: &mut Recorder) -> Result<(), CliError> {
    let sc = &ctx.scenario;
    let mut radii = vec![sc.disk_radius];
    for &r in &sc.dlsm_radii {
        if !radii.contains(&r) {
            radii.push(r);
        }
    }
    let mut out = String::from("rho,order,index,k,k2\n");
    for rho in radii {
        for e in disk_eigenvalues(rho, sc.band.k_min, sc.band.k_max) {
            let _ = writeln!(out, "{rho:.16e},{},{},{:.16e},{:.16e}", e.order, e.index, e.k, e.k * e.k);
        }
    }
    rec.write("spectrum.csv", out.as_bytes())
}
