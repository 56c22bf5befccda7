//! Run manifests: inputs, seed and output checksums.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crackmap::Error;

use crate::CliError;

pub const MANIFEST_FILE: &str = "run_manifest.toml";
pub const TIMINGS_FILE: &str = "timings.toml";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

/// Deterministic part of a run record. Wall-clock timings live in a
/// separate file so that reruns stay byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario_sha256: String,
    pub seed: u64,
    pub dataset: Option<String>,
    pub outputs: Vec<OutputFile>,
}

#[derive(Debug, Clone, Serialize)]
struct Timing {
    stage: String,
    seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Timings {
    stages: Vec<Timing>,
}

/// Collects written files (relative to the output directory) and stage timings.
#[derive(Debug)]
pub struct Recorder {
    root: PathBuf,
    files: Vec<PathBuf>,
    timings: Vec<(String, Duration)>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Core(Error::Io { path: path.to_path_buf(), source })
}

impl Recorder {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Self { root, files: Vec::new(), timings: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        fs::write(&path, bytes).map_err(io_err(&path))?;
        self.track(path);
        Ok(())
    }

    /// Registers a file written by someone else.
    pub fn track(&mut self, path: PathBuf) {
        self.files.push(path);
    }

    pub fn time(&mut self, stage: impl Into<String>, elapsed: Duration) {
        self.timings.push((stage.into(), elapsed));
    }

    /// Writes the manifest and the timings file.
    pub fn finish(
        mut self,
        command: &str,
        scenario_sha256: String,
        seed: u64,
        dataset: Option<&Path>,
    ) -> Result<RunManifest, CliError> {
        self.files.sort();
        self.files.dedup();
        let mut outputs = Vec::with_capacity(self.files.len());
        for path in &self.files {
            let bytes = fs::read(path).map_err(io_err(path))?;
            let rel = path.strip_prefix(&self.root).unwrap_or(path);
            outputs.push(OutputFile { file: rel.to_string_lossy().replace('\\', "/"), sha256: sha256_hex(&bytes) });
        }
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            scenario_sha256,
            seed,
            dataset: dataset.map(|d| d.to_string_lossy().into_owned()),
            outputs,
        };
        let text =
            toml::to_string(&manifest).map_err(|e| CliError::Core(Error::Numerical(format!("manifest: {e}"))))?;
        let mpath = self.path(MANIFEST_FILE);
        fs::write(&mpath, text).map_err(io_err(&mpath))?;

        let timings = Timings {
            stages: self.timings.iter().map(|(s, d)| Timing { stage: s.clone(), seconds: d.as_secs_f64() }).collect(),
        };
        let text = toml::to_string(&timings).map_err(|e| CliError::Core(Error::Numerical(format!("timings: {e}"))))?;
        let tpath = self.path(TIMINGS_FILE);
        fs::write(&tpath, text).map_err(io_err(&tpath))?;
        Ok(manifest)
    }
}
