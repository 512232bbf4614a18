//! Batch experiment runner: configs in, tables, summaries and plots out.

pub mod config;
pub mod output;
pub mod runners;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{config_hash, load_config, parse_config, ExperimentConfig, Kind, LoadedConfig, SystemConfig};
pub use output::{Cell, Outputs, RunManifest, Table};

use crate::error::{Error, Result};

/// Command-line style options for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

/// Runs the experiment described by an already parsed config and writes its
/// outputs to `dir`.
pub fn run_loaded(kind: Kind, loaded: &LoadedConfig, dir: &Path, seed: Option<u64>, jobs: Option<usize>) -> Result<RunManifest> {
    let start = Instant::now();
    let seed = seed.unwrap_or(loaded.config.seed);
    let threads = jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let out = pool.install(|| runners::run_kind(kind, &loaded.config, seed))?;
    let (outputs, mut plot_warnings) = output::write_outputs(&out, dir)?;
    let mut warnings = out.warnings.clone();
    warnings.append(&mut plot_warnings);
    let manifest = RunManifest {
        kind: kind.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: loaded.hash.clone(),
        seed,
        jobs: pool.current_num_threads(),
        outputs,
        warnings,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    output::write_manifest(&manifest, dir)?;
    Ok(manifest)
}

/// Loads `config_path`, runs it and writes outputs to `--out`, the config's
/// `out` key, or `out/<kind>` in that order.
pub fn run_experiment(kind: Kind, config_path: &Path, o: &RunOptions) -> Result<RunManifest> {
    let loaded = load_config(config_path, kind)?;
    let dir = o
        .out
        .clone()
        .or_else(|| loaded.config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    run_loaded(kind, &loaded, &dir, o.seed, o.jobs)
}
