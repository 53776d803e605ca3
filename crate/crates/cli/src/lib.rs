//! Batch scenario runner: reads a JSON config, evaluates one scenario on a
//! fixed-size worker pool and writes CSV tables plus `summary.json`.
//!
//! Outputs are assembled in memory and only written once the whole scenario
//! has finished, so a failing run leaves no partial artifacts behind.

use std::fmt;
use std::path::{Path, PathBuf};

pub mod config;
pub mod scenarios;
pub mod summary;

pub use config::{LoadedConfig, ScenarioConfig};
pub use scenarios::Scenario;
pub use summary::{Assertion, Summary};

pub const WORKERS_ENV: &str = "VOLKOV_FP_WORKERS";

pub mod exit_code {
    pub const PASS: i32 = 0;
    pub const ASSERTION_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DOMAIN: i32 = 3;
    pub const UNDERSAMPLED: i32 = 4;
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Domain(volkov_fp_core::Error),
    Undersampled(volkov_fp_core::Error),
    Output(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Output(_) => exit_code::CONFIG,
            RunError::Domain(_) => exit_code::DOMAIN,
            RunError::Undersampled(_) => exit_code::UNDERSAMPLED,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Domain(e) => write!(f, "numerical domain error: {e}"),
            RunError::Undersampled(e) => write!(f, "undersampled grid: {e}"),
            RunError::Output(m) => write!(f, "cannot write outputs: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<volkov_fp_core::Error> for RunError {
    fn from(e: volkov_fp_core::Error) -> Self {
        match e {
            volkov_fp_core::Error::Undersampled { .. } => RunError::Undersampled(e),
            other => RunError::Domain(other),
        }
    }
}

/// A finished scenario: its summary and the files to write, in order.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub files: Vec<(String, String)>,
}

/// Worker count: explicit flag, then config, then the environment, then all cores.
pub fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Result<usize, RunError> {
    if let Some(n) = flag.or(config) {
        return if n == 0 { Err(RunError::Config("workers must be at least 1".into())) } else { Ok(n) };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(RunError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Runs `scenario` on a pool of `workers` threads without touching the filesystem.
pub fn evaluate(scenario: Scenario, cfg: &LoadedConfig, workers: usize) -> Result<Outcome, RunError> {
    if let Some(name) = &cfg.config.scenario {
        if name != scenario.name() {
            return Err(RunError::Config(format!(
                "config is for scenario {name:?} but {:?} was requested",
                scenario.name()
            )));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| scenarios::run(scenario, cfg))
}

pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<(), RunError> {
    let err = |e: std::io::Error, p: &Path| RunError::Output(format!("{}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| err(e, dir))?;
    let summary = serde_json::to_string_pretty(&outcome.summary)
        .map_err(|e| RunError::Output(e.to_string()))?;
    let all = outcome.files.iter().map(|(n, c)| (n.as_str(), c.as_str())).chain([("summary.json", summary.as_str())]);
    for (name, content) in all {
        let path = dir.join(name);
        let tmp = dir.join(format!(".{name}.partial"));
        std::fs::write(&tmp, content).map_err(|e| err(e, &tmp))?;
        std::fs::rename(&tmp, &path).map_err(|e| err(e, &path))?;
    }
    Ok(())
}

/// Loads the config, runs the scenario and writes its artifacts.
pub fn execute(
    scenario: Scenario,
    config_path: &Path,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<Summary, RunError> {
    let cfg = LoadedConfig::from_path(config_path)?;
    let workers = resolve_workers(workers, cfg.config.workers)?;
    let dir = out
        .or_else(|| cfg.config.output_dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out").join(scenario.name()));
    let outcome = evaluate(scenario, &cfg, workers)?;
    write_outputs(&outcome, &dir)?;
    Ok(outcome.summary)
}
