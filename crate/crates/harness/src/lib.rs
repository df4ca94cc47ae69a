//! Experiment harness: config loading and validation, arm execution on a
//! worker pool, brittleness sweeps and run-directory output.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod output;
pub mod sweep;

use std::path::Path;

use exswarm_core::competence::EvalError;
use thiserror::Error;

pub use config::{validate_config, ExperimentConfig, Violation, SCHEMA_VERSION};
pub use experiment::{arm_seed, run_experiment, RunOutput, RunReport};
pub use sweep::run_sweep;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{} config violation(s)", .0.len())]
    Config(Vec<Violation>),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Runtime(String),
}

impl HarnessError {
    /// 2 for config problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Command-line overrides applied on top of a validated config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub episodes: Option<usize>,
    pub workers: Option<usize>,
}

pub fn parse_config(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = validate_config(text).map_err(HarnessError::Config)?;
    let mut bad = Vec::new();
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(n) = overrides.episodes {
        if n == 0 {
            bad.push(Violation {
                line: None,
                field: "--episodes".into(),
                message: "must be at least 1".into(),
            });
        }
        cfg.episodes = n;
    }
    if let Some(w) = overrides.workers {
        if w == 0 {
            bad.push(Violation {
                line: None,
                field: "--workers".into(),
                message: "must be at least 1".into(),
            });
        }
        cfg.workers = Some(w);
    }
    if !bad.is_empty() {
        return Err(HarnessError::Config(bad));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, overrides)
}

pub fn workers_of(cfg: &ExperimentConfig) -> usize {
    cfg.workers.unwrap_or_else(experiment::default_workers)
}
