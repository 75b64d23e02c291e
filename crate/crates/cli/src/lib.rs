//! Command-line driver for the scissor simulations: reads a TOML config, runs
//! one experiment and writes a CSV table with a JSON metadata sidecar.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::Path;

use anyhow::{Context, Result};

pub use config::{parse_config, ConfigError, Diagnostic, Experiment, ExperimentConfig};

/// Exit codes: 2 for config problems, 3 for I/O failures, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        2
    } else if err.chain().any(|e| e.downcast_ref::<std::io::Error>().is_some()) {
        3
    } else {
        1
    }
}

/// Parses an experiment name given on the command line.
pub fn experiment_from_arg(name: &str) -> Result<Experiment, ConfigError> {
    Experiment::from_name(name).ok_or_else(|| ConfigError {
        source_name: String::new(),
        diagnostics: vec![Diagnostic {
            line: None,
            message: format!(
                "unknown experiment {name:?}; valid names: {}",
                Experiment::ALL.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ")
            ),
        }],
    })
}

pub fn load_config(path: &Path, requested: Option<Experiment>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_config(&text, &path.display().to_string(), requested)?)
}
