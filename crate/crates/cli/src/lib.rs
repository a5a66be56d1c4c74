//! Library side of the `knotfield` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::fs;
use std::path::Path;

use config::RunConfig;
use error::CliError;

/// Reads the config file (if any) and applies `--set` overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
        None => String::new(),
    };
    RunConfig::from_text(&text, overrides)
}

/// Caps the global rayon pool from `KNOTFIELD_THREADS`.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("KNOTFIELD_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
