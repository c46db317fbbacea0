//! The three subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use scramble_core::scenarios::{builtin_scenarios, find_scenario, run_scenario, RunOptions};
use scramble_core::{ResultTable, ScenarioConfig};
use serde::Serialize;

use crate::config::load_config;
use crate::csv::{render, write_atomic};
use crate::verify::{verify, VerifyReport};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub output: PathBuf,
    pub metadata: PathBuf,
    pub rows: usize,
    pub undefined: usize,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    rows: usize,
    undefined_bounds: usize,
    wall_time_s: f64,
    threads: usize,
    scenario: &'a ScenarioConfig,
}

/// `<output>.meta.toml`
pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.toml");
    output.with_file_name(name)
}

fn execute(cfg: &ScenarioConfig, scale: f64) -> Result<ResultTable, CliError> {
    let opts = RunOptions {
        dual_path_tol: 1e-9 * scale,
    };
    let table = run_scenario(cfg, &opts).map_err(|e| {
        if e.is_invariant_violation() {
            CliError::Invariant(format!("{}: {e}", cfg.name))
        } else {
            CliError::Config(format!("{}: {e}", cfg.name))
        }
    })?;
    let tol = 1e-9 * scale;
    for r in table.records().filter(|r| r.bounds_defined) {
        if !(r.lower - tol <= r.c && r.c <= r.upper + tol) {
            return Err(CliError::Invariant(format!(
                "{}: bounds violated at t = {}: L = {}, C = {}, U = {}",
                cfg.name, r.t, r.lower, r.c, r.upper
            )));
        }
    }
    Ok(table)
}

/// `run --config <path>`: computes the table, then writes the CSV and its
/// metadata file.
pub fn run(config: &Path, scale: f64) -> Result<RunSummary, CliError> {
    let cfg = load_config(config)?;
    let start = Instant::now();
    let table = execute(&cfg.scenario, scale)?;
    let wall = start.elapsed().as_secs_f64();
    let undefined = table.records().filter(|r| !r.bounds_defined).count();

    write_atomic(&cfg.output, &render(&table))?;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        rows: table.rows.len(),
        undefined_bounds: undefined,
        wall_time_s: wall,
        threads: rayon::current_num_threads(),
        scenario: &cfg.scenario,
    };
    let text = toml::to_string(&meta).map_err(|e| CliError::Io(format!("metadata: {e}")))?;
    let metadata = metadata_path(&cfg.output);
    write_atomic(&metadata, &text)?;
    Ok(RunSummary {
        output: cfg.output,
        metadata,
        rows: table.rows.len(),
        undefined,
    })
}

/// `verify [--scenario <name>]`
pub fn verify_command(scenario: Option<&str>, scale: f64) -> Result<VerifyReport, CliError> {
    let scenarios = match scenario {
        Some(name) => vec![find_scenario(name).ok_or_else(|| CliError::Config(format!("unknown scenario `{name}`")))?],
        None => builtin_scenarios(),
    };
    verify(&scenarios, scale)
}

/// `list`: one line per preset.
pub fn list() -> Vec<String> {
    builtin_scenarios().iter().map(|s| s.to_string().trim_end().to_string()).collect()
}
