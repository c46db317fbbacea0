//! Run configuration files (TOML).
//!
//! ```toml
//! scenario = "fig2a"
//! output = "fig2a.csv"
//! ```
//!
//! or, with an inline model:
//!
//! ```toml
//! output = "custom.csv"
//!
//! [inline]
//! n_outer = 3
//! omega = 1.0
//! j1 = 1.0
//! j2 = 0.5
//! prep = { kind = "thermal", beta = 1.0 }
//! w_terms = [{ site = 1, axis = "z" }, { site = 2, axis = "z" }]
//! v_terms = [{ site = 0, axis = "z" }]
//! grid = { start = 0.0, stop = 6.283185307179586, points = 401 }
//! sweep = { kind = "size_sweep", n_min = 2, n_max = 4 }
//! ```
//!
//! A relative `output` is resolved against the config file's directory.

use std::path::{Path, PathBuf};

use scramble_core::scenarios::{find_scenario, Sweep};
use scramble_core::spin::SiteAxis;
use scramble_core::{OperatorSpec, ScenarioConfig, SpinStarParams, StatePrep, TimeGrid};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    inline: Option<InlineModel>,
    output: PathBuf,
    #[serde(default = "default_format")]
    format: String,
}

fn default_format() -> String {
    "csv".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InlineModel {
    #[serde(default = "default_name")]
    name: String,
    n_outer: usize,
    omega: f64,
    j1: f64,
    j2: f64,
    prep: StatePrep,
    w_terms: Vec<SiteAxis>,
    v_terms: Vec<SiteAxis>,
    #[serde(default = "TimeGrid::standard")]
    grid: TimeGrid,
    #[serde(default = "no_sweep")]
    sweep: Sweep,
}

fn default_name() -> String {
    "inline".to_string()
}

fn no_sweep() -> Sweep {
    Sweep::None
}

/// A validated run request.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub output: PathBuf,
}

fn config_error(key: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {e}"))
}

fn operator(key: &str, terms: Vec<SiteAxis>, n_outer: usize) -> Result<OperatorSpec, CliError> {
    let spec = OperatorSpec::new(terms).map_err(|e| config_error(key, e))?;
    spec.validate_for(n_outer).map_err(|e| config_error(key, e))?;
    Ok(spec)
}

impl InlineModel {
    fn into_scenario(self) -> Result<ScenarioConfig, CliError> {
        let params = SpinStarParams::resonant(self.n_outer, self.omega, self.j1, self.j2);
        params.validate().map_err(|e| config_error("inline", e))?;
        self.prep.validate().map_err(|e| config_error("inline.prep", e))?;
        self.grid.validate().map_err(|e| config_error("inline", e))?;
        let w_spec = operator("inline.w_terms", self.w_terms, self.n_outer)?;
        let v_spec = operator("inline.v_terms", self.v_terms, self.n_outer)?;
        let cfg = ScenarioConfig {
            name: self.name,
            figure: "custom".to_string(),
            params,
            prep: self.prep,
            w_spec,
            v_spec,
            grid: self.grid,
            sweep: self.sweep,
        };
        cfg.validate().map_err(|e| config_error("inline", e))?;
        Ok(cfg)
    }
}

/// Parses and fully validates a config. `base_dir` anchors a relative
/// `output`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
    if raw.format != "csv" {
        return Err(config_error("format", format!("unsupported format `{}` (only `csv`)", raw.format)));
    }
    let scenario = match (raw.scenario, raw.inline) {
        (Some(name), None) => {
            find_scenario(&name).ok_or_else(|| config_error("scenario", format!("unknown scenario `{name}`")))?
        }
        (None, Some(inline)) => inline.into_scenario()?,
        (Some(_), Some(_)) => return Err(config_error("scenario", "give either `scenario` or `[inline]`, not both")),
        (None, None) => return Err(config_error("scenario", "missing: give `scenario` or an `[inline]` table")),
    };
    let output = if raw.output.is_absolute() {
        raw.output
    } else {
        base_dir.join(raw.output)
    };
    Ok(RunConfig { scenario, output })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}
