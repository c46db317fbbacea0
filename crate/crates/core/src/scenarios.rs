//! Named experiment presets and the sweep drivers that run them.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::TimeGrid;
use crate::engine::{PointEval, ScramblingEngine, Spectrum};
use crate::error::{Error, Result};
use crate::scrambling::{MomentSet, ScramblingRecord, NEGATIVE_CLAMP};
use crate::spin::{build_hamiltonian, realize_operator, Axis, OperatorSpec, SpinStarParams};
use crate::states::StatePrep;
use crate::tensor::C64;

/// Default agreement required between the two scrambling evaluations.
pub const DUAL_PATH_TOL: f64 = 1e-9;

/// What, besides time, a scenario varies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    None,
    /// Moves the single-term `W` over outer sites `first..=last`.
    SiteSweep { first: usize, last: usize },
    /// Rebuilds the model for `n_min..=n_max` outer spins.
    SizeSweep { n_min: usize, n_max: usize },
    /// Time sweep over the grid without `t = 0`; the grid point nearest
    /// `tagged_t` gets `sweep_coord = 1`.
    Scatter { tagged_t: f64 },
}

impl Sweep {
    pub fn column_name(&self) -> Option<&'static str> {
        match self {
            Sweep::None => None,
            _ => Some("sweep_coord"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub figure: String,
    pub params: SpinStarParams,
    pub prep: StatePrep,
    pub w_spec: OperatorSpec,
    pub v_spec: OperatorSpec,
    pub grid: TimeGrid,
    pub sweep: Sweep,
}

impl ScenarioConfig {
    /// Checks every field; called by all runners before any computation.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.prep.validate()?;
        self.grid.validate()?;
        match self.sweep {
            Sweep::None => self.validate_operators(self.params.n_outer),
            Sweep::SiteSweep { first, last } => {
                if first > last {
                    return Err(Error::EmptySweep(format!("site range {first}..={last}")));
                }
                if !self.w_spec.is_single_term() {
                    return Err(Error::param("sweep", "site sweep needs a single-term W"));
                }
                for site in first..=last {
                    if site == 0 {
                        return Err(Error::param("sweep.first", "outer sites start at 1"));
                    }
                    self.site_slice(site).validate_operators(self.params.n_outer)?;
                }
                Ok(())
            }
            Sweep::SizeSweep { n_min, n_max } => {
                if n_min > n_max {
                    return Err(Error::EmptySweep(format!("size range {n_min}..={n_max}")));
                }
                for n in n_min..=n_max {
                    self.params.with_n_outer(n).validate()?;
                    self.validate_operators(n)?;
                }
                Ok(())
            }
            Sweep::Scatter { tagged_t } => {
                if !(tagged_t > self.grid.start && tagged_t <= self.grid.stop) {
                    return Err(Error::param("sweep.tagged_t", "must lie in (grid.start, grid.stop]"));
                }
                self.validate_operators(self.params.n_outer)
            }
        }
    }

    fn validate_operators(&self, n_outer: usize) -> Result<()> {
        self.w_spec.validate_for(n_outer)?;
        self.v_spec.validate_for(n_outer)?;
        if let Some(site) = self.w_spec.shared_site(&self.v_spec) {
            return Err(Error::OverlappingSupports { site });
        }
        Ok(())
    }

    fn site_slice(&self, site: usize) -> ScenarioConfig {
        let axis = self.w_spec.terms()[0].axis;
        ScenarioConfig {
            w_spec: OperatorSpec::single(site, axis),
            sweep: Sweep::None,
            ..self.clone()
        }
    }

    /// The same scenario with a different state, operators or size.
    pub fn variant(&self, name: &str) -> ScenarioConfig {
        ScenarioConfig {
            name: name.to_string(),
            ..self.clone()
        }
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sweep = match self.sweep {
            Sweep::None => String::new(),
            Sweep::SiteSweep { first, last } => format!("  sweep=site {first}..{last}"),
            Sweep::SizeSweep { n_min, n_max } => format!("  sweep=N {n_min}..{n_max}"),
            Sweep::Scatter { tagged_t } => format!("  sweep=scatter tagged t={tagged_t:.6}"),
        };
        write!(
            f,
            "{:<14} N={:<2} {:<18} W={:<22} V={:<10} {}{}",
            self.name,
            self.params.n_outer,
            self.prep.label(),
            self.w_spec.to_string(),
            self.v_spec.to_string(),
            self.figure,
            sweep
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResultRow {
    pub sweep_coord: Option<f64>,
    pub record: ScramblingRecord,
    pub moments: MomentSet,
    pub c_moments: f64,
    pub otoc: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub scenario_name: String,
    pub sweep: Sweep,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn records(&self) -> impl Iterator<Item = &ScramblingRecord> {
        self.rows.iter().map(|r| &r.record)
    }

    pub fn max_c(&self) -> f64 {
        self.records().map(|r| r.c).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rows grouped by sweep coordinate, in table order.
    pub fn slices(&self) -> Vec<&[ResultRow]> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.rows.len() {
            let split = match self.sweep {
                Sweep::SiteSweep { .. } | Sweep::SizeSweep { .. } => {
                    i == self.rows.len() || self.rows[i].sweep_coord != self.rows[start].sweep_coord
                }
                _ => i == self.rows.len(),
            };
            if split {
                out.push(&self.rows[start..i]);
                start = i;
            }
        }
        out
    }
}

/// Knobs for the runners.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub dual_path_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            dual_path_tol: DUAL_PATH_TOL,
        }
    }
}

fn to_row(e: &PointEval, sweep_coord: Option<f64>, opts: &RunOptions) -> Result<ResultRow> {
    let diff = (e.c_commutator - e.c_moments).abs();
    if !(diff <= opts.dual_path_tol) {
        return Err(Error::DualPathMismatch {
            t: e.t,
            commutator: e.c_commutator,
            moments: e.c_moments,
        });
    }
    if e.c_moments < -NEGATIVE_CLAMP {
        return Err(Error::NegativeScrambling {
            t: e.t,
            value: e.c_moments,
        });
    }
    Ok(ResultRow {
        sweep_coord,
        record: ScramblingRecord::from_moments(e.t, e.c_commutator, &e.moments),
        moments: e.moments,
        c_moments: e.c_moments,
        otoc: e.otoc,
    })
}

/// Evaluates one `(params, W, V)` combination at `times`, in order.
fn evaluate_slice(
    params: &SpinStarParams,
    prep: &StatePrep,
    w: &OperatorSpec,
    v: &OperatorSpec,
    times: &[(f64, Option<f64>)],
    opts: &RunOptions,
) -> Result<Vec<ResultRow>> {
    let h = build_hamiltonian(params)?;
    let spectrum = Spectrum::new(&h)?;
    drop(h);
    let w0 = realize_operator(w, params.n_outer)?;
    let v0 = realize_operator(v, params.n_outer)?;
    let engine = ScramblingEngine::new(&spectrum, prep, &w0, &v0)?;
    drop((w0, v0));
    times
        .par_iter()
        .map(|&(t, coord)| to_row(&engine.evaluate(t), coord, opts))
        .collect()
}

/// Dispatches on the sweep kind.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ResultTable> {
    match cfg.sweep {
        Sweep::None => run_time_series_with(cfg, opts),
        Sweep::SiteSweep { .. } | Sweep::SizeSweep { .. } => run_contour_with(cfg, opts),
        Sweep::Scatter { .. } => run_scatter_with(cfg, opts),
    }
}

pub fn run_time_series(cfg: &ScenarioConfig) -> Result<ResultTable> {
    run_time_series_with(cfg, &RunOptions::default())
}

pub fn run_time_series_with(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ResultTable> {
    if cfg.sweep != Sweep::None {
        return Err(Error::param("sweep", "time series takes no sweep"));
    }
    cfg.validate()?;
    let times: Vec<(f64, Option<f64>)> = cfg.grid.times().into_iter().map(|t| (t, None)).collect();
    let rows = evaluate_slice(&cfg.params, &cfg.prep, &cfg.w_spec, &cfg.v_spec, &times, opts)?;
    Ok(ResultTable {
        scenario_name: cfg.name.clone(),
        sweep: cfg.sweep,
        rows,
    })
}

pub fn run_contour(cfg: &ScenarioConfig) -> Result<ResultTable> {
    run_contour_with(cfg, &RunOptions::default())
}

/// One time slice per sweep value; `sweep_coord` is the site index or `N`.
pub fn run_contour_with(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ResultTable> {
    cfg.validate()?;
    let grid = cfg.grid.times();
    let tagged = |c: usize| -> Vec<(f64, Option<f64>)> { grid.iter().map(|&t| (t, Some(c as f64))).collect() };
    let mut rows = Vec::new();
    match cfg.sweep {
        Sweep::SiteSweep { first, last } => {
            for site in first..=last {
                let slice = cfg.site_slice(site);
                rows.extend(evaluate_slice(&slice.params, &slice.prep, &slice.w_spec, &slice.v_spec, &tagged(site), opts)?);
            }
        }
        Sweep::SizeSweep { n_min, n_max } => {
            for n in n_min..=n_max {
                let params = cfg.params.with_n_outer(n);
                rows.extend(evaluate_slice(&params, &cfg.prep, &cfg.w_spec, &cfg.v_spec, &tagged(n), opts)?);
            }
        }
        _ => return Err(Error::param("sweep", "contour needs a site or size sweep")),
    }
    Ok(ResultTable {
        scenario_name: cfg.name.clone(),
        sweep: cfg.sweep,
        rows,
    })
}

pub fn run_scatter(cfg: &ScenarioConfig) -> Result<ResultTable> {
    run_scatter_with(cfg, &RunOptions::default())
}

/// `(C, L, U)` over the grid with `t = grid.start` dropped; the point
/// nearest the tagged time carries `sweep_coord = 1`.
pub fn run_scatter_with(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ResultTable> {
    let Sweep::Scatter { tagged_t } = cfg.sweep else {
        return Err(Error::param("sweep", "scatter needs a scatter sweep"));
    };
    cfg.validate()?;
    let times: Vec<f64> = cfg.grid.times().into_iter().skip(1).collect();
    if times.is_empty() {
        return Err(Error::EmptySweep("scatter grid has no points after t = start".into()));
    }
    let nearest = times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - tagged_t).abs().total_cmp(&(b.1 - tagged_t).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let times: Vec<(f64, Option<f64>)> = times
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, Some(if i == nearest { 1.0 } else { 0.0 })))
        .collect();
    let rows = evaluate_slice(&cfg.params, &cfg.prep, &cfg.w_spec, &cfg.v_spec, &times, opts)?;
    Ok(ResultTable {
        scenario_name: cfg.name.clone(),
        sweep: cfg.sweep,
        rows,
    })
}

/// `max_{i,j} C(W_i, V_j)` over single-term pairs, aligned with the rows
/// of `run_scenario(cfg)`.
pub fn pairwise_maxima(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<f64>> {
    let mut best: Option<Vec<f64>> = None;
    for w in cfg.w_spec.terms() {
        for v in cfg.v_spec.terms() {
            let mut pair = cfg.variant(&format!("{}[{w},{v}]", cfg.name));
            pair.w_spec = OperatorSpec::single(w.site, w.axis);
            pair.v_spec = OperatorSpec::single(v.site, v.axis);
            let table = run_scenario(&pair, opts)?;
            let cs = table.records().map(|r| r.c);
            best = Some(match best {
                None => cs.collect(),
                Some(prev) => prev.into_iter().zip(cs).map(|(a, b)| a.max(b)).collect(),
            });
        }
    }
    Ok(best.unwrap_or_default())
}

fn preset(
    name: &str,
    figure: &str,
    n_outer: usize,
    prep: StatePrep,
    w: OperatorSpec,
    v: OperatorSpec,
    sweep: Sweep,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        figure: figure.to_string(),
        params: SpinStarParams::standard(n_outer),
        prep,
        w_spec: w,
        v_spec: v,
        grid: TimeGrid::standard(),
        sweep,
    }
}

fn sum(sites: std::ops::RangeInclusive<usize>, axis: Axis) -> OperatorSpec {
    OperatorSpec::block(sites, axis).expect("non-empty preset block")
}

fn one(site: usize, axis: Axis) -> OperatorSpec {
    OperatorSpec::single(site, axis)
}

/// Every preset, in listing order.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    use Axis::{X, Z};
    let pure = StatePrep::Pure;
    let cold = StatePrep::Thermal { beta: 10.0 };
    let warm = StatePrep::Thermal { beta: 1.0 };
    let none = Sweep::None;
    let sizes = Sweep::SizeSweep { n_min: 2, n_max: 6 };
    let block_sizes = Sweep::SizeSweep { n_min: 3, n_max: 6 };
    let sites6 = Sweep::SiteSweep { first: 1, last: 6 };
    let sites7 = Sweep::SiteSweep { first: 1, last: 7 };
    let scatter = Sweep::Scatter { tagged_t: FRAC_PI_4 };

    let mut out = vec![
        preset("fig2a", "Fig. 2(a)", 2, pure, one(1, Z), one(0, Z), none),
        preset("fig2b", "Fig. 2(b)", 2, pure, one(1, X), one(0, X), none),
        preset("fig2c", "Fig. 2(c)", 2, cold, one(1, Z), one(0, Z), none),
        preset("fig2d", "Fig. 2(d)", 2, cold, one(1, X), one(0, X), none),
    ];
    for (prep, tag) in [(pure, ["a", "b", "c"]), (cold, ["d", "e", "f"])] {
        out.push(preset(&format!("fig3{}", tag[0]), &format!("Fig. 3({})", tag[0]), 7, prep, sum(1..=3, Z), one(0, Z), none));
        out.push(preset(&format!("fig3{}", tag[1]), &format!("Fig. 3({})", tag[1]), 7, prep, sum(1..=3, X), one(0, X), none));
        out.push(preset(&format!("fig3{}", tag[2]), &format!("Fig. 3({})", tag[2]), 7, prep, sum(1..=3, X), one(0, Z), none));
    }
    for (prep, tag) in [(pure, ["a", "b", "c"]), (warm, ["d", "e", "f"])] {
        let n = 6;
        out.push(preset(&format!("fig4{}", tag[0]), &format!("Fig. 4({})", tag[0]), n, prep, one(1, Z), one(0, Z), sizes));
        out.push(preset(&format!("fig4{}", tag[1]), &format!("Fig. 4({})", tag[1]), n, prep, one(1, X), one(0, X), sizes));
        out.push(preset(&format!("fig4{}", tag[2]), &format!("Fig. 4({})", tag[2]), n, prep, sum(1..=3, Z), one(0, Z), block_sizes));
    }
    out.push(preset("fig4a_sites", "Fig. 4(a)", 6, pure, one(1, Z), one(0, Z), sites6));
    out.push(preset("fig4b_sites", "Fig. 4(b)", 6, pure, one(1, X), one(0, X), sites6));
    out.push(preset("fig4a_sites_n7", "Fig. 4(a)", 7, pure, one(1, Z), one(0, Z), sites7));
    out.push(preset("fig4d_sites", "Fig. 4(d)", 6, warm, one(1, Z), one(0, Z), sites6));
    for (prep, tag) in [(pure, ["a", "b", "c"]), (warm, ["d", "e", "f"])] {
        out.push(preset(&format!("fig5{}", tag[0]), &format!("Fig. 5({})", tag[0]), 5, prep, sum(2..=5, Z), one(1, Z), none));
        out.push(preset(&format!("fig5{}", tag[1]), &format!("Fig. 5({})", tag[1]), 5, prep, sum(2..=5, X), one(1, X), none));
        out.push(preset(&format!("fig5{}", tag[2]), &format!("Fig. 5({})", tag[2]), 10, prep, sum(3..=10, X), sum(1..=2, X), none));
    }
    for (prep, tag) in [(pure, ["a", "b", "c"]), (warm, ["d", "e", "f"])] {
        out.push(preset(&format!("fig6{}", tag[0]), &format!("Fig. 6({})", tag[0]), 5, prep, sum(1..=4, Z), one(0, Z), scatter));
        out.push(preset(&format!("fig6{}", tag[1]), &format!("Fig. 6({})", tag[1]), 5, prep, sum(1..=4, X), one(0, X), scatter));
        out.push(preset(&format!("fig6{}", tag[2]), &format!("Fig. 6({})", tag[2]), 7, prep, sum(1..=4, Z), one(0, X), scatter));
    }
    out
}

pub fn find_scenario(name: &str) -> Option<ScenarioConfig> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

/// Grid time nearest `t`.
pub fn nearest_index(grid: &TimeGrid, t: f64) -> usize {
    let idx = ((t - grid.start) / grid.step()).round();
    (idx.max(0.0) as usize).min(grid.points - 1)
}

/// `n pi` for the first few `n`; used by the near-zero checks.
pub fn multiples_of_pi(count: usize) -> Vec<f64> {
    (1..=count).map(|n| n as f64 * PI).collect()
}
