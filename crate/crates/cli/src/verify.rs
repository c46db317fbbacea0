//! Invariant suite behind `scramble verify`.

use std::f64::consts::PI;

use scramble_core::engine::Spectrum;
use scramble_core::scenarios::{pairwise_maxima, run_scenario, RunOptions, Sweep};
use scramble_core::scrambling::{block_max_bound, is_unitary_hermitian, otoc_scrambling, triangle_ceiling};
use scramble_core::spin::{build_hamiltonian, realize_operator, total_spin};
use scramble_core::tensor::commutator;
use scramble_core::{Axis, Error, ResultTable, ScenarioConfig, StatePrep, TimeGrid};

use crate::CliError;

/// Check names, in report order.
pub const CHECKS: [&str; 9] = [
    "dual_path",
    "commuting_start",
    "sandwich",
    "triangle_ceiling",
    "coincidence",
    "ceiling_4",
    "otoc_identity",
    "block_bound",
    "conservation",
];

/// Thermal presets above this dimension bound the pairwise maximum by the
/// single-term ceiling 4 instead of running every pair.
pub const EXACT_PAIRWISE_MAX_DIM: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub scenario: String,
    pub t: f64,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub scenarios: Vec<String>,
    pub tallies: Vec<(&'static str, Tally)>,
    pub first_failure: Option<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn tally(&self, check: &str) -> Tally {
        self.tallies.iter().find(|(c, _)| *c == check).map(|(_, t)| *t).unwrap_or_default()
    }

    pub fn render(&self) -> String {
        let mut out = format!("verified {} scenario(s)\n", self.scenarios.len());
        out.push_str(&format!("{:<18} {:>8} {:>8} {:>8}\n", "check", "pass", "fail", "skipped"));
        for (check, t) in &self.tallies {
            out.push_str(&format!("{:<18} {:>8} {:>8} {:>8}\n", check, t.pass, t.fail, t.skipped));
        }
        match &self.first_failure {
            None => out.push_str("all checks passed\n"),
            Some(f) => out.push_str(&format!(
                "FAILED: first failure scenario={} t={} check={} ({})\n",
                f.scenario, f.t, f.check, f.detail
            )),
        }
        out
    }
}

struct Suite {
    scale: f64,
    tallies: Vec<(&'static str, Tally)>,
    first_failure: Option<Failure>,
}

impl Suite {
    fn tol(&self, base: f64) -> f64 {
        base * self.scale
    }

    fn entry(&mut self, check: &'static str) -> &mut Tally {
        &mut self.tallies.iter_mut().find(|(c, _)| *c == check).expect("known check").1
    }

    fn skip(&mut self, check: &'static str) {
        self.entry(check).skipped += 1;
    }

    fn record(&mut self, check: &'static str, scenario: &str, t: f64, ok: bool, detail: impl FnOnce() -> String) {
        let entry = self.entry(check);
        if ok {
            entry.pass += 1;
        } else {
            entry.fail += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(Failure {
                    scenario: scenario.to_string(),
                    t,
                    check,
                    detail: detail(),
                });
            }
        }
    }

    fn check_table(&mut self, cfg: &ScenarioConfig, table: &ResultTable, unitary_hermitian: bool) {
        let name = cfg.name.as_str();
        let (tight, coincide) = (self.tol(1e-9), self.tol(1e-8));
        for row in &table.rows {
            let r = &row.record;
            let diff = (r.c - row.c_moments).abs();
            self.record("dual_path", name, r.t, diff <= tight, || format!("|diff| = {diff:e}"));
            let ceiling = triangle_ceiling(&row.moments);
            self.record("triangle_ceiling", name, r.t, r.c <= ceiling + tight, || format!("C = {} > {ceiling}", r.c));
            if r.bounds_defined {
                let ok = r.lower - tight <= r.c && r.c <= r.upper + tight;
                self.record("sandwich", name, r.t, ok, || format!("L = {}, C = {}, U = {}", r.lower, r.c, r.upper));
            } else {
                self.skip("sandwich");
            }
            if unitary_hermitian {
                if r.bounds_defined {
                    let gap = (r.upper - r.c).abs().max((r.c - r.lower).abs());
                    self.record("coincidence", name, r.t, gap <= coincide, || format!("gap {gap:e}"));
                } else {
                    self.skip("coincidence");
                }
                self.record("ceiling_4", name, r.t, r.c <= 4.0 + tight, || format!("C = {}", r.c));
                let dev = (r.c - otoc_scrambling(row.otoc)).abs();
                self.record("otoc_identity", name, r.t, dev <= tight, || format!("deviation {dev:e}"));
            }
        }
        for slice in table.slices() {
            if let Some(first) = slice.first().filter(|r| r.record.t == 0.0) {
                let c = first.record.c;
                self.record("commuting_start", name, 0.0, c <= self.tol(1e-10), || format!("C(0) = {c:e}"));
            }
        }
    }
}

fn unitary_hermitian(cfg: &ScenarioConfig) -> scramble_core::Result<bool> {
    let n = cfg.params.n_outer;
    Ok(is_unitary_hermitian(&realize_operator(&cfg.w_spec, n)?) && is_unitary_hermitian(&realize_operator(&cfg.v_spec, n)?))
}

fn sizes(cfg: &ScenarioConfig) -> Vec<usize> {
    match cfg.sweep {
        Sweep::SizeSweep { n_min, n_max } => (n_min..=n_max).collect(),
        _ => vec![cfg.params.n_outer],
    }
}

fn core_error(cfg: &ScenarioConfig, e: Error) -> CliError {
    CliError::Config(format!("{}: {e}", cfg.name))
}

/// Runs every check over `scenarios`; tolerances are multiplied by `scale`.
pub fn verify(scenarios: &[ScenarioConfig], scale: f64) -> Result<VerifyReport, CliError> {
    let mut suite = Suite {
        scale,
        tallies: CHECKS.iter().map(|&c| (c, Tally::default())).collect(),
        first_failure: None,
    };
    let opts = RunOptions {
        dual_path_tol: 1e-9 * scale,
    };
    for cfg in scenarios {
        let name = cfg.name.as_str();
        let table = match run_scenario(cfg, &opts) {
            Ok(t) => t,
            Err(e) if e.is_invariant_violation() => {
                let t = match e {
                    Error::DualPathMismatch { t, .. } | Error::NegativeScrambling { t, .. } => t,
                    _ => f64::NAN,
                };
                suite.record("dual_path", name, t, false, || e.to_string());
                continue;
            }
            Err(e) => return Err(core_error(cfg, e)),
        };
        let uh = unitary_hermitian(cfg).map_err(|e| core_error(cfg, e))?;
        suite.check_table(cfg, &table, uh);

        if matches!(cfg.sweep, Sweep::Scatter { .. }) {
            let mut probe = cfg.variant(name);
            probe.sweep = Sweep::None;
            probe.grid = TimeGrid::new(cfg.grid.start, cfg.grid.stop, 2).map_err(|e| core_error(cfg, e))?;
            match run_scenario(&probe, &opts) {
                Ok(t0) if t0.rows[0].record.t == 0.0 => {
                    let c = t0.rows[0].record.c;
                    suite.record("commuting_start", name, 0.0, c <= suite.tol(1e-10), || format!("C(0) = {c:e}"));
                }
                Ok(_) => suite.skip("commuting_start"),
                Err(e) => suite.record("commuting_start", name, 0.0, false, || e.to_string()),
            }
        }

        let (m, n) = (cfg.w_spec.len(), cfg.v_spec.len());
        if m * n > 1 {
            let exact = cfg.prep == StatePrep::Pure || cfg.params.dim() <= EXACT_PAIRWISE_MAX_DIM;
            let maxima = if exact {
                pairwise_maxima(cfg, &opts).map_err(|e| core_error(cfg, e))?
            } else {
                vec![4.0; table.rows.len()]
            };
            for (r, &pair) in table.records().zip(&maxima) {
                let bound = block_max_bound(m, n, pair);
                suite.record("block_bound", name, r.t, r.c <= bound + suite.tol(1e-9), || format!("C = {} > {bound}", r.c));
            }
        } else {
            suite.skip("block_bound");
        }

        for size in sizes(cfg) {
            let params = cfg.params.with_n_outer(size);
            let h = build_hamiltonian(&params).map_err(|e| core_error(cfg, e))?;
            let comm = commutator(&h, &total_spin(Axis::Z, size)).max_abs();
            suite.record("conservation", name, f64::NAN, comm <= suite.tol(1e-11), || format!("N = {size}: |[H, S_z]| = {comm:e}"));
            let spectrum = Spectrum::new(&h).map_err(|e| core_error(cfg, e))?;
            for t in [1.0, PI] {
                let defect = spectrum.propagator_unitarity_defect(t);
                suite.record("conservation", name, t, defect <= suite.tol(1e-10), || format!("N = {size}: unitarity defect {defect:e}"));
            }
        }
    }
    Ok(VerifyReport {
        scenarios: scenarios.iter().map(|s| s.name.clone()).collect(),
        tallies: suite.tallies,
        first_failure: suite.first_failure,
    })
}
