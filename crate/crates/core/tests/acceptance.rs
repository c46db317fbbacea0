//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every preset is run once; the criteria below read the shared results.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use scramble_core::engine::{ScramblingEngine, Spectrum};
use scramble_core::scenarios::{builtin_scenarios, find_scenario, nearest_index, run_scenario, RunOptions, Sweep};
use scramble_core::scrambling::{is_unitary_hermitian, otoc_scrambling, scrambling_bounds};
use scramble_core::spin::{build_hamiltonian, realize_operator, total_spin, Axis, OperatorSpec};
use scramble_core::tensor::commutator;
use scramble_core::{EvolutionCache, ResultTable, ScenarioConfig, TimeGrid};

// Frozen from tests/oracle/brute_force.py.
const GOLDEN_FIG2A_C_HALF_PI: f64 = 3.9506172839506153;
const GOLDEN_FIG3B_T1: [f64; 3] = [7.062666998286139, 6.749135882359969, 7.397244714737984];

struct Run {
    cfg: ScenarioConfig,
    table: ResultTable,
    elapsed: Duration,
    unitary_hermitian: bool,
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("[{}] {:>2}. {:<22} {}", if ok { "PASS" } else { "FAIL" }, id, name, detail);
    }
}

fn unitary_hermitian(cfg: &ScenarioConfig) -> bool {
    let n = cfg.params.n_outer;
    [&cfg.w_spec, &cfg.v_spec]
        .iter()
        .all(|s| is_unitary_hermitian(&realize_operator(s, n).expect("valid preset")))
}

fn run_all() -> Vec<Run> {
    builtin_scenarios()
        .into_iter()
        .map(|cfg| {
            let start = Instant::now();
            let table = run_scenario(&cfg, &RunOptions::default())
                .unwrap_or_else(|e| panic!("{} failed: {e}", cfg.name));
            let elapsed = start.elapsed();
            eprintln!("  ran {:<16} {:>5} rows in {:>8.2?}", cfg.name, table.rows.len(), elapsed);
            let unitary_hermitian = unitary_hermitian(&cfg);
            Run {
                cfg,
                table,
                elapsed,
                unitary_hermitian,
            }
        })
        .collect()
}

fn single_term(cfg: &ScenarioConfig, w_index: usize) -> ScenarioConfig {
    let term = cfg.w_spec.terms()[w_index];
    let mut out = cfg.variant(&format!("{}_w{}", cfg.name, term));
    out.w_spec = OperatorSpec::single(term.site, term.axis);
    out
}

fn main() -> ExitCode {
    let runs = run_all();
    let by_name: BTreeMap<&str, &Run> = runs.iter().map(|r| (r.cfg.name.as_str(), r)).collect();
    let mut report = Report { failures: 0 };
    println!();

    // 1. Coincidence on the single-site pairs.
    {
        let mut worst = 0.0f64;
        let mut skipped = 0;
        let mut total = Duration::ZERO;
        for name in ["fig2a", "fig2b", "fig2c", "fig2d"] {
            let run = by_name[name];
            total += run.elapsed;
            for r in run.table.records() {
                if r.bounds_defined {
                    worst = worst.max((r.upper - r.c).abs()).max((r.c - r.lower).abs());
                } else {
                    skipped += 1;
                }
            }
        }
        let ok = worst <= 1e-8 && total < Duration::from_secs(5);
        report.line(1, "coincidence", ok, format!("max |U-C|,|C-L| = {worst:.2e} (<= 1e-8), {skipped} undefined points skipped, {total:.2?} (< 5 s)"));
    }

    // 2. Sandwich everywhere.
    {
        let (mut worst, mut checked, mut skipped) = (f64::NEG_INFINITY, 0usize, 0usize);
        let mut first_bad = None;
        for run in &runs {
            for r in run.table.records() {
                if !r.bounds_defined {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                let excess = (r.lower - r.c).max(r.c - r.upper);
                worst = worst.max(excess);
                if excess > 1e-9 && first_bad.is_none() {
                    first_bad = Some(format!(" first violation {} t={}", run.cfg.name, r.t));
                }
            }
        }
        let total: Duration = runs.iter().map(|r| r.elapsed).sum();
        let ok = worst <= 1e-9 && total < Duration::from_secs(600);
        report.line(2, "sandwich", ok, format!(
            "{checked} points, max excess {worst:.2e} (<= 1e-9), {skipped} undefined skipped, all presets in {total:.1?} (< 10 min){}",
            first_bad.unwrap_or_default()
        ));
    }

    // 3. Ceiling for unitary-Hermitian pairs.
    {
        let mut worst = f64::NEG_INFINITY;
        let mut presets = 0;
        for run in runs.iter().filter(|r| r.unitary_hermitian) {
            presets += 1;
            worst = worst.max(run.table.max_c());
        }
        report.line(3, "ceiling", presets > 0 && worst <= 4.0 + 1e-9, format!("{presets} unitary-Hermitian presets, max C = {worst:.12} (<= 4)"));
    }

    // 4. Block bound on the three-term presets.
    {
        let mut worst_ratio = 0.0f64;
        let mut ok = true;
        let mut points = 0;
        for name in ["fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f"] {
            let run = by_name[name];
            let m = run.cfg.w_spec.len();
            let n = run.cfg.v_spec.len();
            let pairs: Vec<ResultTable> = (0..m)
                .map(|i| run_scenario(&single_term(&run.cfg, i), &RunOptions::default()).expect("pairwise run"))
                .collect();
            for (k, r) in run.table.records().enumerate() {
                let pairwise = pairs.iter().map(|p| p.rows[k].record.c).fold(0.0, f64::max);
                let bound = scramble_core::scrambling::block_max_bound(m, n, pairwise);
                points += 1;
                if r.c > bound + 1e-9 {
                    ok = false;
                }
                if bound > 0.0 {
                    worst_ratio = worst_ratio.max(r.c / bound);
                }
            }
        }
        report.line(4, "block bound", ok, format!("{points} points, max C_block / (m^2 n^2 max_pair C) = {worst_ratio:.4} (<= 1)"));
    }

    // 5. OTOC identity.
    {
        let mut worst = 0.0f64;
        let mut presets = 0;
        for run in runs.iter().filter(|r| r.unitary_hermitian) {
            presets += 1;
            for row in &run.table.rows {
                worst = worst.max((row.record.c - otoc_scrambling(row.otoc)).abs());
            }
        }
        report.line(5, "otoc identity", presets > 0 && worst <= 1e-9, format!("{presets} presets, max |C - 2(1 - Re OTOC)| = {worst:.2e} (<= 1e-9)"));
    }

    // 6. Dual path. The runner already refuses disagreement; report the margin.
    {
        let mut worst = 0.0f64;
        let mut points = 0;
        for run in &runs {
            for row in &run.table.rows {
                points += 1;
                worst = worst.max((row.record.c - row.c_moments).abs());
            }
        }
        report.line(6, "dual path", worst <= 1e-9, format!("{points} points, max |C_comm - C_moments| = {worst:.2e} (<= 1e-9)"));
    }

    // 7. Commuting start.
    {
        let mut worst = 0.0f64;
        for run in &runs {
            match run.cfg.sweep {
                Sweep::Scatter { .. } => {
                    let mut probe = run.cfg.variant("t0");
                    probe.sweep = Sweep::None;
                    probe.grid = TimeGrid::new(0.0, run.cfg.grid.stop, 2).unwrap();
                    let t = run_scenario(&probe, &RunOptions::default()).expect("t=0 probe");
                    worst = worst.max(t.rows[0].record.c);
                }
                _ => {
                    for slice in run.table.slices() {
                        assert_eq!(slice[0].record.t, 0.0);
                        worst = worst.max(slice[0].record.c);
                    }
                }
            }
        }
        report.line(7, "commuting start", worst <= 1e-10, format!("max C(0) over {} presets = {worst:.2e} (<= 1e-10)", runs.len()));
    }

    // 8. Conservation and unitarity.
    {
        let mut sizes: Vec<usize> = Vec::new();
        for run in &runs {
            match run.cfg.sweep {
                Sweep::SizeSweep { n_min, n_max } => sizes.extend(n_min..=n_max),
                _ => sizes.push(run.cfg.params.n_outer),
            }
        }
        sizes.sort_unstable();
        sizes.dedup();
        let (mut comm, mut unit) = (0.0f64, 0.0f64);
        for &n in &sizes {
            let params = runs[0].cfg.params.with_n_outer(n);
            let h = build_hamiltonian(&params).unwrap();
            comm = comm.max(commutator(&h, &total_spin(Axis::Z, n)).max_abs());
            let spectrum = Spectrum::new(&h).unwrap();
            for t in [0.5, PI, 2.0 * PI] {
                unit = unit.max(spectrum.propagator_unitarity_defect(t));
            }
            if n <= 7 {
                let cache = EvolutionCache::new(&h).unwrap();
                let u = cache.propagator(1.3);
                let gram = u.adjoint().matmul(&u);
                unit = unit.max(gram.max_abs_diff(&scramble_core::CMatrix::identity(u.dim())));
            }
        }
        report.line(8, "conservation", comm <= 1e-11 && unit <= 1e-10, format!("N in {sizes:?}: max |[H, S_z]| = {comm:.1e} (<= 1e-11), unitarity defect {unit:.1e} (<= 1e-10)"));
    }

    // 9. Qualitative figure claims.
    {
        let pure = by_name["fig2a"].table.max_c();
        let thermal = by_name["fig2c"].table.max_c();
        let claim_thermal = pure > thermal;

        let fig2b = &by_name["fig2b"];
        let grid = fig2b.cfg.grid;
        let cs: Vec<f64> = fig2b.table.records().map(|r| r.c).collect();
        let mut near_zero = true;
        let mut minima = Vec::new();
        for t in [PI, 2.0 * PI] {
            let idx = nearest_index(&grid, t);
            let lo = idx.saturating_sub(10);
            let hi = (idx + 10).min(cs.len() - 1);
            let (arg, min) = (lo..=hi).map(|i| (i, cs[i])).fold((lo, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            near_zero &= arg.abs_diff(idx) <= 1 && min <= 1e-10;
            minima.push(format!("C({:.4})={min:.1e}", grid.times()[arg]));
        }

        let mut raise = Vec::new();
        let mut claim_raise = true;
        for name in ["fig3a", "fig3b", "fig3c"] {
            let run = by_name[name];
            let single = run_scenario(&single_term(&run.cfg, 0), &RunOptions::default()).unwrap();
            claim_raise &= run.table.max_c() > single.max_c();
            raise.push(format!("{name} {:.4}>{:.4}", run.table.max_c(), single.max_c()));
        }
        report.line(9, "qualitative claims", claim_thermal && near_zero && claim_raise, format!(
            "peak fig2a {pure:.4} > fig2c {thermal:.4}; fig2b minima {}; {}",
            minima.join(" "),
            raise.join(", ")
        ));
    }

    // 10. Golden values.
    {
        let eval = |name: &str, t: f64| {
            let cfg = find_scenario(name).unwrap();
            let n = cfg.params.n_outer;
            let spectrum = Spectrum::new(&build_hamiltonian(&cfg.params).unwrap()).unwrap();
            let w = realize_operator(&cfg.w_spec, n).unwrap();
            let v = realize_operator(&cfg.v_spec, n).unwrap();
            ScramblingEngine::new(&spectrum, &cfg.prep, &w, &v).unwrap().evaluate(t)
        };
        let a = eval("fig2a", FRAC_PI_2);
        let b = eval("fig3b", 1.0);
        let bounds = scrambling_bounds(&b.moments);
        let got = [b.c_commutator, bounds.lower, bounds.upper];
        let err_a = (a.c_commutator - GOLDEN_FIG2A_C_HALF_PI).abs();
        let err_b = got.iter().zip(GOLDEN_FIG3B_T1).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
        report.line(10, "golden regression", err_a <= 1e-9 && err_b <= 1e-9, format!(
            "fig2a C(pi/2) = {:.13} (err {err_a:.1e}); fig3b (C, L, U)(1) = ({:.10}, {:.10}, {:.10}) (err {err_b:.1e})",
            a.c_commutator, got[0], got[1], got[2]
        ));
    }

    // 11. Performance envelope.
    {
        let fig3 = ["fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f"]
            .iter()
            .map(|n| by_name[n].elapsed)
            .max()
            .unwrap();
        let fig5c = by_name["fig5c"].elapsed;
        let fig5f = by_name["fig5f"].elapsed;
        let threads = rayon::current_num_threads();
        report.line(11, "performance", fig3 < Duration::from_secs(60) && fig5c < Duration::from_secs(600), format!(
            "slowest fig3 preset {fig3:.2?} (< 60 s), fig5c {fig5c:.2?} (< 10 min), fig5f {fig5f:.2?}, {threads} thread(s)"
        ));
    }

    println!();
    if report.failures == 0 {
        println!("acceptance: all 11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 11 criteria failed", report.failures);
        ExitCode::FAILURE
    }
}
