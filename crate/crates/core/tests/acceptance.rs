//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers. Wall-clock budgets are asserted in release builds
//! only; numeric assertions always run.
//!
//! Reference values live in fixtures/oracles/*.json and were produced once
//! by external solvers (see tools/); the bundled case data is described in
//! fixtures/README.md.

use slopf_core::analysis::{self, OracleFixture};
use slopf_core::cuts;
use slopf_core::lp::ClarabelBackend;
use slopf_core::network::{build_network, two_port};
use slopf_core::report::SolveStatus;
use slopf_core::slp::{toy2d, StartStrategy};
use slopf_core::{RawCase, SlpParams};
use std::path::PathBuf;
use std::time::Instant;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load_case(name: &str) -> slopf_core::Network {
    let path = fixture_dir().join("cases").join(format!("{name}.m"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {path:?}"));
    build_network(&RawCase::parse(&text).expect("fixture parses")).expect("fixture builds")
}

fn oracle(name: &str) -> OracleFixture {
    let path = fixture_dir().join("oracles").join(format!("{name}.json"));
    OracleFixture::load(&path).unwrap_or_else(|e| panic!("missing oracle {name}: {e}"))
}

fn assert_runtime(label: &str, elapsed: f64, budget_s: f64) {
    println!("    [{label}] wall time {elapsed:.2} s (budget {budget_s} s)");
    if !cfg!(debug_assertions) {
        assert!(
            elapsed <= budget_s,
            "{label}: {elapsed:.2} s exceeds the {budget_s} s budget"
        );
    }
}

/// Criterion 1: the two-variable demonstration problem.
#[test]
fn criterion_1_toy_problem() {
    let t0 = Instant::now();
    let backend = ClarabelBackend::default();

    // single-run reproduction from the stated start
    let proj = toy2d::solve_toy(10.0, [-2.0, 2.0], true, 1e-4, 500, &backend);
    assert!(proj.converged);
    let dist = (proj.x[0].powi(2) + (proj.x[1] - 1.0).powi(2)).sqrt();
    assert!(dist <= 1e-3, "projection-anchored run landed {dist:.2e} from [0,1]");
    let plain = toy2d::solve_toy(10.0, [-2.0, 2.0], false, 1e-4, 500, &backend);
    assert!(plain.converged);

    // robustness protocol: 1000 starts, three penalty weights, both variants
    let rhos = [1.0, 10.0, 100.0];
    let plain_sum = toy2d::robustness(1000, 1, &rhos, false, 1e-4, 500);
    let proj_sum = toy2d::robustness(1000, 1, &rhos, true, 1e-4, 500);
    for s in plain_sum.iter().chain(proj_sum.iter()) {
        assert_eq!(s.converged, s.starts, "rho={} variant projection={}", s.rho, s.projection);
    }
    let mean = |rows: &[toy2d::RobustnessSummary]| {
        rows.iter().map(|r| r.mean_iterations).sum::<f64>() / rows.len() as f64
    };
    let (mp, mq) = (mean(&plain_sum), mean(&proj_sum));
    let ratio = mp / mq;
    assert!(mq < mp, "projection must be faster on average");
    assert!((1.2..=2.5).contains(&ratio), "plain/projection iteration ratio {ratio:.2}");
    println!(
        "criterion 1: PASS — landing {:.1e} from x*, 6000/6000 converged, plain {:.1} vs projection {:.1} iterations (ratio {:.2})",
        dist, mp, mq, ratio
    );
    assert_runtime("criterion 1", t0.elapsed().as_secs_f64(), 60.0);
}

/// Criterion 2: radial feeders under the three flat starts.
#[test]
fn criterion_2_radial_feeders() {
    let t0 = Instant::now();
    let expected = [("case33", 386.03), ("case69", 434.18), ("case119", 2434.65)];
    for (name, target) in expected {
        let net = load_case(name);
        for start in [StartStrategy::Fs1, StartStrategy::Fs2, StartStrategy::Fs3] {
            let params = SlpParams { start: start.clone(), ..Default::default() };
            let report = slopf_core::run_algorithm2(&net, &params).expect("radial driver");
            assert_eq!(report.status, SolveStatus::Converged, "{name} {start:?}");
            let obj = report.objective.unwrap();
            let rel = (obj - target).abs() / target;
            assert!(rel <= 1e-3, "{name} {start:?}: objective {obj:.2} vs {target} ({rel:.2e})");
            assert!(report.iterations <= 5, "{name} {start:?}: {} iterations", report.iterations);
            assert!(report.mean_f <= 1e-5, "{name} {start:?}: mean F {:.2e}", report.mean_f);
            println!(
                "    {name} {start:?}: objective {obj:.2} (target {target}), k={}, mean F {:.1e}",
                report.iterations, report.mean_f
            );
        }
    }
    println!("criterion 2: PASS — three feeders, three flat starts each");
    assert_runtime("criterion 2", t0.elapsed().as_secs_f64(), 5.0);
}

const MESHED: [&str; 10] = [
    "case5", "case6ww", "case9", "case14", "case24", "case30", "case39", "case57", "case118",
    "case300",
];

/// Criterion 3: desk-scale meshed cases under FS1 and the DC warm start.
#[test]
fn criterion_3_meshed_desk_scale() {
    let t0 = Instant::now();
    for name in MESHED {
        let net = load_case(name);
        let reference = oracle(name);
        for start in [StartStrategy::Fs1, StartStrategy::DcWarm] {
            let params = SlpParams { start: start.clone(), ..Default::default() };
            let report = slopf_core::run_algorithm3(&net, &params).expect("meshed driver");
            assert_eq!(report.status, SolveStatus::Converged, "{name} {start:?}");
            assert!(
                report.mean_f_h <= 1e-5,
                "{name} {start:?}: mean(F u H) = {:.2e}",
                report.mean_f_h
            );
            let gap =
                analysis::optimality_gap(reference.objective, report.objective.unwrap()).unwrap();
            assert!(
                gap.abs() <= 0.05,
                "{name} {start:?}: gap {gap:.4}% vs reference {}",
                reference.objective
            );
            println!(
                "    {name} {start:?}: k={}, gap {gap:+.4}%, mean(F u H) {:.1e}",
                report.iterations, report.mean_f_h
            );
        }
    }
    println!("criterion 3: PASS — 10 cases x (FS1, DC warm start)");
    assert_runtime("criterion 3", t0.elapsed().as_secs_f64(), 60.0);
}

/// Criterion 4: relaxation driver properties on every fixture with a
/// committed relaxation reference.
#[test]
fn criterion_4_relaxation_properties() {
    let t0 = Instant::now();
    let cases = [
        "case5", "case6ww", "case9", "case14", "case24", "case30", "case39", "case57", "case33",
        "case69", "case119",
    ];
    for name in cases {
        let net = load_case(name);
        let reference = oracle(name);
        let socp = reference
            .socp_objective
            .unwrap_or_else(|| panic!("{name}: no relaxation reference"));
        let params = SlpParams::default();
        let report = slopf_core::run_algorithm1(&net, &params).expect("relaxation driver");
        assert_eq!(report.status, SolveStatus::Converged, "{name}");
        // monotone LP objective sequence
        for w in report.trace.windows(2) {
            assert!(
                w[1].lp_objective >= w[0].lp_objective - 1e-6 * w[0].lp_objective.abs().max(1.0),
                "{name}: objective decreased {} -> {}",
                w[0].lp_objective,
                w[1].lp_objective
            );
        }
        // terminal relaxation-side feasibility
        let last = report.trace.last().unwrap();
        assert!(last.min_f_signed >= -params.eps, "{name}: min F {:.2e}", last.min_f_signed);
        assert!(last.max_g <= params.eps_th, "{name}: max G {:.2e}", last.max_g);
        // outer approximation stays below the relaxation optimum
        let obj = report.objective.unwrap();
        assert!(
            obj <= socp * (1.0 + 1e-4),
            "{name}: outer approximation {obj:.4} above relaxation optimum {socp:.4}"
        );
        println!(
            "    {name}: k={}, objective {obj:.2} <= relaxation {socp:.2} (+0.01%), min F {:.1e}",
            report.iterations, last.min_f_signed
        );
    }
    println!("criterion 4: PASS — monotone, feasible, bounded by the relaxation optimum");
    assert_runtime("criterion 4", t0.elapsed().as_secs_f64(), 60.0);
}

/// Criterion 5: cut soundness and gradient accuracy by sampling.
#[test]
fn criterion_5_cut_soundness() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
    // supporting halfspaces of the epigraph
    for _ in 0..10_000 {
        let anchor = (
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(0.7..1.3),
        );
        let tan = cuts::soc_tangent(anchor.0, anchor.1, anchor.2).unwrap();
        let (wr, wi, wj) = (
            rng.gen_range(-1.2..1.2),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(0.7..1.3),
        );
        let (f, _) = cuts::qol_value_grad(wr, wi, wj).unwrap();
        let w_i = f + rng.gen_range(0.0..0.5);
        assert!(tan.eval(wr, wi, wj) <= w_i + 1e-9);
    }
    // supporting halfspaces of the thermal disk
    for _ in 0..10_000 {
        let s = rng.gen_range(0.5..3.0);
        let cut = loop {
            let (p0, q0): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if p0.hypot(q0) > 1e-3 {
                break cuts::thermal_halfspace(p0, q0, s).unwrap();
            }
        };
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = s * rng.gen_range(0.0..1.0f64).sqrt();
        assert!(cut.eval(r * ang.cos(), r * ang.sin()) <= 1e-9);
    }
    // analytic gradients against central differences
    let h = 1e-6;
    for _ in 0..1000 {
        let (wr, wi, wj) = (
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.5..1.5),
        );
        let (_, g) = cuts::qol_value_grad(wr, wi, wj).unwrap();
        let f = |a: f64, b: f64, c: f64| (a * a + b * b) / c;
        let fd = [
            (f(wr + h, wi, wj) - f(wr - h, wi, wj)) / (2.0 * h),
            (f(wr, wi + h, wj) - f(wr, wi - h, wj)) / (2.0 * h),
            (f(wr, wi, wj + h) - f(wr, wi, wj - h)) / (2.0 * h),
        ];
        for k in 0..3 {
            assert!((g[k] - fd[k]).abs() <= 1e-6);
        }
        let (wr0, wi0) = (rng.gen_range(0.5..1.5), rng.gen_range(-0.8..0.8));
        let t = cuts::atan2_tangent(wi0, wr0).unwrap();
        let fd_wi = ((wi0 + h).atan2(wr0) - (wi0 - h).atan2(wr0)) / (2.0 * h);
        let fd_wr = (wi0.atan2(wr0 + h) - wi0.atan2(wr0 - h)) / (2.0 * h);
        assert!((t.d_wi - fd_wi).abs() <= 1e-6);
        assert!((t.d_wr - fd_wr).abs() <= 1e-6);
    }
    println!("criterion 5: PASS — 2x10^4 support samples, 10^3 gradient checks at 1e-6");
}

/// Criterion 6: linear squared-current rows against complex arithmetic.
#[test]
fn criterion_6_current_linearization() {
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(66);
    let mut checked = 0usize;
    for name in ["case14", "case33", "case118"] {
        let net = load_case(name);
        for br in &net.branches {
            for _ in 0..1000 {
                let vi = rng.gen_range(0.9..1.1);
                let vj = rng.gen_range(0.9..1.1);
                let th: f64 = rng.gen_range(-0.5..0.5);
                let (w_i, w_j) = (vi * vi, vj * vj);
                let wr = vi * vj * th.cos();
                let wi = vi * vj * th.sin();
                let (l_ij, l_ji) = br.currents_sq(w_i, w_j, wr, wi);
                let (yff, yft, ytf, ytt) = two_port(br.y_series, br.b_ch, br.tau, br.theta_shift);
                let v_i = Complex64::from_polar(vi, th);
                let v_j = Complex64::from_polar(vj, 0.0);
                let exact_f = (yff * v_i + yft * v_j).norm_sqr();
                let exact_t = (ytf * v_i + ytt * v_j).norm_sqr();
                assert!(
                    (l_ij - exact_f).abs() <= 1e-9 * exact_f.max(1.0),
                    "{name}: forward current mismatch {l_ij} vs {exact_f}"
                );
                assert!(
                    (l_ji - exact_t).abs() <= 1e-9 * exact_t.max(1.0),
                    "{name}: reverse current mismatch"
                );
                checked += 1;
            }
        }
    }
    println!("criterion 6: PASS — {checked} random voltage assignments across 3 fixtures");
}

/// Criterion 7: 57-bus nodal prices against the reference duals.
#[test]
fn criterion_7_pricing() {
    let net = load_case("case57");
    let reference = oracle("case57");
    assert!(!reference.lmp.is_empty(), "case57 oracle carries no prices");
    let report = slopf_core::run_algorithm3(&net, &SlpParams::default()).unwrap();
    assert_eq!(report.status, SolveStatus::Converged);
    let prices = analysis::extract_prices(&net, &report).unwrap();
    let mean_err = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
    };
    let lmp_err = mean_err(&prices.lmp, &reference.lmp);
    let qlmp_err = mean_err(&prices.qlmp, &reference.qlmp);
    assert!(lmp_err <= 0.05, "mean LMP error {lmp_err:.4} $/MWh");
    assert!(qlmp_err <= 0.05, "mean Q-LMP error {qlmp_err:.4} $/MVArh");
    println!(
        "criterion 7: PASS — mean |LMP| error {lmp_err:.4} $/MWh, mean |Q-LMP| error {qlmp_err:.4} $/MVArh"
    );
}

/// Criterion 8: robustness from 100 random starting points.
#[test]
fn criterion_8_random_start_robustness() {
    use rayon::prelude::*;
    let t0 = Instant::now();
    for name in ["case33", "case57"] {
        let net = load_case(name);
        let reports: Vec<_> = (0..100u64)
            .into_par_iter()
            .map(|seed| {
                let params = SlpParams {
                    start: StartStrategy::Random(seed + 1),
                    ..Default::default()
                };
                slopf_core::solve_auto(&net, &params).expect("solve")
            })
            .collect();
        let mut objs = Vec::new();
        let mut iters = Vec::new();
        for r in &reports {
            assert_eq!(r.status, SolveStatus::Converged, "{name}");
            objs.push(r.objective.unwrap());
            iters.push(r.iterations);
        }
        let (lo, hi) = objs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), o| (a.min(*o), b.max(*o)));
        let spread = (hi - lo) / lo;
        assert!(spread <= 1e-3, "{name}: objective spread {spread:.2e}");
        println!(
            "    {name}: 100/100 converged, objectives within {:.2e}, iterations {}..{} (mean {:.1})",
            spread,
            iters.iter().min().unwrap(),
            iters.iter().max().unwrap(),
            iters.iter().sum::<usize>() as f64 / 100.0
        );
    }
    println!("criterion 8: PASS — 100 random starts per case, single objective cluster");
    assert_runtime("criterion 8", t0.elapsed().as_secs_f64(), 120.0);
}
