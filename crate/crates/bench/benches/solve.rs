//! Criterion benchmarks: end-to-end solves on the bundled radial feeder and
//! a meshed transmission case, plus the LP-only inner kernel.

use criterion::{criterion_group, criterion_main, Criterion};
use slopf_core::{build_skeleton, FormulationOptions, Mode, RawCase, SlpParams};

fn fixture(name: &str) -> slopf_core::Network {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/cases/");
    let text = std::fs::read_to_string(format!("{root}{name}.m")).unwrap();
    slopf_core::network::build_network(&RawCase::parse(&text).unwrap()).unwrap()
}

fn bench_radial(c: &mut Criterion) {
    let net = fixture("case33");
    c.bench_function("radial_case33", |b| {
        b.iter(|| slopf_core::run_algorithm2(&net, &SlpParams::default()).unwrap())
    });
}

fn bench_meshed(c: &mut Criterion) {
    let net = fixture("case57");
    let mut group = c.benchmark_group("meshed");
    group.sample_size(10);
    group.bench_function("meshed_case57", |b| {
        b.iter(|| slopf_core::run_algorithm3(&net, &SlpParams::default()).unwrap())
    });
    group.finish();
}

fn bench_lp_kernel(c: &mut Criterion) {
    let net = fixture("case57");
    let skel = build_skeleton(
        &net,
        &FormulationOptions {
            mode: Mode::Meshed,
            ..Default::default()
        },
    );
    c.bench_function("lp_skeleton_case57", |b| {
        b.iter(|| slopf_core::lp::solve_lp(&skel.model).unwrap())
    });
}

criterion_group!(benches, bench_radial, bench_meshed, bench_lp_kernel);
criterion_main!(benches);
