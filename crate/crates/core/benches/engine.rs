//! Benchmarks for the data-parallel inner loops against their
//! sequential fallbacks: run unfolding over the initial-store product,
//! the cut-vector property sweep, and the corpus differential.
//!
//! Build with the default `parallel` feature to compare both paths at
//! run time; without it (`--no-default-features`) every group measures
//! the sequential engine only.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use secmc::corpus;
use secmc::frame::build_frame_opts;
use secmc::lang::Program;
use secmc::logic::Mode;
use secmc::oracle::{self, GenBounds, TraceOpts};
use secmc::props::{self, CheckOpts, PropertyId};
use secmc::trace;

fn fig1_program() -> (Program, secmc::SecurityContext) {
    let ctx = corpus::fig1_context(true);
    let program = Program::new(
        "(if u = 1 then p := s); if s && h = 1 then loop",
        ctx.declared(),
    )
    .unwrap();
    (program, ctx)
}

fn bench_unfold(c: &mut Criterion) {
    // a wider store product (64 runs) with real per-run work
    let ctx = secmc::SecurityContext::new(
        &["A"],
        &[
            ("a", &[0, 1]),
            ("b", &[0, 1]),
            ("c", &[0, 1]),
            ("d", &[0, 1]),
            ("e", &[0, 1]),
            ("f", &[0, 1]),
            ("i", &[0]),
            ("j", &[0]),
        ],
    )
    .with_read("A", &["a", "b"]);
    let program = Program::new(
        "for i = 0 .. 6 do { for j = 0 .. 6 do { a := a ^ b; b := (b + c * d) - e }; f := f ^ a }",
        ctx.declared(),
    )
    .unwrap();
    let mut group = c.benchmark_group("unfold_runs");
    for (label, parallel) in [("parallel", true), ("sequential", false)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallel, |b, &par| {
            b.iter(|| trace::unfold_all(&program, 10_000, 4096, par).unwrap())
        });
    }
    group.finish();
}

fn bench_property_sweep(c: &mut Criterion) {
    let (program, ctx) = fig1_program();
    let frame = build_frame_opts(&program, &ctx, 10_000, 4096, true).unwrap();
    let mut group = c.benchmark_group("ti_rd_sweep");
    for (label, parallel) in [("parallel", true), ("sequential", false)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallel, |b, &par| {
            let opts = CheckOpts {
                mode: Mode::Exhaustive,
                parallel: par,
                exhaustive_bound: u128::MAX,
                ..CheckOpts::default()
            };
            b.iter(|| props::check(&frame, PropertyId::TiRd, &opts).unwrap())
        });
    }
    group.finish();
}

fn bench_differential(c: &mut Criterion) {
    // the fuzz workload: many independent program/context pairs, the
    // natural unit of parallel work
    let entries: Vec<_> = (0..48)
        .map(|seed| oracle::gen_entry(seed, GenBounds::default()))
        .collect();
    let mut group = c.benchmark_group("seeded_differential");
    group.sample_size(10);
    for (label, parallel) in [("parallel", true), ("sequential", false)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &parallel, |b, &par| {
            let trace_opts = TraceOpts {
                parallel: false,
                ..TraceOpts::default()
            };
            let check_opts = CheckOpts {
                parallel: false,
                ..CheckOpts::default()
            };
            b.iter(|| {
                let reports = secmc::par::map(entries.clone(), par, |(_, program, ctx)| {
                    oracle::differential(&program, &ctx, &trace_opts, &check_opts)
                        .unwrap()
                        .disagreements()
                });
                assert!(reports.iter().all(|d| *d == 0));
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_unfold, bench_property_sweep, bench_differential);
criterion_main!(benches);
