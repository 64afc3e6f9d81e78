use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tt_core::gen::{generate, GenParams};
use tt_core::mipcore::{solve_exact, write_lp, Limits};
use tt_core::subgroup::run_subgroup;
use tt_core::tip::{build_tip, CapacityMode, Weights};

fn generate_small(c: &mut Criterion) {
    let params = GenParams::preset("small", 1).unwrap();
    c.bench_function("generate small", |b| b.iter(|| generate(black_box(&params)).unwrap()));
}

fn build_small(c: &mut Criterion) {
    let inst = generate(&GenParams::preset("small", 1).unwrap()).unwrap().instance;
    let weights = Weights::default();
    c.bench_function("build small timetable program", |b| {
        b.iter(|| build_tip(black_box(&inst), &inst.groups, &weights, CapacityMode::Hard).unwrap())
    });
    let (model, _) = build_tip(&inst, &inst.groups, &weights, CapacityMode::Hard).unwrap();
    c.bench_function("write small LP", |b| b.iter(|| write_lp(black_box(&model)).unwrap()));
}

fn refine_class(c: &mut Criterion) {
    let inst = generate(&GenParams::preset("section4", 2).unwrap()).unwrap().instance;
    let limits = Limits { threads: 1, ..Limits::default() };
    c.bench_function("subgroup refinement at class scale", |b| {
        b.iter(|| run_subgroup(black_box(&inst), |m| solve_exact(m, &limits), 200).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = generate_small, build_small, refine_class
}
criterion_main!(benches);
