use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use postselect_core::oracle::{fuzz_projective, sample_projective, sample_state, seeded_rng, FuzzConfig};
use postselect_core::regions::emit_ternary;
use postselect_core::{
    check_projective_raw, construct_generalized, construct_projective, evaluate_witness, OutcomeDistribution,
    ProjectiveWitness, ScenarioTriple,
};

fn scenario() -> ScenarioTriple {
    let p = OutcomeDistribution::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    ScenarioTriple::new(0.2, 0.25, p).unwrap()
}

fn evaluate(c: &mut Criterion) {
    let mut rng = seeded_rng(1, 0);
    let w = ProjectiveWitness::new(
        sample_state(4, &mut rng),
        sample_state(4, &mut rng),
        sample_projective(4, 3, &mut rng),
    )
    .unwrap();
    c.bench_function("evaluate_witness d=4 n=3", |b| b.iter(|| evaluate_witness(black_box(&w))));
}

fn checks(c: &mut Criterion) {
    let sc = scenario();
    c.bench_function("check_projective_raw n=4", |b| b.iter(|| check_projective_raw(black_box(&sc))));
}

fn construction(c: &mut Criterion) {
    let sc = scenario();
    c.bench_function("construct_projective n=4", |b| b.iter(|| construct_projective(black_box(&sc))));
    c.bench_function("construct_generalized n=4", |b| b.iter(|| construct_generalized(black_box(&sc))));
}

fn fuzzing(c: &mut Criterion) {
    let mut group = c.benchmark_group("fuzz");
    group.sample_size(20);
    for (d, n) in [(2, 2), (4, 4)] {
        group.bench_function(format!("4096 samples d={d} n={n}"), |b| {
            b.iter_batched(
                || FuzzConfig::new(d, n, 4096, 3),
                |cfg| fuzz_projective(&cfg),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn regions(c: &mut Criterion) {
    let mut group = c.benchmark_group("regions");
    group.sample_size(10);
    group.bench_function("emit_ternary 400", |b| b.iter(|| emit_ternary(black_box(400))));
    group.finish();
}

criterion_group!(benches, evaluate, checks, construction, fuzzing, regions);
criterion_main!(benches);
