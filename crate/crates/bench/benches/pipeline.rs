use criterion::{criterion_group, criterion_main, Criterion};
use ness_bench::{brickwork, macro_circuit};
use ness_core::circuit::{compile_circuit, count_satisfying, BooleanFunction};
use ness_core::lindblad::{build_liouvillian, spectral_gap, steady_state, LiouvillianModel};
use ness_core::sampler::{build_plan, joint_distribution, sample_gamma_parallel};
use ness_core::Coupling;
use std::hint::black_box;

fn compile(c: &mut Criterion) {
    let circ = macro_circuit(4, 6);
    c.bench_function("compile_circuit/n4_layers6", |b| {
        b.iter(|| compile_circuit(black_box(&circ), Coupling::new(1.0).unwrap()))
    });
}

fn sampler(c: &mut Criterion) {
    let compiled = compile_circuit(&brickwork(2, 2), Coupling::new(1.0).unwrap()).unwrap();
    let chains = compiled.chains().unwrap();
    let plan = build_plan(&compiled.encoder_list()).unwrap();
    c.bench_function("joint_distribution/n2_layers2", |b| b.iter(|| joint_distribution(&chains, &plan)));
    let dist = joint_distribution(&chains, &plan).unwrap();
    let mut g = c.benchmark_group("sample_gamma_1e5");
    for workers in [1, 4] {
        g.bench_function(format!("workers{workers}"), |b| b.iter(|| sample_gamma_parallel(&dist, 100_000, 1, workers)));
    }
    g.finish();
}

fn counting(c: &mut Criterion) {
    let f = BooleanFunction::from_fn(3, |x| x.count_ones() >= 2).unwrap();
    let mut g = c.benchmark_group("count_satisfying");
    g.sample_size(10);
    g.bench_function("majority3", |b| b.iter(|| count_satisfying(&f, Coupling::new(1.0).unwrap())));
    g.finish();
}

fn liouvillian(c: &mut Criterion) {
    let mut g = c.benchmark_group("liouvillian");
    g.sample_size(10);
    let liou = build_liouvillian(&LiouvillianModel::xx(4, Coupling::new(1.0).unwrap()).unwrap());
    g.bench_function("steady_state/L4", |b| b.iter(|| steady_state(&liou)));
    g.bench_function("spectral_gap/L4", |b| b.iter(|| spectral_gap(&liou)));
    g.finish();
}

criterion_group!(benches, compile, sampler, counting, liouvillian);
criterion_main!(benches);
