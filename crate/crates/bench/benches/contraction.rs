use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ness_bench::{brickwork, dense_string};
use ness_core::circuit::compile_circuit;
use ness_core::contraction::{contract_encoders, Tiling};
use ness_core::mpo::{expect_string, materialize_density, MpoNess};
use ness_core::Coupling;
use std::hint::black_box;

fn strings(c: &mut Criterion) {
    let mut g = c.benchmark_group("expect_string");
    for len in [8, 64, 512] {
        let m = MpoNess::new(len, Coupling::new(1.0).unwrap()).unwrap();
        let s = dense_string(len);
        g.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| b.iter(|| expect_string(&m, black_box(&s))));
    }
    g.finish();
}

fn density(c: &mut Criterion) {
    let mut g = c.benchmark_group("materialize_density");
    g.sample_size(10);
    for len in [4, 6, 8] {
        let m = MpoNess::new(len, Coupling::new(1.0).unwrap()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| b.iter(|| materialize_density(&m)));
    }
    g.finish();
}

fn circuits(c: &mut Criterion) {
    let mut g = c.benchmark_group("contract_encoders");
    for (n, layers) in [(2, 4), (3, 6), (4, 6)] {
        let compiled = compile_circuit(&brickwork(n, layers), Coupling::new(1.0).unwrap()).unwrap();
        let chains = compiled.chains().unwrap();
        let encs = compiled.encoder_list();
        g.bench_function(format!("n{n}_layers{layers}"), |b| {
            b.iter(|| contract_encoders(&chains, black_box(&encs), Tiling::Strict))
        });
    }
    g.finish();
}

criterion_group!(benches, strings, density, circuits);
criterion_main!(benches);
