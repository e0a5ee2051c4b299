use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use denoiser_core::channels::NoiseModel;
use denoiser_core::circuits::{build_denoiser, build_trotter, DenoiserSpec, TrotterSpec};
use denoiser_core::observables::{sigma_z, zz_functional};
use denoiser_core::optimizer::{initial_denoiser, CostContext, OptimizerConfig};
use denoiser_core::sampler::{run_shots, SamplerOptions};
use denoiser_core::QubitCount;

fn setup(l: usize, m_trot: usize, depth: usize) -> (TrotterSpec, DenoiserSpec) {
    let n = QubitCount::new(l).unwrap();
    let noise = NoiseModel::new(0.01).unwrap();
    let spec = TrotterSpec::new(n, 1.0, m_trot, noise).unwrap();
    let den = initial_denoiser(n, depth, noise, &OptimizerConfig::default(), 7);
    (spec, den)
}

fn compose(c: &mut Criterion) {
    let (spec, den) = setup(4, 8, 2);
    let gates = build_trotter(&spec, true).unwrap().then(&build_denoiser(&den).unwrap()).unwrap();
    c.bench_function("compose L=4", |b| b.iter(|| gates.compose().unwrap()));
}

fn gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("epsilon_gradient");
    group.sample_size(20);
    for depth in [1, 2] {
        let (spec, den) = setup(4, 8, depth);
        let ctx = CostContext::from_trotter(&spec).unwrap();
        group.bench_function(format!("L=4 M={depth}"), |b| b.iter(|| ctx.epsilon_gradient(&den).unwrap()));
    }
    group.finish();
}

fn apply(c: &mut Criterion) {
    let (spec, den) = setup(8, 8, 1);
    let gates = build_trotter(&spec, true).unwrap().then(&build_denoiser(&den).unwrap()).unwrap();
    let v = sigma_z(spec.n, 3).unwrap();
    let mut group = c.benchmark_group("apply");
    group.sample_size(10);
    group.bench_function("L=8", |b| b.iter_batched(|| v.clone(), |v| gates.apply(&v).unwrap(), BatchSize::LargeInput));
    group.finish();
}

fn shots(c: &mut Criterion) {
    let (spec, den) = setup(4, 4, 2);
    let trotter = build_trotter(&spec, true).unwrap();
    let obs = zz_functional(spec.n, 1).unwrap();
    let init = sigma_z(spec.n, 1).unwrap();
    let opts = SamplerOptions::default();
    c.bench_function("run_shots 1000 L=4 M=2", |b| {
        b.iter(|| run_shots(&trotter, &den, &obs, &init, 1000, 3, &opts, None).unwrap())
    });
}

criterion_group!(benches, compose, gradient, apply, shots);
criterion_main!(benches);
