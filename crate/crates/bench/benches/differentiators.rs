use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use tdlab::simulation::run;
use tdlab::sweep::measure_point;
use tdlab::{linearize, omega_factor, preset, SweepConfig};

fn analytic(c: &mut Criterion) {
    c.bench_function("omega_factor(0.6)", |b| {
        b.iter(|| omega_factor(black_box(0.6)).unwrap())
    });
    let p = preset("paper-4-hybrid").unwrap().params;
    c.bench_function("linearize hybrid", |b| {
        b.iter(|| linearize(black_box(&p), black_box(1.0)).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulation");
    group.sample_size(20);
    for name in ["paper-3A", "paper-3B", "paper-3C-hybrid"] {
        let pre = preset(name).unwrap();
        group.bench_function(format!("run {name}"), |b| {
            b.iter(|| run(&pre.params, &pre.signal, &pre.sim).unwrap())
        });
    }
    let p = preset("paper-4-hybrid").unwrap().params;
    let cfg = SweepConfig::default();
    group.bench_function("measure_point omega=10", |b| {
        b.iter(|| measure_point(&p, 1.0, black_box(10.0), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, analytic, simulation);
criterion_main!(benches);
