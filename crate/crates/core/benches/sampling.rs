use algebroid::calculus::{check_killing_frame, check_s_formula_agreement, KILLING_FRAME_TOL};
use algebroid::fixtures;
use algebroid::freealg::{cartan_check_extended, free_extend, FreeMode, FreeOptions, FREE_CARTAN_TOL};
use algebroid::model::sample_points;
use algebroid::par::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn point_checks(c: &mut Criterion) {
    let sphere = fixtures::load(fixtures::FX_SO3_SPHERE);
    let points = sample_points(&sphere.chart, 2000, 42);
    let mut group = c.benchmark_group("sphere_2000_points");
    for (name, exec) in STRATEGIES {
        Execution::set_current(exec);
        group.bench_function(BenchmarkId::new("s_formula", name), |b| {
            b.iter(|| check_s_formula_agreement(&sphere, &points, 1e-9).unwrap())
        });
        group.bench_function(BenchmarkId::new("killing_frame", name), |b| {
            b.iter(|| check_killing_frame(&sphere, &points, KILLING_FRAME_TOL).unwrap())
        });
    }
    group.finish();
}

fn free_checks(c: &mut Criterion) {
    let spec = fixtures::load(fixtures::FX_FREE_JACOBI_R3);
    let free = free_extend(&spec, 3, FreeMode::Quotient, &FreeOptions::default()).unwrap();
    let points = sample_points(&spec.chart, 200, 42);
    let mut group = c.benchmark_group("free_r3_degree3");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        Execution::set_current(exec);
        group.bench_function(BenchmarkId::new("extended_cartan", name), |b| {
            b.iter(|| cartan_check_extended(&free, &points, FREE_CARTAN_TOL).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, point_checks, free_checks);
criterion_main!(benches);
