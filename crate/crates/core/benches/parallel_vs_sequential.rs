use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use majorana_core::entanglement::geometric_entanglement;
use majorana_core::geometry::{ensemble_stats, husimi_q, latlong_grid, random_state};
use majorana_core::permanent::permanent_ryser;
use majorana_core::stellar::stars_of;
use majorana_core::{Complex64, Exec};
use nalgebra::DMatrix;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn ensemble(c: &mut Criterion) {
    let mut g = c.benchmark_group("ensemble_stats");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "2S=12 x 400"), |b| {
            b.iter(|| ensemble_stats(black_box(12), 400, 7, 10, exec).unwrap())
        });
    }
    g.finish();
}

fn ryser(c: &mut Criterion) {
    let mut g = c.benchmark_group("permanent_ryser");
    g.sample_size(10);
    for n in [14usize, 18] {
        let m = DMatrix::from_fn(n, n, |i, j| Complex64::from_polar(1.0, (i * 7 + j * 3) as f64 * 0.37) * 0.5);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &m, |b, m| b.iter(|| permanent_ryser(m, exec).unwrap()));
        }
    }
    g.finish();
}

fn husimi(c: &mut Criterion) {
    let mut g = c.benchmark_group("husimi_grid");
    let state = random_state(20, 3);
    let grid = latlong_grid(64, 128);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "64x128"), |b| b.iter(|| husimi_q(&state, black_box(&grid), exec).unwrap()));
    }
    g.finish();
}

fn geometric(c: &mut Criterion) {
    let mut g = c.benchmark_group("geometric_entanglement");
    let cons = stars_of(&random_state(16, 5));
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "2S=16"), |b| b.iter(|| geometric_entanglement(&cons, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, ensemble, ryser, husimi, geometric);
criterion_main!(benches);
