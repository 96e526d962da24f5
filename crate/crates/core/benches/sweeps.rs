//! Sequential against data-parallel execution of the randomized sweeps.
//! Without the `parallel` feature both arms run on one thread.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use k3cert_core::atlas::omega_sweep;
use k3cert_core::hyperkahler::hk_sweep;
use k3cert_core::par::Exec;
use k3cert_core::suite::resolve_quartic;
use k3cert_core::surface::{sample_points, QuarticSurface};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn hk(c: &mut Criterion) {
    let mut g = c.benchmark_group("hk_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, 1000), &exec, |b, &exec| b.iter(|| hk_sweep(1000, 7, exec).unwrap()));
    }
    g.finish();
}

fn omega(c: &mut Criterion) {
    let x = QuarticSurface::new(resolve_quartic("fermat").unwrap()).unwrap();
    let mut g = c.benchmark_group("omega");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(format!("sample/{name}"), 200), &exec, |b, &exec| {
            b.iter(|| sample_points(&x, 200, 7, exec).unwrap())
        });
        let pts = sample_points(&x, 200, 7, exec).unwrap();
        g.bench_with_input(BenchmarkId::new(format!("sweep/{name}"), 200), &exec, |b, &exec| {
            b.iter(|| omega_sweep(&x, &pts, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, hk, omega);
criterion_main!(benches);
