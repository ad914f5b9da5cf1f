use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hetero_core::field::{energy_with, residual_with};
use hetero_core::{DiscreteDomain, DoubleWell, Exec, Field, StripSpec};

fn setup(h: f64) -> (DiscreteDomain, Field, DoubleWell) {
    let d = DiscreteDomain::build(&StripSpec::sinusoidal(1.0, 0.2, 0.0), h, 8.0).unwrap();
    let u = Field::from_fn(&d, 2, |s, y, out| {
        out[0] = (s / 2f64.sqrt()).tanh();
        out[1] = 0.1 * (3.0 * y).sin() / s.cosh();
    });
    (d, u, DoubleWell::product_well(vec![-1.0, 0.0], vec![1.0, 0.0]))
}

fn policies() -> Vec<(&'static str, Exec)> {
    vec![
        ("sequential", Exec::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Exec::Parallel),
    ]
}

fn bench_energy(c: &mut Criterion) {
    let mut group = c.benchmark_group("energy");
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let (d, u, p) = setup(h);
        for (name, exec) in policies() {
            group.bench_with_input(BenchmarkId::new(name, d.num_cells()), &exec, |b, &exec| {
                b.iter(|| energy_with(exec, &d, black_box(&u), &p, None))
            });
        }
    }
    group.finish();
}

fn bench_residual(c: &mut Criterion) {
    let mut group = c.benchmark_group("residual");
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let (d, u, p) = setup(h);
        for (name, exec) in policies() {
            group.bench_with_input(BenchmarkId::new(name, d.num_cells()), &exec, |b, &exec| {
                b.iter(|| residual_with(exec, &d, black_box(&u), &p))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_energy, bench_residual);
criterion_main!(benches);
