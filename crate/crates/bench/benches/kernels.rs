use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use toplab::heat::{heat_evolve, HeatParams};
use toplab::signal::{fourier_coefficients, sign_changes, DEFAULT_DEAD_BAND};
use toplab::topo::{winding_number, StencilFamily, DEFAULT_WINDING_MARGIN};
use toplab::torsion::{makar_limanov, solve_torsion};
use toplab::{ConvexDomain, PeriodicSignal};

fn test_signal(n: usize) -> PeriodicSignal {
    PeriodicSignal::from_fn(n, |x| (3.0 * x).sin() + 0.5 * (7.0 * x).cos() - 0.2 * (11.0 * x).sin()).unwrap()
}

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral");
    for n in [1024, 16384, 262144] {
        let f = test_signal(n);
        g.bench_with_input(BenchmarkId::new("coefficients", n), &f, |b, f| {
            b.iter(|| fourier_coefficients(black_box(f), 64).unwrap())
        });
        let heat = HeatParams::new(1.0).unwrap();
        g.bench_with_input(BenchmarkId::new("heat_evolve", n), &f, |b, f| {
            b.iter(|| heat_evolve(black_box(f), &heat))
        });
        g.bench_with_input(BenchmarkId::new("sign_changes", n), &f, |b, f| {
            b.iter(|| sign_changes(black_box(f), DEFAULT_DEAD_BAND))
        });
    }
    g.finish();
}

fn topology(c: &mut Criterion) {
    let f = test_signal(4096);
    c.bench_function("winding_number/4096", |b| {
        b.iter(|| winding_number(black_box(&f), DEFAULT_WINDING_MARGIN).unwrap())
    });
    c.bench_function("stencil_signal/n3_eps2^-9", |b| {
        b.iter(|| StencilFamily::new(3, black_box(2f64.powi(-9))).unwrap().signal())
    });
}

fn torsion(c: &mut Criterion) {
    let mut g = c.benchmark_group("torsion");
    g.sample_size(10);
    let domains = [
        ("square", ConvexDomain::rectangle(1.0, 1.0).unwrap()),
        ("ellipse", ConvexDomain::ellipse(2.0, 1.0).unwrap()),
    ];
    for (name, d) in &domains {
        g.bench_function(BenchmarkId::new("solve_h1/32", name), |b| {
            b.iter(|| solve_torsion(black_box(d), 1.0 / 32.0).unwrap())
        });
    }
    let field = solve_torsion(&domains[1].1, 1.0 / 64.0).unwrap();
    g.bench_function("makar_limanov_h1/64", |b| b.iter(|| makar_limanov(black_box(&field))));
    g.finish();
}

criterion_group!(benches, spectral, topology, torsion);
criterion_main!(benches);
