use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kglab_core::fock::{build_multiplier_field, commutator_cnumber, ModeLattice, TruncatedFock};
use kglab_core::kernel::pair;
use kglab_core::psqrt::{classify_cases, sqrt_field, SamplerConfig};
use kglab_core::{EvenPolynomial, KernelConfig, Polynomial, SpacetimePoint, TestFunction};
use num_complex::Complex64;
use std::hint::black_box;

fn gaussian(center: [f64; 4]) -> TestFunction {
    TestFunction::gaussian(SpacetimePoint::new(center.to_vec()).unwrap(), 1.0).unwrap()
}

fn pairing(c: &mut Criterion) {
    let a = EvenPolynomial::minkowski_square(4);
    let f = gaussian([0.0; 4]);
    let g = gaussian([3.0, 0.0, 0.0, 0.0]);
    let mut group = c.benchmark_group("pair");
    group.sample_size(10);
    for n in [32, 64, 128] {
        let cfg = KernelConfig::new(4, 1.0).with_quadrature(n, 8.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| pair(black_box(&a), &f, &g, cfg).unwrap())
        });
    }
    group.finish();
}

fn commutator(c: &mut Criterion) {
    let lattice = ModeLattice::new(4, 1.0, 3, 0.7).unwrap();
    let fock = TruncatedFock::new(lattice, 3, 5000).unwrap();
    let field = sqrt_field(Polynomial::constant(4, Complex64::new(-1.0, 0.0)));
    let f = gaussian([0.0; 4]);
    let g = gaussian([1.5, 0.4, 0.0, 0.2]);
    c.bench_function("fock_commutator_27_modes", |b| {
        b.iter(|| {
            let x = build_multiplier_field(&field, &f, &fock).unwrap();
            let y = build_multiplier_field(&field, &g, &fock).unwrap();
            commutator_cnumber(&x, &y, &fock).unwrap()
        })
    });
}

fn sqrt_sampling(c: &mut Criterion) {
    let a = Polynomial::from_terms(
        2,
        [
            (vec![2, 0], Complex64::new(1.0, 0.0)),
            (vec![0, 2], Complex64::new(-1.0, 0.0)),
            (vec![1, 1], Complex64::new(0.0, 2.0)),
        ],
    )
    .unwrap();
    let field = sqrt_field(a);
    let sampler = SamplerConfig { count: 100_000, ..SamplerConfig::default() };
    let mut group = c.benchmark_group("sqrt");
    group.sample_size(10);
    group.bench_function("classify_1e5", |b| b.iter(|| classify_cases(&field, &sampler).unwrap()));
    group.finish();
}

criterion_group!(benches, pairing, commutator, sqrt_sampling);
criterion_main!(benches);
