use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use elkit_core::correlations::log_moment_coincident;
use elkit_core::ensemble::{mc_moment, SampleConfig};
use elkit_core::kernels::{kernel_hat_matrix, EllipticParams, FiniteKernel, KernelSource};
use elkit_core::skewalg::{pfaffian_jet, pfaffian_real, SkewMatrix};
use elkit_core::specfun::QuadratureSpec;

fn pfaffians(c: &mut Criterion) {
    let mut g = c.benchmark_group("pfaffian_real");
    for dim in [8, 32, 128] {
        let m = SkewMatrix::from_upper(dim, 0.0, |i, j| ((i * 7 + j * 13) % 17) as f64 / 17.0 - 0.5).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(dim), &m, |b, m| b.iter(|| pfaffian_real(black_box(m))));
    }
    g.finish();

    let mut g = c.benchmark_group("pfaffian_jet");
    let q = QuadratureSpec::default();
    let k = FiniteKernel::new(EllipticParams::new(0.5, 20).unwrap(), q).unwrap();
    for ell in [2, 3, 4] {
        let m = kernel_hat_matrix(KernelSource::Finite(&k), 0.3, ell).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(ell), &m, |b, m| b.iter(|| pfaffian_jet(black_box(m))));
    }
    g.finish();
}

fn moments(c: &mut Criterion) {
    let q = QuadratureSpec::default();
    let mut g = c.benchmark_group("moment_coincident");
    for (n, ell) in [(20, 1), (20, 3), (100, 2)] {
        let p = EllipticParams::new(0.5, n).unwrap();
        g.bench_function(format!("N{n}_ell{ell}"), |b| b.iter(|| log_moment_coincident(p, black_box(0.2), ell, &q)));
    }
    g.finish();

    let mut g = c.benchmark_group("mc");
    g.sample_size(10);
    for n in [4, 16] {
        let cfg = SampleConfig::new(0.5, n, 3, 10_000).unwrap();
        g.bench_function(format!("N{n}_10k"), |b| b.iter(|| mc_moment(&cfg, 2.0, &[0.2])));
    }
    g.finish();
}

criterion_group!(benches, pfaffians, moments);
criterion_main!(benches);
