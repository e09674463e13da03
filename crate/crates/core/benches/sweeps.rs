use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpcalc_core::convolutions::add_free;
use fpcalc_core::measures::make_named;
use fpcalc_core::subordination::mult_subordinate;
use fpcalc_core::transforms::{eval_eta, stieltjes_at};
use fpcalc_core::{par, Measure, ToleranceConfig, C64};

type Sweep = fn(&[f64], &(dyn Fn(&f64) -> f64 + Sync + Send)) -> Vec<f64>;

fn seq(xs: &[f64], f: &(dyn Fn(&f64) -> f64 + Sync + Send)) -> Vec<f64> {
    par::map_seq(xs, f)
}

fn fan(xs: &[f64], f: &(dyn Fn(&f64) -> f64 + Sync + Send)) -> Vec<f64> {
    par::map(xs, f)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn density_sweep(c: &mut Criterion) {
    let cfg = ToleranceConfig::default();
    let xs = grid(-3.0, 3.0, 256);
    let mut g = c.benchmark_group("free-sum-density");
    for (name, run) in [("sequential", seq as Sweep), ("parallel", fan as Sweep)] {
        g.bench_with_input(BenchmarkId::new(name, xs.len()), &xs, |b, xs| {
            b.iter(|| {
                let sc = make_named("semicircle", &[]).unwrap();
                let at = Measure::atomic(vec![(-1.0, 0.3), (0.5, 0.4), (2.0, 0.3)]).unwrap();
                let m = add_free(&sc, &at, &cfg).unwrap();
                black_box(run(xs, &|&x| stieltjes_at(&m, x, &cfg).unwrap()))
            })
        });
    }
    g.finish();
}

fn eta_sweep(c: &mut Criterion) {
    let cfg = ToleranceConfig::default();
    let xs = grid(-5.0, -0.01, 256);
    let mut g = c.benchmark_group("mult-subordinate-eta");
    for (name, run) in [("sequential", seq as Sweep), ("parallel", fan as Sweep)] {
        g.bench_with_input(BenchmarkId::new(name, xs.len()), &xs, |b, xs| {
            b.iter(|| {
                // rebuilt every iteration so memoized values do not carry over
                let pi = make_named("free_poisson", &[]).unwrap();
                let s = make_named("bernoulli_sigma", &[("t", 1.0)]).unwrap();
                let m = mult_subordinate(&s, &pi, &cfg).unwrap();
                black_box(run(xs, &|&x| eval_eta(&m, C64::new(x, 0.0)).unwrap().re))
            })
        });
    }
    g.finish();
}

criterion_group!(benches, density_sweep, eta_sweep);
criterion_main!(benches);
