use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jcrwave_bench::{music_input, scenario, schedule};
use jcrwave_core::estimators::{da_music, direct_music};
use jcrwave_core::metrics::crb_velocity;
use jcrwave_core::optimizer::{tradeoff_curve, ParamRule};
use jcrwave_core::waveform::difference_cowaveform;
use jcrwave_core::FamilyKind;
use std::hint::black_box;

fn crb(c: &mut Criterion) {
    let mut group = c.benchmark_group("crb_velocity");
    for (m, k) in [(10, 1), (20, 4), (40, 10)] {
        let sc = scenario(k);
        let s = schedule(FamilyKind::Nested, m, &sc);
        group.bench_with_input(BenchmarkId::from_parameter(format!("M{m}_K{k}")), &s, |b, s| {
            b.iter(|| crb_velocity(black_box(s), &sc.scene, 1).unwrap())
        });
    }
    group.finish();
}

fn cowaveform(c: &mut Criterion) {
    let sc = scenario(1);
    let s = schedule(FamilyKind::Wichmann, 40, &sc);
    c.bench_function("cowaveform_wichmann_40", |b| b.iter(|| difference_cowaveform(black_box(s.positions()))));
}

fn music(c: &mut Criterion) {
    let sc = scenario(2);
    let s = schedule(FamilyKind::Uniform, 20, &sc);
    let (cov, grid) = music_input(&s, &sc, 100);
    c.bench_function("direct_music_M20", |b| b.iter(|| direct_music(black_box(&cov), &s, 2, &grid).unwrap()));
    let n = schedule(FamilyKind::Nested, 20, &sc);
    let (cov, grid) = music_input(&n, &sc, 100);
    c.bench_function("da_music_nested_M20", |b| b.iter(|| da_music(black_box(&cov), &n, 2, &grid).unwrap()));
}

fn curve(c: &mut Criterion) {
    let sc = scenario(1);
    c.bench_function("tradeoff_curve_nested_3_40", |b| {
        b.iter(|| tradeoff_curve(FamilyKind::Nested, black_box(&sc), 3..=40, ParamRule::VpCount).unwrap())
    });
}

criterion_group!(benches, crb, cowaveform, music, curve);
criterion_main!(benches);
