use criterion::{black_box, criterion_group, criterion_main, Criterion};
use twrn_cs::experiment::TrialOptions;
use twrn_cs::{
    build_training_matrix, convolve, estimate_cosamp, estimate_ls, estimate_oracle, run_trial,
    trial_rng, CosampParams, TwrnConfig,
};
use twrn_cs_bench::{instance, random_taps};

fn bench_signal(c: &mut Criterion) {
    let a = random_taps(16, 1);
    let b = random_taps(16, 2);
    let x = random_taps(64, 3);
    c.bench_function("convolve 16x16", |bch| {
        bch.iter(|| convolve(black_box(&a), black_box(&b)))
    });
    c.bench_function("training matrix N=64 L=16", |bch| {
        bch.iter(|| build_training_matrix(black_box(&x), 16))
    });
}

fn bench_estimators(c: &mut Criterion) {
    let inst = instance(20.0, 7);
    let (x, y) = (&inst.measurement, &inst.observation);
    let params = CosampParams::new(inst.true_support.len());
    let mut group = c.benchmark_group("estimators 94x62");
    group.bench_function("ls", |b| b.iter(|| estimate_ls(black_box(x), black_box(y))));
    group.bench_function("oracle", |b| {
        b.iter(|| estimate_oracle(black_box(x), black_box(y), &inst.true_support))
    });
    group.bench_function("cosamp", |b| {
        b.iter(|| estimate_cosamp(black_box(x), black_box(y), &params))
    });
    group.finish();
}

fn bench_trial(c: &mut Criterion) {
    let cfg = TwrnConfig::default();
    let opts = TrialOptions::default();
    let mut t = 0;
    c.bench_function("paired trial, all estimators", |b| {
        b.iter(|| {
            t += 1;
            run_trial(&cfg, &opts, &mut trial_rng(0, 0, t))
        })
    });
}

criterion_group!(benches, bench_signal, bench_estimators, bench_trial);
criterion_main!(benches);
