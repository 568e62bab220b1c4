use criterion::{black_box, criterion_group, criterion_main, Criterion};
use perclat_core::coupling::CoupledBondRealization;
use perclat_core::gobp::{count_paths, survives, BondField, BondModel, CountMode};
use perclat_core::measures::count_open_paths;
use perclat_core::stats::{mix64, RandomStream};
use perclat_core::Site;

fn hashing(c: &mut Criterion) {
    let stream = RandomStream::with_label(1, "bench");
    c.bench_function("mix64", |b| b.iter(|| mix64(black_box(0x1234_5678))));
    c.bench_function("word_for_site", |b| {
        b.iter(|| stream.word_for_site(black_box(&[3, -7, 11]), &[2]))
    });
}

fn bonds(c: &mut Criterion) {
    let field = BondField::bernoulli(0.7, 5, 3, 1000).unwrap();
    let z = Site::new(&[4, 9, 2]).unwrap();
    c.bench_function("bernoulli_open_mask", |b| b.iter(|| field.open_mask(black_box(37), &z)));
    let r = CoupledBondRealization::for_trial(5, 0, 1.3).unwrap();
    let w = Site::new(&[4, 9, 2, 1]).unwrap();
    c.bench_function("coupled_open_along", |b| b.iter(|| r.open_along(black_box(&w), 2)));
}

fn counting(c: &mut Criterion) {
    let field = BondField::bernoulli(0.8, 7, 2, 60).unwrap();
    c.bench_function("count_paths_scaled_d2_t60", |b| {
        b.iter(|| count_paths(&field, 60, CountMode::Scaled).unwrap())
    });
    let exact = BondField::bernoulli(0.8, 7, 2, 30).unwrap();
    c.bench_function("count_paths_exact_d2_t30", |b| {
        b.iter(|| count_paths(&exact, 30, CountMode::Exact).unwrap())
    });
    let r = CoupledBondRealization::for_trial(3, 0, 1.0).unwrap();
    c.bench_function("count_open_paths_d2_t10", |b| b.iter(|| count_open_paths(&r, 2, 10)));
}

fn survival(c: &mut Criterion) {
    let mut g = c.benchmark_group("survival_trial");
    g.sample_size(20);
    let model = BondModel::Coupled { amplitude: 1.2 };
    g.bench_function("coupled_d3_t50", |b| {
        let mut i = 0;
        b.iter(|| {
            i += 1;
            let field = model.trial_field(3, 50, 9, i).unwrap();
            survives(&field, 50)
        })
    });
    g.finish();
}

criterion_group!(benches, hashing, bonds, counting, survival);
criterion_main!(benches);
