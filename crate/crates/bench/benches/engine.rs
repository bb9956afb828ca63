use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pagecast_bench::Fixture;
use pagecast_core::{
    build_model, pagerank_scores, predict, record_access, replay, ModificationLog, PageRankConfig, UpdateConfig,
};
use std::hint::black_box;

const SHAPES: [(usize, usize); 3] = [(9, 10), (20, 25), (40, 50)];

fn ranking(c: &mut Criterion) {
    let mut group = c.benchmark_group("pagerank");
    for (s, p) in SHAPES {
        let f = Fixture::new(s, p, 1);
        group.bench_with_input(BenchmarkId::from_parameter(f.pages()), &f, |b, f| {
            b.iter(|| pagerank_scores(black_box(&f.graph), &PageRankConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn building(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_model");
    for (s, p) in SHAPES {
        let f = Fixture::new(s, p, 1);
        group.bench_with_input(BenchmarkId::from_parameter(f.pages()), &f, |b, f| {
            b.iter(|| build_model(black_box(&f.graph), &f.ranks, &ModificationLog::default(), None).unwrap())
        });
    }
    group.finish();
}

fn serving(c: &mut Criterion) {
    let f = Fixture::new(9, 10, 30);
    let url = f.graph.url(f.graph.len() / 2).to_string();
    c.bench_function("predict/w3", |b| b.iter(|| predict(black_box(&f.model), &url, 3).unwrap()));
    c.bench_function("record_access", |b| {
        let mut m = f.model.clone();
        let mut t = 0;
        b.iter(|| {
            t += 1;
            record_access(&mut m, &url, t).unwrap()
        })
    });
}

fn replaying(c: &mut Criterion) {
    let mut group = c.benchmark_group("replay");
    for sessions in [30, 300] {
        let f = Fixture::new(9, 10, sessions);
        group.bench_with_input(BenchmarkId::new("events", f.trace.len()), &f, |b, f| {
            b.iter(|| replay(black_box(&f.model), &f.trace, 2, &UpdateConfig::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ranking, building, serving, replaying);
criterion_main!(benches);
