use convograph_bench::labeled_corpus;
use convograph_core::classify::{predict, train};
use convograph_core::textprep::{preprocess, TokenPipelineConfig};
use criterion::{criterion_group, criterion_main, Criterion, Throughput};

fn bench_preprocess(c: &mut Criterion) {
    let cfg = TokenPipelineConfig::default();
    let docs = labeled_corpus(1_000, 12, 1);
    let mut group = c.benchmark_group("preprocess");
    group.throughput(Throughput::Elements(docs.len() as u64));
    group.bench_function("1k_docs", |b| {
        b.iter(|| {
            docs.iter()
                .map(|d| preprocess(&d.text, &cfg).len())
                .sum::<usize>()
        })
    });
    group.finish();
}

fn bench_train(c: &mut Criterion) {
    let cfg = TokenPipelineConfig::default();
    let docs = labeled_corpus(5_000, 12, 2);
    c.bench_function("train/5k_docs", |b| {
        b.iter(|| train(&docs, &cfg, 1.0).unwrap())
    });
}

fn bench_predict(c: &mut Criterion) {
    let cfg = TokenPipelineConfig::default();
    let model = train(&labeled_corpus(5_000, 12, 3), &cfg, 1.0).unwrap();
    let queries = labeled_corpus(1_000, 12, 4);
    let mut group = c.benchmark_group("predict");
    group.throughput(Throughput::Elements(queries.len() as u64));
    group.bench_function("1k_docs", |b| {
        b.iter(|| {
            queries
                .iter()
                .filter(|d| predict(&model, &d.text, &cfg).label == d.label)
                .count()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_preprocess, bench_train, bench_predict);
criterion_main!(benches);
