use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use streetlight_bench::random_mask;
use streetlight_core::metrics::{confusion, mean_iou};
use streetlight_core::ProbMap;

fn bench_confusion(c: &mut Criterion) {
    let mut group = c.benchmark_group("confusion");
    // CamVid frames are 960x720
    for &(w, h) in &[(120, 90), (480, 360), (960, 720)] {
        let truth = random_mask(w, h, 1);
        let pred = random_mask(w, h, 2);
        group.throughput(Throughput::Elements((w * h) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(format!("{w}x{h}")), &(), |b, _| {
            b.iter(|| {
                let cm = confusion(black_box(&pred), black_box(&truth)).unwrap();
                mean_iou(&cm).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_cross_entropy(c: &mut Criterion) {
    let truth = random_mask(480, 360, 3);
    let probs = ProbMap::one_hot(&random_mask(480, 360, 4));
    c.bench_function("cross_entropy/480x360", |b| {
        b.iter(|| {
            streetlight_core::metrics::cross_entropy(
                black_box(std::slice::from_ref(&probs)),
                black_box(std::slice::from_ref(&truth)),
                1e-7,
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_confusion, bench_cross_entropy);
criterion_main!(benches);
