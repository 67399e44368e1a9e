use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use streetlight_bench::random_frame;
use streetlight_core::imaging::{estimate_brightness, median_denoise, to_grayscale};

fn bench_grayscale(c: &mut Criterion) {
    let frame = random_frame(960, 720, 7);
    let mut group = c.benchmark_group("grayscale");
    group.throughput(Throughput::Elements(960 * 720));
    group.bench_function("960x720", |b| b.iter(|| to_grayscale(black_box(&frame))));
    group.finish();
}

fn bench_median(c: &mut Criterion) {
    let gray = to_grayscale(&random_frame(320, 240, 8));
    let mut group = c.benchmark_group("median_denoise");
    for radius in [1usize, 2, 3] {
        group.bench_with_input(BenchmarkId::from_parameter(radius), &radius, |b, &r| {
            b.iter(|| median_denoise(black_box(&gray), r).unwrap())
        });
    }
    group.finish();
}

fn bench_brightness(c: &mut Criterion) {
    let frame = random_frame(480, 360, 9);
    c.bench_function("estimate_brightness/480x360", |b| {
        b.iter(|| estimate_brightness(black_box(&frame), 1).unwrap())
    });
}

criterion_group!(benches, bench_grayscale, bench_median, bench_brightness);
criterion_main!(benches);
