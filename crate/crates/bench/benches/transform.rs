use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hsrocket::kernels::{generate_minirocket, generate_rocket, ChannelMode};
use hsrocket::transform::transform_all;
use hsrocket_bench::{fd001_windows, WINDOW_LEN};

fn transform(c: &mut Criterion) {
    let (train, _) = fd001_windows(25);
    let channels = train[0].values.rows();
    let mut group = c.benchmark_group("transform");
    group.sample_size(10);
    for features in [1_000, 10_000] {
        let rocket = generate_rocket(features / 2, channels, WINDOW_LEN, 0, ChannelMode::Subset).unwrap();
        let mini = generate_minirocket(features, channels, WINDOW_LEN, 0, ChannelMode::Subset, &train).unwrap();
        group.bench_with_input(BenchmarkId::new("rocket", features), &rocket, |b, bank| {
            b.iter(|| transform_all(&train, bank, 1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("minirocket", features), &mini, |b, bank| {
            b.iter(|| transform_all(&train, bank, 1).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transform);
criterion_main!(benches);
