use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdmon_bench::{lattice, plaza_config, plaza_frames};
use sdmon_core::io::Pipeline;
use sdmon_core::tracking::CostMatrix;
use sdmon_core::{pairwise_violations, solve_assignment, DistancePolicy, Tracker, TrackerConfig};

fn assignment(c: &mut Criterion) {
    let mut group = c.benchmark_group("assignment");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [8usize, 32, 128] {
        let cost = CostMatrix::from_fn(n, n + n / 4, |_, _| rng.random_range(0.0..1.0));
        group.bench_with_input(BenchmarkId::from_parameter(n), &cost, |b, cost| {
            b.iter(|| solve_assignment(cost).unwrap())
        });
    }
    group.finish();
}

fn tracker_step(c: &mut Criterion) {
    let frames = plaza_frames(400);
    let warm = 300;
    let config = plaza_config();
    let mut tracker = Tracker::new(TrackerConfig::default(), config.ground_homography().unwrap());
    for f in &frames[..warm] {
        tracker.step(&f.boxes, f.frame).unwrap();
    }
    let rest = &frames[warm..];
    let mut group = c.benchmark_group("tracker");
    group.throughput(Throughput::Elements(rest.len() as u64));
    group.bench_function("100 frames after warm-up", |b| {
        b.iter_batched(
            || tracker.clone(),
            |mut t| {
                for f in rest {
                    t.step(&f.boxes, f.frame).unwrap();
                }
                t
            },
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn violations(c: &mut Criterion) {
    let policy = DistancePolicy::oxford_town_centre();
    let mut group = c.benchmark_group("violations");
    for n in [20usize, 100, 400] {
        let pos = lattice(n, 15.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &pos, |b, pos| {
            b.iter(|| pairwise_violations(pos, &policy))
        });
    }
    group.finish();
}

fn full_pipeline(c: &mut Criterion) {
    let frames = plaza_frames(250);
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.throughput(Throughput::Elements(frames.len() as u64));
    group.bench_function("250 frames", |b| {
        b.iter(|| {
            let mut p = Pipeline::new(plaza_config()).unwrap();
            for f in &frames {
                p.step(f.frame, &f.boxes).unwrap();
            }
            p
        })
    });
    group.finish();
}

criterion_group!(benches, assignment, tracker_step, violations, full_pipeline);
criterion_main!(benches);
