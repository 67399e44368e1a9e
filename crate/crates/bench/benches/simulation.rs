use std::path::PathBuf;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use streetlight_core::agent_net::{Clock, DetectionPayload, EventBody, ScenarioEvent};
use streetlight_core::control::{LampConfig, Position};
use streetlight_core::{run_sim, GeoLocation, NetParams, PresenceReport, Scenario, SplitMix64};

/// `n` lamps on a 30 m grid line with a detection every few seconds of a
/// two-hour night.
fn street(n: usize) -> Scenario {
    let lamps = (0..n)
        .map(|i| LampConfig {
            location: GeoLocation { latitude: 52.2, longitude: 0.1 },
            neighbor_radius: 35.0,
            position: Position { x: 30.0 * i as f64, y: 0.0 },
            ..LampConfig::with_id(format!("lamp-{i:04}"))
        })
        .collect();
    let mut rng = SplitMix64::new(11);
    let mut t = 0;
    let mut events = Vec::new();
    loop {
        t += rng.below(5_000) as i64;
        if t > 7_200_000 {
            break;
        }
        let seen = rng.bernoulli(0.4);
        events.push(ScenarioEvent {
            time_ms: t,
            lamp_id: format!("lamp-{:04}", rng.below(n as u64)),
            body: EventBody::Detection(DetectionPayload {
                brightness: Some(rng.next_f64() * 0.3),
                presence: seen.then(|| PresenceReport {
                    pedestrian_present: true,
                    pedestrian_fraction: 0.01,
                    ..PresenceReport::absent()
                }),
                ..Default::default()
            }),
        });
    }
    Scenario {
        lamps,
        net: NetParams { latency_ms: 20, drop_probability: 0.05, gossip_period_s: 60.0, seed: 3 },
        clock: Clock {
            epoch_utc: "2024-01-15T22:00:00Z".parse().unwrap(),
            start_ms: 0,
            end_ms: 7_200_000,
        },
        use_solar: true,
        min_area_fraction: 0.001,
        denoise_radius: 1,
        events,
        base_dir: PathBuf::new(),
    }
}

fn bench_run_sim(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_sim");
    group.sample_size(20);
    for n in [10usize, 50, 200] {
        let s = street(n);
        group.bench_with_input(BenchmarkId::new("lamps", n), &s, |b, s| {
            b.iter(|| run_sim(black_box(s), &s.net).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_run_sim);
criterion_main!(benches);
