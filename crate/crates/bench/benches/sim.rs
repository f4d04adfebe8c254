use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use ehcr_core::{run, AccessPolicy, EnergyModel, Preset, SimConfig, Traffic};

const SLOTS: u64 = 100_000;

fn slots(c: &mut Criterion) {
    let probs = Preset::Fig4.probs();
    let traffic = Traffic {
        lambda_p: 0.3,
        lambda_s: 0.1,
        ..Preset::Fig4.traffic()
    };
    let policy = AccessPolicy {
        p_s: 0.5,
        p_t: 0.5,
        p_f: 0.5,
        p_b: 0.0,
        p_r: 0.5,
    };
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    group.throughput(Throughput::Elements(SLOTS));
    for (name, feedback, energy) in [
        ("plain_exact", false, EnergyModel::Exact),
        ("feedback_exact", true, EnergyModel::Exact),
        ("plain_md1", false, EnergyModel::Md1Approx),
    ] {
        let mut cfg = SimConfig::new(SLOTS, 1);
        cfg.feedback_enabled = feedback;
        cfg.energy_model = energy;
        group.bench_function(name, |b| b.iter(|| run(&cfg, &policy, &probs, &traffic)));
    }
    group.finish();
}

criterion_group!(benches, slots);
criterion_main!(benches);
