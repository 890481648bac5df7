//! End-to-end engine benchmarks: one simulated hour of the small line
//! fixture and of a full-scale random deployment, agents on.

use airmab::engine::experiments;
use airmab::engine::scenario::toy_scenario;
use airmab::{generate_scenario, run, AgentSelection, Mode, SimConfig};
use criterion::{criterion_group, criterion_main, Criterion};

fn bench_simulation(c: &mut Criterion) {
    let toy = SimConfig {
        t_sim: 3600.0,
        agent_enable_time: 0.0,
        ..experiments::toy_config(11, AgentSelection::Both)
    };
    let toy_scen = toy_scenario(&toy, 40).unwrap();
    c.bench_function("toy_hour_3ap_45sta", |b| {
        b.iter(|| run(&toy_scen, &toy, Mode::Adaptive).unwrap())
    });

    let full = SimConfig {
        t_sim: 3600.0,
        seed: 11,
        ..SimConfig::default()
    };
    let full_scen = generate_scenario(&full).unwrap();
    let mut g = c.benchmark_group("full_scale");
    g.sample_size(20);
    g.bench_function("hour_15ap_225sta", |b| {
        b.iter(|| run(&full_scen, &full, Mode::Adaptive).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_simulation);
criterion_main!(benches);
