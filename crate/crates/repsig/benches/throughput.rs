//! Throughput of the Monte Carlo oracle and the analytic curve evaluation.
//!
//! Build with the default `parallel` feature to measure the rayon paths
//! (including a 1-thread pool as the sequential baseline), or with
//! `--no-default-features` to measure the true sequential fallback:
//!
//!   cargo bench -p repsig
//!   cargo bench -p repsig --no-default-features

use criterion::{criterion_group, criterion_main, Criterion};
use repsig::distributions::{erlang_sum_survival, ErlangSumParams, Rates};
use repsig::montecarlo::{simulate_parallel2, SimConfig};
use repsig::reliability::{reliability_curve, RepairableSpec, Topology};
use repsig::signature::Truncation;
use std::hint::black_box;

fn table1_rates() -> Rates {
    Rates::new(0.1, 0.2).unwrap()
}

fn sim_config(replications: u64) -> SimConfig {
    let grid: Vec<f64> = (1..=40).map(|i| i as f64).collect();
    SimConfig::new(table1_rates(), replications, 42, grid).unwrap()
}

fn bench_simulation(c: &mut Criterion) {
    let cfg = sim_config(100_000);
    let mut group = c.benchmark_group("simulate_parallel2_100k");

    #[cfg(feature = "parallel")]
    {
        group.bench_function("pool_1_thread", |b| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap();
            b.iter(|| pool.install(|| black_box(simulate_parallel2(&cfg).unwrap())));
        });
        group.bench_function("pool_default", |b| {
            b.iter(|| black_box(simulate_parallel2(&cfg).unwrap()));
        });
    }

    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential_fallback", |b| {
        b.iter(|| black_box(simulate_parallel2(&cfg).unwrap()));
    });

    group.finish();
}

fn bench_curve(c: &mut Criterion) {
    let spec = RepairableSpec::new(Topology::Parallel2, table1_rates()).unwrap();
    let grid: Vec<f64> = (1..=60).map(|i| i as f64).collect();
    let truncation = Truncation::by_count(9).unwrap();
    c.bench_function("reliability_curve_60pts_k9", |b| {
        b.iter(|| black_box(reliability_curve(&spec, &grid, &truncation).unwrap()));
    });
}

fn bench_erlang_sum(c: &mut Criterion) {
    // Large shapes at adjacent rates exercise the uniformized fallback.
    let hard = ErlangSumParams::new(10, 0.1, 9, 0.2).unwrap();
    let easy = ErlangSumParams::new(2, 0.1, 1, 0.2).unwrap();
    c.bench_function("erlang_sum_survival_hard", |b| {
        b.iter(|| black_box(erlang_sum_survival(hard, 40.0).unwrap()));
    });
    c.bench_function("erlang_sum_survival_easy", |b| {
        b.iter(|| black_box(erlang_sum_survival(easy, 40.0).unwrap()));
    });
}

criterion_group!(benches, bench_simulation, bench_curve, bench_erlang_sum);
criterion_main!(benches);
