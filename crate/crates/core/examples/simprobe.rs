use std::time::Instant;

use catalysis_core::model::{Boundary, Configuration, ModelSpec};
use catalysis_core::randomness::MasterSeed;
use catalysis_core::score::reference::reference_score_table;
use catalysis_core::sim::{empirical_drift, estimate_absorption};

fn main() {
    // Criterion 6: n=4, p1=0.47, torus 128, 50 runs.
    let t0 = Instant::now();
    let spec = ModelSpec::symmetric(4, 0.47).unwrap();
    let stats = estimate_absorption(&spec, 128, Boundary::Torus, 50, MasterSeed(6)).unwrap();
    println!(
        "c6: gas1 {:.3} undecided {:.3} mean_events {:.0} [{:.1}s]",
        stats.frequency(1),
        stats.undecided_frequency(),
        stats.mean_events,
        t0.elapsed().as_secs_f64()
    );

    // Criterion 7: p1=0.9, 100 runs.
    let t0 = Instant::now();
    let spec = ModelSpec::symmetric(4, 0.9).unwrap();
    let stats = estimate_absorption(&spec, 64, Boundary::Torus, 100, MasterSeed(7)).unwrap();
    println!(
        "c7: gas1 {:.3} [{:.1}s]",
        stats.frequency(1),
        t0.elapsed().as_secs_f64()
    );

    // Criterion 8: n=2 fair, torus 64, 400 runs.
    let t0 = Instant::now();
    let spec = ModelSpec::symmetric(2, 0.5).unwrap();
    let stats = estimate_absorption(&spec, 64, Boundary::Torus, 400, MasterSeed(8)).unwrap();
    println!(
        "c8: gas1 {:.3} gas2 {:.3} undecided {:.3} [{:.1}s]",
        stats.frequency(1),
        stats.frequency(2),
        stats.undecided_frequency(),
        t0.elapsed().as_secs_f64()
    );

    // Criterion 11: drift estimate, 1e4 replicas, horizon 0.2.
    let t0 = Instant::now();
    let spec = ModelSpec::symmetric(4, 0.47).unwrap();
    let initial = Configuration::parse("110222222222222222222222", Boundary::Blocked).unwrap();
    let table = reference_score_table();
    for seed in [11u64, 42, 2024] {
        let est =
            empirical_drift(&spec, &initial, &table, 0.2, 10_000, MasterSeed(seed)).unwrap();
        println!(
            "c11 seed {seed}: mean {:+.5} se {:.5} ci [{:+.5}, {:+.5}]",
            est.mean, est.std_error, est.ci95.0, est.ci95.1
        );
    }
    println!("c11 [{:.1}s]", t0.elapsed().as_secs_f64());

    // Higher-replica check of the same quantity.
    let est = empirical_drift(&spec, &initial, &table, 0.2, 4_000_000, MasterSeed(11)).unwrap();
    println!(
        "c11 4M replicas: mean {:+.6} se {:.6} ci [{:+.6}, {:+.6}]",
        est.mean, est.std_error, est.ci95.0, est.ci95.1
    );
}
