//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities (run with `-- --nocapture` to see the lines
//! for passing criteria). The long threshold search is `#[ignore]`d; run it
//! with `-- --ignored`.

use std::time::Instant;

use catalysis_core::blocks::{canonicalize, enumerate_blocks, CanonicalBlock};
use catalysis_core::coupling::{
    monotonicity_check, parse_script, replay, CoupledState, BUNDLED_SCRIPT,
};
use catalysis_core::model::{Boundary, Configuration, GasCount, ModelSpec, State};
use catalysis_core::randomness::MasterSeed;
use catalysis_core::score::reference::{check_reference_table, reference_score_table};
use catalysis_core::score::{
    drift, fixed_point_solve, test_reference_block, threshold_search, verify_certificate,
    Completion, DriftParams, SolverConfig,
};
use catalysis_core::sim::{empirical_drift, estimate_absorption, run, StopRule};

#[test]
fn criterion_01_block_enumeration() {
    let t0 = Instant::now();
    let four = enumerate_blocks(3, GasCount::Finite(4)).unwrap();
    let expected = [
        "000", "001", "002", "010", "011", "020", "022", "100", "101", "102", "110", "111",
        "200", "201", "202", "203", "220", "222",
    ];
    let got: Vec<String> = four.iter().map(|b| b.to_string()).collect();
    assert_eq!(got, expected, "criterion 1 FAIL: 18-block enumeration");

    let two = enumerate_blocks(3, GasCount::Finite(2)).unwrap();
    // Independent oracle: brute-force filter over {0,1,2}^3.
    let mut brute = Vec::new();
    for a in 0..3u32 {
        for b in 0..3u32 {
            for c in 0..3u32 {
                if let Ok(canon) = canonicalize(&[a, b, c]) {
                    if canon.symbols() == [a, b, c] {
                        brute.push(canon);
                    }
                }
            }
        }
    }
    brute.sort();
    assert_eq!(two, brute, "criterion 1 FAIL: 2-gas enumeration vs brute force");
    assert_eq!(two.len(), 17, "criterion 1 FAIL: expected 17 blocks for 2 gases");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 1 FAIL: took {elapsed:?}");
    println!("criterion 1 PASS: 18 blocks (4 gases), 17 blocks (2 gases) in {elapsed:?}");
}

#[test]
fn criterion_02_reference_table_reproduction() {
    let t0 = Instant::now();
    let check = check_reference_table(0.47, 6).unwrap();
    for row in &check.rows {
        assert!(
            (row.computed - row.expected).abs() <= 2e-3,
            "criterion 2 FAIL: block {} computed {:+.5} vs expected {:+.4}",
            row.block,
            row.computed,
            row.expected
        );
    }
    // Spot values, straight from the single-scenario drift at the listed follower.
    let table = reference_score_table();
    let params = DriftParams::new(GasCount::Finite(4), 0.47).unwrap();
    let spot = |block: &str, followers: &[State], expected: f64| {
        let b = CanonicalBlock::parse(block).unwrap();
        let rep = drift(&b, &table, &params, followers, Completion::Pessimistic).unwrap();
        assert!(
            (rep.value - expected).abs() <= 2e-3,
            "criterion 2 FAIL: spot {block} -> {:+.5} vs {expected:+.4}",
            rep.value
        );
    };
    spot("222", &[2], 0.0007);
    spot("022", &[2], 0.0034);
    spot("110", &[2, 2, 2], 0.0040);
    spot("000", &[2], 0.0055);
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 2 FAIL: took {elapsed:?}");
    println!(
        "criterion 2 PASS: all 18 drifts within 2e-3 (max deviation {:.6}) in {elapsed:?}",
        check.max_deviation()
    );
}

#[test]
fn criterion_03_certificate() {
    let t0 = Instant::now();
    let table = reference_score_table();
    let cert = verify_certificate(0.47, GasCount::Finite(4), 3, &table, 6).unwrap();
    assert!(cert.positive(), "criterion 3 FAIL: verdict {}", cert.verdict);
    assert!(cert.c >= 1e-4, "criterion 3 FAIL: c = {}", cert.c);
    let check = check_reference_table(0.47, 6).unwrap();
    for row in &check.rows {
        match row.follower_match {
            Some(ok) => assert!(
                ok,
                "criterion 3 FAIL: block {} worst scenario {} does not extend the listed follower",
                row.block, row.worst_scenario
            ),
            // The mixed-follower block: only positivity is required.
            None => assert!(
                row.worst_drift > 0.0,
                "criterion 3 FAIL: mixed-follower block {} not positive",
                row.block
            ),
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "criterion 3 FAIL: took {elapsed:?}");
    println!(
        "criterion 3 PASS: verdict {} with c = {:.6}, followers match, in {elapsed:?}",
        cert.verdict, cert.c
    );
}

#[test]
fn criterion_04_solver() {
    let mut cfg = SolverConfig::new(GasCount::Finite(4), 3, 0.4699);
    cfg.tolerance = 1e-6;
    cfg.max_sweeps = 10_000;
    let out = fixed_point_solve(&cfg).unwrap();
    assert!(
        out.converged && out.sweeps <= 10_000,
        "criterion 4 FAIL: no convergence in {} sweeps",
        out.sweeps
    );
    let reference_test = test_reference_block(&out.table, 0.4699, cfg.follower_bound).unwrap();
    assert!(reference_test > 0.0, "criterion 4 FAIL: reference test {reference_test}");

    let published = reference_score_table();
    let mut max_dev: f64 = 0.0;
    let mut worst = String::new();
    for (block, score) in published.iter() {
        let dev = (out.table.score(block).unwrap() - score).abs();
        if dev > max_dev {
            max_dev = dev;
            worst = block.to_string();
        }
    }
    println!(
        "criterion 4: converged in {} sweeps, reference test {:+.6}, max score deviation {:.4} (block {})",
        out.sweeps, reference_test, max_dev, worst
    );
    // The bundled table is not an exact fixed point of its own equations
    // (its residuals at 0.4699 are +0.0002..+0.0056); the exactly solved
    // scores sit a near-uniform +0.027 above it along the soft mode of the
    // nearly singular system, so this bound fails by ~0.011.
    assert!(
        max_dev < 0.02,
        "criterion 4 FAIL: max score deviation {max_dev:.4} (block {worst}) exceeds 0.02"
    );
    println!("criterion 4 PASS");
}

#[test]
fn criterion_05a_threshold_four_gases_len3() {
    let res = threshold_search(GasCount::Finite(4), 3, 6, 1e-4).unwrap();
    let p1 = res.p1_star.expect("criterion 5a FAIL: no certificate found");
    println!("criterion 5a: threshold_search(4, 3) = {p1:.6}");
    // Exact solving certifies slightly below the published 0.4699 (the
    // published scores are a loosely converged iterate), so this band
    // fails by ~0.0005.
    assert!(
        (0.4690..=0.4710).contains(&p1),
        "criterion 5a FAIL: threshold {p1:.6} outside [0.4690, 0.4710]"
    );
    println!("criterion 5a PASS");
}

#[test]
fn criterion_05b_threshold_infinite_len2() {
    let res = threshold_search(GasCount::Infinite, 2, 6, 1e-4).unwrap();
    let p1 = res.p1_star.expect("criterion 5b FAIL: no certificate found");
    assert!(
        (0.455..=0.465).contains(&p1),
        "criterion 5b FAIL: threshold {p1:.6} outside [0.455, 0.465]"
    );
    println!("criterion 5b PASS: threshold_search(infinite, 2) = {p1:.6}");
}

#[test]
#[ignore = "slow: minutes of bisection over 5-site blocks"]
fn criterion_05c_threshold_three_gases_len5() {
    let cfg = SolverConfig::new(GasCount::Finite(3), 5, 0.5);
    let res = threshold_search(GasCount::Finite(3), 5, cfg.follower_bound, 1e-4).unwrap();
    let p1 = res.p1_star.expect("criterion 5c FAIL: no certificate found");
    println!("criterion 5c: threshold_search(3, 5) = {p1:.6}");
    assert!(p1 <= 0.447, "criterion 5c FAIL: threshold {p1:.6} above 0.447");
    println!("criterion 5c PASS");
}

#[test]
fn criterion_06_poisoning_below_half() {
    let spec = ModelSpec::symmetric(4, 0.47).unwrap();
    let stats = estimate_absorption(&spec, 128, Boundary::Torus, 50, MasterSeed(6)).unwrap();
    let f1 = stats.frequency(1);
    assert!(
        f1 >= 0.90,
        "criterion 6 FAIL: gas-1 absorption frequency {f1:.3} below 0.90 \
         (undecided {:.3})",
        stats.undecided_frequency()
    );
    println!(
        "criterion 6 PASS: {:.0}% of 50 runs absorbed to all-1 at p1 = 0.47 (size 128)",
        100.0 * f1
    );
}

#[test]
fn criterion_07_poisoning_above_half() {
    let spec = ModelSpec::symmetric(4, 0.9).unwrap();
    let stats = estimate_absorption(&spec, 64, Boundary::Torus, 100, MasterSeed(7)).unwrap();
    let f1 = stats.frequency(1);
    assert!(f1 >= 0.99, "criterion 7 FAIL: gas-1 absorption frequency {f1:.3}");
    println!("criterion 7 PASS: {:.0}% of 100 runs absorbed to all-1 at p1 = 0.9", 100.0 * f1);
}

#[test]
fn criterion_08_exchange_symmetry() {
    let spec = ModelSpec::symmetric(2, 0.5).unwrap();
    let stats = estimate_absorption(&spec, 64, Boundary::Torus, 400, MasterSeed(8)).unwrap();
    let f1 = stats.frequency(1);
    assert!(
        (0.40..=0.60).contains(&f1),
        "criterion 8 FAIL: gas-1 absorption frequency {f1:.3} outside [0.40, 0.60]"
    );
    println!("criterion 8 PASS: gas-1 absorption frequency {f1:.3} over 400 fair runs");
}

/// Exact absorption probability into all-1 for the 2-site blocked lattice
/// with two gases, by value iteration on the embedded jump chain. Written
/// against the arrival rule directly, independent of the simulator.
fn two_site_all_one_probability(p: f64) -> f64 {
    let q = 1.0 - p;
    // States indexed by (s0, s1) with s in {0,1,2}; invalid pairs unreachable.
    let idx = |a: usize, b: usize| a * 3 + b;
    let mut h = vec![0.0f64; 9];
    h[idx(1, 1)] = 1.0;
    for _ in 0..10_000 {
        let mut next = h.clone();
        for a in 0..3usize {
            for b in 0..3usize {
                // Absorbing (all-same nonzero) and invalid (adjacent
                // differing) states stay put.
                if a != 0 && b != 0 {
                    continue;
                }
                let mut value = 0.0;
                let mut total = 0.0;
                for (g, rate) in [(1usize, p), (2usize, q)] {
                    if a == 0 {
                        // Arrival at site 0: react with an occupied differing
                        // neighbor, else stick.
                        let (na, nb) = if b != 0 && b != g { (0, 0) } else { (g, b) };
                        value += rate * h[idx(na, nb)];
                        total += rate;
                    }
                    if b == 0 {
                        let (na, nb) = if a != 0 && a != g { (0, 0) } else { (a, g) };
                        value += rate * h[idx(na, nb)];
                        total += rate;
                    }
                }
                if total > 0.0 {
                    next[idx(a, b)] = value / total;
                }
            }
        }
        h = next;
    }
    h[idx(0, 0)]
}

#[test]
fn criterion_09_small_lattice_oracle() {
    for p in [0.3, 0.5, 0.7] {
        let exact = two_site_all_one_probability(p);
        // Closed form for this chain: h = p^2 / (1 - 2 p q).
        let closed = p * p / (1.0 - 2.0 * p * (1.0 - p));
        assert!(
            (exact - closed).abs() < 1e-10,
            "criterion 9 FAIL: oracle {exact} vs closed form {closed}"
        );
        let spec = ModelSpec::finite(vec![p, 1.0 - p]).unwrap();
        let runs = 10_000u64;
        let stats =
            estimate_absorption(&spec, 2, Boundary::Blocked, runs, MasterSeed(90 + (p * 10.0) as u64))
                .unwrap();
        let f1 = stats.frequency(1);
        let sigma = (exact * (1.0 - exact) / runs as f64).sqrt();
        assert!(
            (f1 - exact).abs() <= 3.0 * sigma,
            "criterion 9 FAIL: p = {p}: simulated {f1:.4} vs exact {exact:.4} (3 sigma = {:.4})",
            3.0 * sigma
        );
        println!("criterion 9: p = {p}: simulated {f1:.4}, exact {exact:.4}");
    }
    println!("criterion 9 PASS");
}

#[test]
fn criterion_10_coupling_replay() {
    let script = parse_script(BUNDLED_SCRIPT).unwrap();
    let initial = CoupledState::all_vacant(10, Boundary::Blocked);
    let states = replay(&initial, &script).unwrap();
    let expected = [
        ("0000000000", "0000000000"),
        ("0000200000", "0000100000"),
        ("0000220000", "0000000000"),
        ("0000220000", "0000300000"),
        ("0000020000", "0003300000"),
        ("0000000000", "0003303000"),
        ("0000010000", "0003003000"),
    ];
    assert_eq!(states.len(), expected.len(), "criterion 10 FAIL: wrong step count");
    for (i, (state, (a, b))) in states.iter().zip(expected).enumerate() {
        assert_eq!(state.first.to_text().unwrap(), a, "criterion 10 FAIL at step {i}");
        assert_eq!(state.second.to_text().unwrap(), b, "criterion 10 FAIL at step {i}");
    }
    let violations = monotonicity_check(states.last().unwrap()).unwrap();
    assert_eq!(violations, vec![5], "criterion 10 FAIL: violations {violations:?}");

    // The alternate final ordering.
    let mut alt = script;
    alt.last_mut().unwrap().order = catalysis_core::model::NeighborOrder::PreferRight;
    let states = replay(&initial, &alt).unwrap();
    let last = states.last().unwrap();
    assert_eq!(last.first.to_text().unwrap(), "0000010000");
    assert_eq!(last.second.to_text().unwrap(), "0003300000");
    assert_eq!(monotonicity_check(last).unwrap(), vec![5]);
    println!("criterion 10 PASS: both endings reproduced, site 5 flagged");
}

#[test]
fn criterion_11_empirical_drift() {
    let spec = ModelSpec::symmetric(4, 0.47).unwrap();
    let initial = Configuration::parse("110222222222222222222222", Boundary::Blocked).unwrap();
    let table = reference_score_table();
    let est = empirical_drift(&spec, &initial, &table, 0.2, 10_000, MasterSeed(11)).unwrap();
    println!(
        "criterion 11: mean dW/dt = {:+.5} +- {:.5} over 10^4 replicas, 95% CI [{:+.5}, {:+.5}]",
        est.mean, est.std_error, est.ci95.0, est.ci95.1
    );
    // The drift at these parameters is ~3e-4 per unit time while one
    // replica's dW/dt has a standard deviation near 1, so 10^4 replicas put
    // the standard error near 1e-2: the stated confidence cannot be reached
    // at this sample size (it needs ~10^8 replicas).
    assert!(
        est.ci95.0 > 0.0,
        "criterion 11 FAIL: 95% CI lower bound {:+.5} not positive (mean {:+.5}, se {:.5})",
        est.ci95.0,
        est.mean,
        est.std_error
    );
    println!("criterion 11 PASS");
}

#[test]
fn criterion_12_determinism() {
    // Trajectory fingerprints.
    let spec = ModelSpec::symmetric(3, 0.4).unwrap();
    let initial = Configuration::all_vacant(32, Boundary::Torus);
    let a = run(&spec, &initial, MasterSeed(12), StopRule::MaxEvents(5_000)).unwrap();
    let b = run(&spec, &initial, MasterSeed(12), StopRule::MaxEvents(5_000)).unwrap();
    assert_eq!(a.fingerprint, b.fingerprint, "criterion 12 FAIL: fingerprints differ");
    assert_eq!(a.final_config, b.final_config);

    // Byte-identical CSV bodies across two CLI runs of the same config.
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let code = catalysis_cli::dispatch([
            "catalysis",
            "simulate",
            "--n",
            "3",
            "--p1",
            "0.4",
            "--size",
            "24",
            "--runs",
            "60",
            "--seed",
            "12",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "criterion 12 FAIL: simulate exited {code}");
    }
    for name in ["runs.csv", "summary.csv"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "criterion 12 FAIL: {name} differs between identical runs");
    }
    println!("criterion 12 PASS: identical fingerprints and byte-identical CSV bodies");
}
