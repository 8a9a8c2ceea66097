//! Event-driven continuous-time simulation of whole trajectories.
//!
//! Each site carries a unit-rate arrival clock; a global priority queue over
//! per-site next-arrival times executes events in exact global time order,
//! with no time discretization. Absorption (every site holding the same gas)
//! is detected in O(1) per event through per-state occupancy counts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::blocks::ScoreTable;
use crate::error::{Error, Result};
use crate::model::{
    apply_in_place, is_absorbing, weight, ArrivalKind, Boundary, Configuration, GasCount,
    ModelSpec, State, Weight,
};
use crate::randomness::{derive_stream, sub_seed, MasterSeed, SiteStream, TypeDraw, DOMAIN_RUN};

/// When to stop a trajectory. Absorption always stops the run; the time and
/// event budgets stop it earlier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    Absorption,
    MaxTime(f64),
    MaxEvents(u64),
}

impl StopRule {
    fn validate(self) -> Result<()> {
        match self {
            StopRule::MaxTime(t) if t <= 0.0 => {
                Err(Error::InvalidParameter("time budget must be positive".into()))
            }
            StopRule::MaxEvents(0) => {
                Err(Error::InvalidParameter("event budget must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// How much of the event log to keep. The fingerprint always covers every
/// event regardless.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogMode {
    None,
    /// Keep every k-th event.
    Thinned(u64),
    Full,
}

/// One executed arrival.
#[derive(Clone, Copy, Debug)]
pub struct EventRecord {
    pub time: f64,
    pub site: usize,
    pub gas: State,
    pub kind: ArrivalKind,
}

/// A complete simulated trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub spec: ModelSpec,
    pub initial: Configuration,
    pub seed: MasterSeed,
    /// Event log, possibly thinned or empty depending on the log mode.
    pub events: Vec<EventRecord>,
    pub final_config: Configuration,
    pub absorbed: Option<State>,
    pub final_time: f64,
    pub event_count: u64,
    /// Stable digest of the full event sequence.
    pub fingerprint: u64,
}

/// Min-heap entry ordered by (time, site).
#[derive(PartialEq)]
struct Pending {
    time: f64,
    site: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap. Times are finite non-NaN.
        other
            .time
            .partial_cmp(&self.time)
            .unwrap()
            .then_with(|| other.site.cmp(&self.site))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[inline]
fn fnv1a(hash: u64, word: u64) -> u64 {
    let mut h = hash;
    for byte in word.to_le_bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

struct OccupancyCounts {
    /// Finite variant: counts per state 0..=n. Infinite variant: only the
    /// counts of vacancies and 1s matter for absorption.
    counts: Vec<u64>,
    infinite: bool,
    size: u64,
}

impl OccupancyCounts {
    fn new(spec: &ModelSpec, config: &Configuration) -> Self {
        let (slots, infinite) = match spec.gases() {
            GasCount::Finite(n) => (n as usize + 1, false),
            GasCount::Infinite => (2, true),
        };
        let mut counts = vec![0u64; slots];
        for &s in config.states() {
            let slot = if infinite { usize::from(s == 1) } else { s as usize };
            if !infinite || s <= 1 {
                counts[slot] += 1;
            }
        }
        OccupancyCounts { counts, infinite, size: config.len() as u64 }
    }

    #[inline]
    fn update(&mut self, old: State, new: State) {
        if self.infinite {
            if old <= 1 {
                self.counts[old as usize] -= 1;
            }
            if new <= 1 {
                self.counts[new as usize] += 1;
            }
        } else {
            self.counts[old as usize] -= 1;
            self.counts[new as usize] += 1;
        }
    }

    /// `Some(gas)` when every site holds the same nonzero state.
    #[inline]
    fn absorbed(&self, config: &Configuration) -> Option<State> {
        if self.infinite {
            if self.counts[1] == self.size {
                return Some(1);
            }
            if self.size == 1 && self.counts[0] == 0 {
                return Some(config.state(0));
            }
            None
        } else {
            self.counts
                .iter()
                .enumerate()
                .skip(1)
                .find(|&(_, &c)| c == self.size)
                .map(|(g, _)| g as State)
        }
    }
}

/// Runs one trajectory without keeping the event log.
pub fn run(
    spec: &ModelSpec,
    initial: &Configuration,
    seed: MasterSeed,
    stop: StopRule,
) -> Result<Trajectory> {
    run_logged(spec, initial, seed, stop, LogMode::None)
}

/// Runs one trajectory, keeping as much of the event log as requested.
pub fn run_logged(
    spec: &ModelSpec,
    initial: &Configuration,
    seed: MasterSeed,
    stop: StopRule,
    log: LogMode,
) -> Result<Trajectory> {
    stop.validate()?;
    initial.validate()?;
    for &s in initial.states() {
        if s != 0 {
            spec.check_gas(s)?;
        }
    }

    let size = initial.len();
    let mut config = initial.clone();
    let mut counts = OccupancyCounts::new(spec, &config);
    let mut streams: Vec<SiteStream> = (0..size).map(|i| derive_stream(seed, i)).collect();
    let mut heap: BinaryHeap<Pending> = streams
        .iter()
        .map(|s| Pending { time: s.peek_time(), site: s.site() })
        .collect();

    let mut fingerprint = FNV_OFFSET;
    let mut events: Vec<EventRecord> = Vec::new();
    let mut event_count: u64 = 0;
    let mut time = 0.0f64;
    // Fresh molecule ids for the infinite variant.
    let mut next_id: State = initial.states().iter().copied().max().unwrap_or(1).max(1) + 1;

    let mut absorbed = counts.absorbed(&config);

    while absorbed.is_none() {
        let next_time = heap.peek().map(|p| p.time).unwrap();
        match stop {
            StopRule::MaxTime(horizon) => {
                if next_time > horizon {
                    time = horizon;
                    break;
                }
            }
            StopRule::MaxEvents(budget) => {
                if event_count >= budget {
                    break;
                }
            }
            StopRule::Absorption => {}
        }
        let pending = heap.pop().unwrap();
        let site = pending.site;
        let (t, draw, order) = streams[site].next_arrival(spec);
        debug_assert_eq!(t.to_bits(), pending.time.to_bits());
        let gas = match draw {
            TypeDraw::Gas(g) => g,
            TypeDraw::FreshNonOne => {
                let id = next_id;
                next_id += 1;
                id
            }
        };
        time = t;
        let [left, right] = config.neighbors(site);
        let prior_left = left.map(|i| config.state(i));
        let prior_right = right.map(|i| config.state(i));
        let before = config.state(site);
        let kind = apply_in_place(&mut config, site, gas, order);
        match kind {
            ArrivalKind::Stick => counts.update(before, gas),
            ArrivalKind::React { victim } => {
                let prior = if Some(victim) == left {
                    prior_left.unwrap()
                } else {
                    prior_right.unwrap()
                };
                counts.update(prior, 0);
            }
            ArrivalKind::Noop => {}
        }
        event_count += 1;
        fingerprint = fnv1a(fingerprint, t.to_bits());
        fingerprint = fnv1a(fingerprint, site as u64);
        fingerprint = fnv1a(fingerprint, u64::from(gas));
        fingerprint = fnv1a(
            fingerprint,
            match kind {
                ArrivalKind::Stick => 1,
                ArrivalKind::React { victim } => 2 + victim as u64,
                ArrivalKind::Noop => 0,
            },
        );
        match log {
            LogMode::Full => events.push(EventRecord { time: t, site, gas, kind }),
            LogMode::Thinned(k) if event_count % k == 0 => {
                events.push(EventRecord { time: t, site, gas, kind })
            }
            _ => {}
        }
        heap.push(Pending { time: streams[site].peek_time(), site });
        absorbed = counts.absorbed(&config);
    }

    debug_assert_eq!(absorbed, is_absorbing(&config));
    Ok(Trajectory {
        spec: spec.clone(),
        initial: initial.clone(),
        seed,
        events,
        final_config: config,
        absorbed,
        final_time: time,
        event_count,
        fingerprint,
    })
}

/// Absorption statistics over independent replicas.
#[derive(Clone, Debug)]
pub struct AbsorptionStats {
    pub runs: u64,
    /// Absorption counts per gas.
    pub counts: std::collections::BTreeMap<State, u64>,
    /// Runs that exhausted their budget without absorbing.
    pub undecided: u64,
    /// Mean absorption time over the absorbed runs.
    pub mean_time: Option<f64>,
    pub mean_events: f64,
}

impl AbsorptionStats {
    pub fn frequency(&self, gas: State) -> f64 {
        *self.counts.get(&gas).unwrap_or(&0) as f64 / self.runs as f64
    }

    pub fn undecided_frequency(&self) -> f64 {
        self.undecided as f64 / self.runs as f64
    }
}

/// Default event budget per run: 10^4 arrivals per site.
pub fn default_event_budget(size: usize) -> u64 {
    10_000 * size as u64
}

/// Outcome of one replica in a batch.
#[derive(Clone, Copy, Debug)]
pub struct RunOutcome {
    pub run: u64,
    pub seed: u64,
    pub absorbed: Option<State>,
    pub final_time: f64,
    pub events: u64,
    pub fingerprint: u64,
}

/// Runs `runs` independent trajectories from the all-vacant configuration
/// under derived seeds.
pub fn absorption_runs(
    spec: &ModelSpec,
    size: usize,
    boundary: Boundary,
    runs: u64,
    seed: MasterSeed,
    budget: StopRule,
) -> Result<Vec<RunOutcome>> {
    if runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    budget.validate()?;
    let initial = Configuration::all_vacant(size, boundary);
    (0..runs)
        .into_par_iter()
        .map(|r| {
            let run_seed = MasterSeed(sub_seed(seed, DOMAIN_RUN, r));
            let traj = run(spec, &initial, run_seed, budget)?;
            Ok(RunOutcome {
                run: r,
                seed: run_seed.0,
                absorbed: traj.absorbed,
                final_time: traj.final_time,
                events: traj.event_count,
                fingerprint: traj.fingerprint,
            })
        })
        .collect()
}

/// Tallies absorption frequencies over a batch of outcomes.
pub fn tally(runs: &[RunOutcome]) -> AbsorptionStats {
    let mut counts = std::collections::BTreeMap::new();
    let mut undecided = 0u64;
    let mut time_sum = 0.0;
    let mut absorbed_runs = 0u64;
    let mut event_sum = 0u64;
    for out in runs {
        event_sum += out.events;
        match out.absorbed {
            Some(g) => {
                *counts.entry(g).or_insert(0) += 1;
                time_sum += out.final_time;
                absorbed_runs += 1;
            }
            None => undecided += 1,
        }
    }
    AbsorptionStats {
        runs: runs.len() as u64,
        counts,
        undecided,
        mean_time: (absorbed_runs > 0).then(|| time_sum / absorbed_runs as f64),
        mean_events: event_sum as f64 / runs.len().max(1) as f64,
    }
}

/// Runs `runs` independent trajectories from the all-vacant configuration
/// (derived seeds) and tallies which gas poisoned the lattice.
pub fn estimate_absorption(
    spec: &ModelSpec,
    size: usize,
    boundary: Boundary,
    runs: u64,
    seed: MasterSeed,
) -> Result<AbsorptionStats> {
    estimate_absorption_with(spec, size, boundary, runs, seed, StopRule::MaxEvents(default_event_budget(size)))
}

pub fn estimate_absorption_with(
    spec: &ModelSpec,
    size: usize,
    boundary: Boundary,
    runs: u64,
    seed: MasterSeed,
    budget: StopRule,
) -> Result<AbsorptionStats> {
    Ok(tally(&absorption_runs(spec, size, boundary, runs, seed, budget)?))
}

/// Monte Carlo estimate of the weight drift.
#[derive(Clone, Debug)]
pub struct DriftEstimate {
    pub replicas: u64,
    pub horizon: f64,
    /// Mean of (W(h) - W(0)) / h over replicas.
    pub mean: f64,
    pub std_error: f64,
    /// Normal-approximation 95% interval.
    pub ci95: (f64, f64),
}

/// Estimates the drift of the weight by simulating `replicas` independent
/// short trajectories. The weight is read at the horizon, or at the moment
/// the block of 1s at the origin dies, whichever comes first (past that
/// time the weight of the unstopped trajectory is no longer defined: a
/// non-1 molecule can occupy the origin). Trajectories whose weight
/// saturates (all sites 1) count the full lattice as block growth.
pub fn empirical_drift(
    spec: &ModelSpec,
    initial: &Configuration,
    table: &ScoreTable,
    horizon: f64,
    replicas: u64,
    seed: MasterSeed,
) -> Result<DriftEstimate> {
    if horizon <= 0.0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    if replicas == 0 {
        return Err(Error::InvalidParameter("need at least one replica".into()));
    }
    if initial.boundary() != Boundary::Blocked {
        return Err(Error::InvalidConfiguration("drift runs use a blocked boundary".into()));
    }
    if initial.state(0) != 1 {
        return Err(Error::InvalidConfiguration(
            "initial configuration must hold a block of 1s at the origin".into(),
        ));
    }
    let w0 = finite_weight(initial, table)?;
    let samples: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let run_seed = MasterSeed(sub_seed(seed, DOMAIN_RUN, r));
            let traj = run_logged(spec, initial, run_seed, StopRule::MaxTime(horizon), LogMode::Full)?;
            let w1 = stopped_weight(initial, &traj.events, table)?;
            Ok((w1 - w0) / horizon)
        })
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let std_error = (var / n).sqrt();
    Ok(DriftEstimate {
        replicas,
        horizon,
        mean,
        std_error,
        ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
    })
}

/// Weight with the saturated case mapped to its finite stand-in: a full
/// lattice of 1s counts as block growth to the lattice end, windows past the
/// end reading vacant.
fn finite_weight(config: &Configuration, table: &ScoreTable) -> Result<f64> {
    match weight(config, table)?.weight {
        Weight::Finite(w) => Ok(w),
        Weight::Infinite => {
            let pad = crate::blocks::canonicalize(&vec![0; table.block_len()])?;
            Ok(config.len() as f64 + table.score(&pad).unwrap_or(0.0))
        }
    }
}

/// Weight at the end of an event sequence, frozen at the moment the origin
/// block dies.
fn stopped_weight(
    initial: &Configuration,
    events: &[EventRecord],
    table: &ScoreTable,
) -> Result<f64> {
    let mut config = initial.clone();
    for ev in events {
        match ev.kind {
            ArrivalKind::Stick => config.set_state(ev.site, ev.gas),
            ArrivalKind::React { victim } => config.set_state(victim, 0),
            ArrivalKind::Noop => {}
        }
        if config.state(0) != 1 {
            break;
        }
    }
    finite_weight(&config, table)
}

/// One row of a rate sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub p1: f64,
    pub gas1_frequency: f64,
    pub undecided_frequency: f64,
    pub mean_time: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Whether gas-1 absorption frequency is nondecreasing along the grid.
    /// Reported, not asserted.
    pub monotone_trend: bool,
}

/// Sweeps `p1` over a grid, estimating absorption at each point with the
/// remaining rate split evenly over the other gases.
pub fn sweep(
    n: u32,
    grid: &[f64],
    size: usize,
    boundary: Boundary,
    runs: u64,
    seed: MasterSeed,
) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &p1) in grid.iter().enumerate() {
        if !(0.0 < p1 && p1 < 1.0) {
            return Err(Error::InvalidParameter(format!("grid point {p1} out of (0, 1)")));
        }
        let spec = ModelSpec::symmetric(n, p1)?;
        let point_seed = MasterSeed(sub_seed(seed, DOMAIN_RUN, 0x5745_4550 + i as u64));
        let stats = estimate_absorption(&spec, size, boundary, runs, point_seed)?;
        rows.push(SweepRow {
            p1,
            gas1_frequency: stats.frequency(1),
            undecided_frequency: stats.undecided_frequency(),
            mean_time: stats.mean_time,
        });
    }
    let monotone_trend = rows.windows(2).all(|w| w[0].gas1_frequency <= w[1].gas1_frequency);
    Ok(SweepReport { rows, monotone_trend })
}

/// The weight and its bounded transform sampled along one trajectory.
#[derive(Clone, Debug)]
pub struct DiagnosticsSeries {
    pub epsilon: f64,
    pub times: Vec<f64>,
    /// Weight values; `None` marks the saturated (all-1) state.
    pub weights: Vec<Option<f64>>,
    /// `1 - (1 - epsilon)^W`, which is 1 exactly when W is infinite.
    pub u_values: Vec<f64>,
    /// Time at which the block of 1s at the origin died, if it did; sampling
    /// freezes there.
    pub stopped_at: Option<f64>,
}

/// Samples `W` and `U = 1 - (1-eps)^W` along a trajectory, at every event
/// that touches the tracked window (the weight only changes on those), until
/// the origin block dies or the stop rule fires.
pub fn weight_series(
    spec: &ModelSpec,
    initial: &Configuration,
    table: &ScoreTable,
    epsilon: f64,
    seed: MasterSeed,
    stop: StopRule,
) -> Result<DiagnosticsSeries> {
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::InvalidParameter("epsilon must lie in (0, 1)".into()));
    }
    let traj = run_logged(spec, initial, seed, stop, LogMode::Full)?;
    let mut config = initial.clone();
    let mut series = DiagnosticsSeries {
        epsilon,
        times: Vec::new(),
        weights: Vec::new(),
        u_values: Vec::new(),
        stopped_at: None,
    };
    let sample = |cfg: &Configuration, t: f64, series: &mut DiagnosticsSeries| -> Result<()> {
        let rep = weight(cfg, table)?;
        let (w, u) = match rep.weight {
            Weight::Finite(w) => (Some(w), 1.0 - (1.0 - epsilon).powf(w)),
            Weight::Infinite => (None, 1.0),
        };
        series.times.push(t);
        series.weights.push(w);
        series.u_values.push(u);
        Ok(())
    };
    sample(&config, 0.0, &mut series)?;
    for ev in &traj.events {
        // Replay the recorded outcome directly.
        match ev.kind {
            ArrivalKind::Stick => config.set_state(ev.site, ev.gas),
            ArrivalKind::React { victim } => config.set_state(victim, 0),
            ArrivalKind::Noop => {}
        }
        let run_len = config.states().iter().take_while(|&&s| s == 1).count();
        if run_len == 0 {
            series.stopped_at = Some(ev.time);
            break;
        }
        // The window spans the run, its trailing 0 and the scored sites.
        if ev.site <= run_len + table.block_len() + 1 {
            sample(&config, ev.time, &mut series)?;
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::reference::reference_score_table;

    #[test]
    fn all_ones_is_absorbed_at_time_zero() {
        let spec = ModelSpec::symmetric(2, 0.5).unwrap();
        let initial = Configuration::uniform(4, 1, Boundary::Torus);
        let traj = run(&spec, &initial, MasterSeed(1), StopRule::Absorption).unwrap();
        assert_eq!(traj.absorbed, Some(1));
        assert_eq!(traj.event_count, 0);
        assert_eq!(traj.final_time, 0.0);
    }

    #[test]
    fn identical_inputs_give_identical_fingerprints() {
        let spec = ModelSpec::symmetric(3, 0.4).unwrap();
        let initial = Configuration::all_vacant(16, Boundary::Torus);
        let stop = StopRule::MaxEvents(500);
        let a = run(&spec, &initial, MasterSeed(99), stop).unwrap();
        let b = run(&spec, &initial, MasterSeed(99), stop).unwrap();
        assert_eq!(a.fingerprint, b.fingerprint);
        assert_eq!(a.final_config, b.final_config);
        let c = run(&spec, &initial, MasterSeed(100), stop).unwrap();
        assert_ne!(a.fingerprint, c.fingerprint);
    }

    #[test]
    fn single_site_absorbs_by_the_first_arrival_law() {
        let spec = ModelSpec::finite(vec![0.3, 0.7]).unwrap();
        let stats =
            estimate_absorption(&spec, 1, Boundary::Blocked, 10_000, MasterSeed(7)).unwrap();
        let f1 = stats.frequency(1);
        assert!((f1 - 0.3).abs() < 0.05, "gas-1 frequency {f1}");
        assert_eq!(stats.undecided, 0);
    }

    #[test]
    fn torus_event_rate_matches_lattice_size() {
        // Unit-rate clocks everywhere: events over the run concentrate
        // around size x elapsed time (the run may absorb before the horizon).
        let spec = ModelSpec::symmetric(2, 0.5).unwrap();
        let initial = Configuration::all_vacant(32, Boundary::Torus);
        let traj = run(&spec, &initial, MasterSeed(3), StopRule::MaxTime(100.0)).unwrap();
        let expect = 32.0 * traj.final_time;
        let sigma = expect.sqrt();
        assert!(
            (traj.event_count as f64 - expect).abs() < 5.0 * sigma,
            "events {} over time {}",
            traj.event_count,
            traj.final_time
        );
    }

    #[test]
    fn intermediate_configurations_stay_valid() {
        let spec = ModelSpec::symmetric(4, 0.47).unwrap();
        let initial = Configuration::all_vacant(24, Boundary::Torus);
        let traj =
            run_logged(&spec, &initial, MasterSeed(5), StopRule::MaxEvents(2000), LogMode::Full)
                .unwrap();
        let mut cfg = initial.clone();
        for ev in &traj.events {
            match ev.kind {
                ArrivalKind::Stick => cfg.set_state(ev.site, ev.gas),
                ArrivalKind::React { victim } => cfg.set_state(victim, 0),
                ArrivalKind::Noop => {}
            }
            cfg.validate().expect("invariant violated mid-trajectory");
        }
        assert_eq!(cfg, traj.final_config);
    }

    #[test]
    fn infinite_variant_runs_and_only_gas_one_poisons() {
        let spec = ModelSpec::infinite(0.6).unwrap();
        let stats =
            estimate_absorption(&spec, 8, Boundary::Torus, 50, MasterSeed(11)).unwrap();
        for (&gas, _) in &stats.counts {
            assert_eq!(gas, 1);
        }
    }

    #[test]
    fn degenerate_rates_never_shrink_the_weight() {
        let spec = ModelSpec::finite(vec![1.0, 0.0]).unwrap();
        let table = crate::blocks::ScoreTable::zeros(3, GasCount::Finite(2)).unwrap();
        let initial = Configuration::parse("1100000000000000", Boundary::Blocked).unwrap();
        let est =
            empirical_drift(&spec, &initial, &table, 0.5, 2_000, MasterSeed(13)).unwrap();
        assert!(est.mean >= 0.9, "mean drift {}", est.mean);
    }

    #[test]
    fn zero_horizon_is_rejected() {
        let spec = ModelSpec::symmetric(4, 0.47).unwrap();
        let table = reference_score_table();
        let initial = Configuration::parse("110222", Boundary::Blocked).unwrap();
        assert!(empirical_drift(&spec, &initial, &table, 0.0, 10, MasterSeed(1)).is_err());
    }

    #[test]
    fn sweep_reports_rows_and_rejects_empty_grids() {
        let err = sweep(3, &[], 16, Boundary::Torus, 10, MasterSeed(1));
        assert!(matches!(err, Err(Error::EmptyGrid)));
        let report =
            sweep(3, &[0.30, 0.50], 24, Boundary::Torus, 60, MasterSeed(21)).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(
            report.rows[1].gas1_frequency >= report.rows[0].gas1_frequency,
            "frequencies {:?}",
            report.rows.iter().map(|r| r.gas1_frequency).collect::<Vec<_>>()
        );
    }

    #[test]
    fn weight_series_is_bounded_and_saturates_at_one() {
        let spec = ModelSpec::finite(vec![1.0, 0.0]).unwrap();
        let table = crate::blocks::ScoreTable::zeros(3, GasCount::Finite(2)).unwrap();
        let initial = Configuration::parse("11000", Boundary::Blocked).unwrap();
        let series = weight_series(
            &spec,
            &initial,
            &table,
            0.1,
            MasterSeed(17),
            StopRule::MaxTime(50.0),
        )
        .unwrap();
        assert!(series.u_values.iter().all(|&u| (0.0..=1.0).contains(&u)));
        for (w, u) in series.weights.iter().zip(&series.u_values) {
            match w {
                None => assert_eq!(*u, 1.0),
                Some(_) => assert!(*u < 1.0),
            }
        }
        // Only gas 1 arrives: the 5-site lattice saturates.
        assert_eq!(*series.u_values.last().unwrap(), 1.0);
    }
}
