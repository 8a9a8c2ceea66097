//! Coupled two-system dynamics.
//!
//! The obvious coupling of two models lets particles fall at the same site
//! at the same time, with the pair of types drawn from a joint law whose
//! marginals are the two systems' rate vectors; when both particles have a
//! choice of reaction partner they choose the same side. The bundled script
//! replays a short realization in which the slower-spreading system ends up
//! holding a 1 where the faster one does not, so this coupling does not
//! preserve the natural order of the 1-processes.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    apply_in_place, Boundary, Configuration, ModelSpec, NeighborOrder, State,
};
use crate::randomness::{derive_stream, sub_seed, MasterSeed, SiteStream, DOMAIN_RUN};

/// Joint law over ordered type pairs.
#[derive(Clone, Debug)]
pub struct JointArrivalLaw {
    entries: BTreeMap<(State, State), f64>,
}

impl JointArrivalLaw {
    pub fn new(pairs: Vec<((State, State), f64)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut total = 0.0;
        for ((a, b), p) in pairs {
            if a == 0 || b == 0 {
                return Err(Error::CouplingLaw("pair types must be nonzero".into()));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::CouplingLaw(format!("probability {p} out of [0, 1]")));
            }
            total += p;
            *entries.entry((a, b)).or_insert(0.0) += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::CouplingLaw(format!("probabilities sum to {total}")));
        }
        Ok(JointArrivalLaw { entries })
    }

    /// The coupling of (1/3, 1/3, 1/3) with (1/2, 1/4, 1/4).
    pub fn third_vs_half() -> Self {
        JointArrivalLaw::new(vec![
            ((1, 1), 1.0 / 3.0),
            ((2, 1), 1.0 / 12.0),
            ((2, 2), 1.0 / 4.0),
            ((3, 1), 1.0 / 12.0),
            ((3, 3), 1.0 / 4.0),
        ])
        .expect("bundled law is valid")
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(State, State), f64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    fn marginal(&self, first: bool) -> BTreeMap<State, f64> {
        let mut out = BTreeMap::new();
        for (&(a, b), &p) in &self.entries {
            *out.entry(if first { a } else { b }).or_insert(0.0) += p;
        }
        out
    }

    /// Checks that the marginals equal the two systems' rate vectors.
    pub fn check_marginals(&self, first: &ModelSpec, second: &ModelSpec) -> Result<()> {
        for (spec, is_first) in [(first, true), (second, false)] {
            let marginal = self.marginal(is_first);
            for (i, &rate) in spec.rates().iter().enumerate() {
                let gas = i as State + 1;
                let got = marginal.get(&gas).copied().unwrap_or(0.0);
                if (got - rate).abs() > 1e-12 {
                    return Err(Error::CouplingLaw(format!(
                        "marginal of gas {gas} is {got}, spec says {rate}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Maps a uniform variate to a pair, walking entries in key order.
    pub fn draw(&self, u: f64) -> (State, State) {
        let mut acc = 0.0;
        let mut last = (1, 1);
        for (&pair, &p) in &self.entries {
            acc += p;
            last = pair;
            if u < acc {
                return pair;
            }
        }
        last
    }
}

/// Two same-size configurations advancing under shared arrivals.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledState {
    pub first: Configuration,
    pub second: Configuration,
}

impl CoupledState {
    pub fn all_vacant(size: usize, boundary: Boundary) -> Self {
        CoupledState {
            first: Configuration::all_vacant(size, boundary),
            second: Configuration::all_vacant(size, boundary),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.first.validate()?;
        self.second.validate()?;
        if self.first.len() != self.second.len() {
            return Err(Error::InvalidConfiguration("coupled systems differ in size".into()));
        }
        Ok(())
    }
}

/// Applies one coupled arrival: the same site and the same neighbor ordering
/// in both systems, each with its own type.
pub fn coupled_arrival(
    state: &CoupledState,
    site: usize,
    pair: (State, State),
    order: NeighborOrder,
) -> Result<CoupledState> {
    state.validate()?;
    if site >= state.first.len() {
        return Err(Error::InvalidSite { site, len: state.first.len() });
    }
    if pair.0 == 0 || pair.1 == 0 {
        return Err(Error::VacantArrival);
    }
    let mut next = state.clone();
    apply_in_place(&mut next.first, site, pair.0, order);
    apply_in_place(&mut next.second, site, pair.1, order);
    Ok(next)
}

/// One scripted coupled event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScriptEvent {
    pub site: usize,
    pub pair: (State, State),
    pub order: NeighborOrder,
}

/// The bundled counterexample script (10 blocked sites, both systems
/// starting all-vacant).
pub const BUNDLED_SCRIPT: &str = include_str!("../data/section4.script");

/// Parses a script: one event per line, `site type_a type_b order`, with
/// `order` either `L` or `R`. `#` starts a comment.
pub fn parse_script(text: &str) -> Result<Vec<ScriptEvent>> {
    let mut events = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Script(format!(
                "line {}: expected `site type_a type_b order`",
                lineno + 1
            )));
        }
        let parse_num = |s: &str| -> Result<u32> {
            s.parse()
                .map_err(|_| Error::Script(format!("line {}: bad number {s:?}", lineno + 1)))
        };
        let order = match fields[3] {
            "L" | "l" => NeighborOrder::PreferLeft,
            "R" | "r" => NeighborOrder::PreferRight,
            other => {
                return Err(Error::Script(format!("line {}: bad order {other:?}", lineno + 1)))
            }
        };
        events.push(ScriptEvent {
            site: parse_num(fields[0])? as usize,
            pair: (parse_num(fields[1])?, parse_num(fields[2])?),
            order,
        });
    }
    Ok(events)
}

/// Deterministic fold of `coupled_arrival`, returning every intermediate
/// state (the initial state first).
pub fn replay(initial: &CoupledState, script: &[ScriptEvent]) -> Result<Vec<CoupledState>> {
    initial.validate()?;
    let mut states = Vec::with_capacity(script.len() + 1);
    states.push(initial.clone());
    for ev in script {
        let next = coupled_arrival(states.last().unwrap(), ev.site, ev.pair, ev.order)?;
        states.push(next);
    }
    Ok(states)
}

/// Sites where the first system holds a 1 and the second does not.
pub fn monotonicity_check(state: &CoupledState) -> Result<Vec<usize>> {
    if state.first.len() != state.second.len() {
        return Err(Error::InvalidConfiguration("coupled systems differ in size".into()));
    }
    Ok((0..state.first.len())
        .filter(|&i| state.first.state(i) == 1 && state.second.state(i) != 1)
        .collect())
}

/// Monte Carlo estimate of how often the coupling violates monotonicity.
#[derive(Clone, Debug)]
pub struct ViolationStats {
    pub runs: u64,
    /// Runs in which some site ever held a 1 in the first system but not in
    /// the second.
    pub violating_runs: u64,
    pub frequency: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CouplingMcConfig {
    pub size: usize,
    pub boundary: Boundary,
    pub horizon: f64,
    pub runs: u64,
    pub seed: MasterSeed,
}

/// Runs coupled trajectories driven by the per-site streams (pair types from
/// the joint law, shared orderings) and counts runs with at least one
/// monotonicity violation before the horizon.
pub fn violation_frequency(law: &JointArrivalLaw, cfg: &CouplingMcConfig) -> Result<ViolationStats> {
    if cfg.runs == 0 {
        return Err(Error::InvalidParameter("need at least one run".into()));
    }
    if cfg.horizon <= 0.0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let violating: u64 = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let run_seed = MasterSeed(sub_seed(cfg.seed, DOMAIN_RUN, r));
            u64::from(coupled_run_violates(law, cfg, run_seed))
        })
        .sum();
    Ok(ViolationStats {
        runs: cfg.runs,
        violating_runs: violating,
        frequency: violating as f64 / cfg.runs as f64,
    })
}

fn coupled_run_violates(law: &JointArrivalLaw, cfg: &CouplingMcConfig, seed: MasterSeed) -> bool {
    let mut state = CoupledState::all_vacant(cfg.size, cfg.boundary);
    let mut streams: Vec<SiteStream> = (0..cfg.size).map(|i| derive_stream(seed, i)).collect();
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(u64, usize)>> = streams
        .iter()
        .map(|s| std::cmp::Reverse((s.peek_time().to_bits(), s.site())))
        .collect();
    loop {
        let std::cmp::Reverse((bits, site)) = heap.pop().unwrap();
        if f64::from_bits(bits) > cfg.horizon {
            return false;
        }
        let raw = streams[site].next_raw();
        let pair = law.draw(raw.type_u);
        apply_in_place(&mut state.first, site, pair.0, raw.order);
        apply_in_place(&mut state.second, site, pair.1, raw.order);
        // Only the touched neighborhood can create a new violation.
        let [left, right] = state.first.neighbors(site);
        for idx in [Some(site), left, right].into_iter().flatten() {
            if state.first.state(idx) == 1 && state.second.state(idx) != 1 {
                return true;
            }
        }
        heap.push(std::cmp::Reverse((streams[site].peek_time().to_bits(), site)));
    }
}

/// Runs one coupled trajectory to the horizon and returns the final state.
/// Used by the marginal-fidelity checks.
pub fn coupled_run(
    law: &JointArrivalLaw,
    cfg: &CouplingMcConfig,
    seed: MasterSeed,
) -> CoupledState {
    let mut state = CoupledState::all_vacant(cfg.size, cfg.boundary);
    let mut streams: Vec<SiteStream> = (0..cfg.size).map(|i| derive_stream(seed, i)).collect();
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<(u64, usize)>> = streams
        .iter()
        .map(|s| std::cmp::Reverse((s.peek_time().to_bits(), s.site())))
        .collect();
    loop {
        let std::cmp::Reverse((bits, site)) = heap.pop().unwrap();
        if f64::from_bits(bits) > cfg.horizon {
            return state;
        }
        let raw = streams[site].next_raw();
        let pair = law.draw(raw.type_u);
        apply_in_place(&mut state.first, site, pair.0, raw.order);
        apply_in_place(&mut state.second, site, pair.1, raw.order);
        heap.push(std::cmp::Reverse((streams[site].peek_time().to_bits(), site)));
    }
}
