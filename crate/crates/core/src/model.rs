//! Single-event dynamics of the catalytic surface model on a finite 1-D
//! lattice, plus the weight function used by the drift machinery.
//!
//! States are `0` (vacant) or a gas type `>= 1`. Gas 1 is the distinguished
//! spreading gas. In the infinite-gas variant every non-1 molecule carries a
//! unique identifier, which makes the reaction rule below work unchanged:
//! two distinct molecules never share a state, so "differs" is just
//! `state != 0 && state != arriving`.

use serde::{Deserialize, Serialize};

use crate::blocks::{canonicalize, BlockSymbols, CanonicalBlock, ScoreTable};
use crate::error::{Error, Result};

/// Lattice site state: 0 = vacant, otherwise a gas type / molecule id.
pub type State = u32;

/// Number of gas types in the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GasCount {
    Finite(u32),
    Infinite,
}

impl std::fmt::Display for GasCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GasCount::Finite(n) => write!(f, "{n}"),
            GasCount::Infinite => write!(f, "infinite"),
        }
    }
}

/// Model parameters: gas count and arrival rates.
///
/// Rates sum to 1 (each lattice site sees a unit-rate arrival clock). In the
/// infinite-gas variant only the rate of gas 1 is stored; all other arrivals
/// are fresh molecules with total rate `1 - p1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    gases: GasCount,
    /// Finite variant: `rates[i]` is the arrival rate of gas `i+1`.
    /// Infinite variant: a single entry, the rate of gas 1.
    rates: Vec<f64>,
}

const RATE_SUM_TOL: f64 = 1e-12;

impl ModelSpec {
    /// A finite-gas model with an explicit rate vector `p_1..p_n`.
    pub fn finite(rates: Vec<f64>) -> Result<Self> {
        if rates.len() < 2 {
            return Err(Error::InvalidRates("need at least 2 gases".into()));
        }
        if rates.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidRates("every rate must lie in [0, 1]".into()));
        }
        let sum: f64 = rates.iter().sum();
        if (sum - 1.0).abs() > RATE_SUM_TOL {
            return Err(Error::InvalidRates(format!("rates sum to {sum}, expected 1")));
        }
        Ok(ModelSpec { gases: GasCount::Finite(rates.len() as u32), rates })
    }

    /// A finite-gas model where gases `2..=n` share the remaining rate.
    pub fn symmetric(n: u32, p1: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidRates("need at least 2 gases".into()));
        }
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidRates(format!("p1 = {p1} out of [0, 1]")));
        }
        let other = (1.0 - p1) / f64::from(n - 1);
        let mut rates = vec![other; n as usize];
        rates[0] = p1;
        Ok(ModelSpec { gases: GasCount::Finite(n), rates })
    }

    /// The infinite-gas variant: gas 1 at rate `p1`, fresh molecules at 1 - p1.
    pub fn infinite(p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidRates(format!("p1 = {p1} out of [0, 1]")));
        }
        Ok(ModelSpec { gases: GasCount::Infinite, rates: vec![p1] })
    }

    pub fn gases(&self) -> GasCount {
        self.gases
    }

    pub fn p1(&self) -> f64 {
        self.rates[0]
    }

    /// Finite variant: the full rate vector `p_1..p_n`.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Checks that a gas type is meaningful for this spec.
    pub fn check_gas(&self, gas: State) -> Result<()> {
        if gas == 0 {
            return Err(Error::VacantArrival);
        }
        if let GasCount::Finite(n) = self.gases {
            if gas > n {
                return Err(Error::UnknownGas { gas, n });
            }
        }
        Ok(())
    }
}

/// Lattice boundary behaviour.
///
/// `Blocked` means sites beyond both ends behave as permanently vacant and
/// never receive arrivals; `Torus` wraps around.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Torus,
    Blocked,
}

/// Which neighbor an arriving molecule prefers when both differ from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighborOrder {
    PreferLeft,
    PreferRight,
}

/// One state per site over a finite 1-D lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    states: Vec<State>,
    boundary: Boundary,
}

impl Configuration {
    pub fn new(states: Vec<State>, boundary: Boundary) -> Result<Self> {
        let config = Configuration { states, boundary };
        config.validate()?;
        Ok(config)
    }

    pub fn all_vacant(len: usize, boundary: Boundary) -> Self {
        Configuration { states: vec![0; len], boundary }
    }

    pub fn uniform(len: usize, state: State, boundary: Boundary) -> Self {
        Configuration { states: vec![state; len], boundary }
    }

    /// Parses the text form: one digit per site, `0` = vacant.
    pub fn parse(text: &str, boundary: Boundary) -> Result<Self> {
        let states = text
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| Error::InvalidConfiguration(format!("bad site character {c:?}")))
            })
            .collect::<Result<Vec<State>>>()?;
        Configuration::new(states, boundary)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn state(&self, site: usize) -> State {
        self.states[site]
    }

    pub(crate) fn set_state(&mut self, site: usize, state: State) {
        self.states[site] = state;
    }

    /// Left and right neighbor indices, if any.
    pub fn neighbors(&self, site: usize) -> [Option<usize>; 2] {
        let len = self.states.len();
        match self.boundary {
            Boundary::Blocked => [site.checked_sub(1), if site + 1 < len { Some(site + 1) } else { None }],
            Boundary::Torus => {
                if len < 2 {
                    // A single wrapped site is its own neighbor; reactions
                    // with itself are impossible, so report no neighbors.
                    [None, None]
                } else {
                    [Some((site + len - 1) % len), Some((site + 1) % len)]
                }
            }
        }
    }

    /// Checks the adjacency invariant: no two adjacent sites hold distinct
    /// nonzero states.
    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::InvalidConfiguration("empty lattice".into()));
        }
        let bad = |a: State, b: State| a != 0 && b != 0 && a != b;
        for w in self.states.windows(2) {
            if bad(w[0], w[1]) {
                return Err(Error::InvalidConfiguration(format!(
                    "adjacent differing molecules {} and {}",
                    w[0], w[1]
                )));
            }
        }
        if self.boundary == Boundary::Torus && self.states.len() >= 2 {
            let (first, last) = (self.states[0], *self.states.last().unwrap());
            if bad(last, first) {
                return Err(Error::InvalidConfiguration(format!(
                    "adjacent differing molecules {last} and {first} across the wrap"
                )));
            }
        }
        Ok(())
    }

    /// Text form, only defined when all states are single digits.
    pub fn to_text(&self) -> Result<String> {
        if self.states.iter().any(|&s| s > 9) {
            return Err(Error::InvalidConfiguration(
                "text form requires states 0..9".into(),
            ));
        }
        Ok(self.states.iter().map(|s| char::from(b'0' + *s as u8)).collect())
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.to_text() {
            Ok(s) => f.write_str(&s),
            Err(_) => {
                let parts: Vec<String> = self.states.iter().map(|s| s.to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
        }
    }
}

/// What a single arrival did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArrivalKind {
    /// The molecule stuck at the target site.
    Stick,
    /// The molecule reacted with the occupant of `victim`; both sites are
    /// vacant afterwards.
    React { victim: usize },
    /// The target site was occupied; nothing happened.
    Noop,
}

/// Outcome of `apply_arrival`: what happened plus the resulting configuration.
#[derive(Clone, Debug)]
pub struct ArrivalOutcome {
    pub kind: ArrivalKind,
    pub config: Configuration,
}

/// Core transition, no validation. Callers guarantee `site` is in range and
/// `gas != 0`; the adjacency invariant is preserved by construction.
pub(crate) fn apply_in_place(
    config: &mut Configuration,
    site: usize,
    gas: State,
    order: NeighborOrder,
) -> ArrivalKind {
    debug_assert!(site < config.len());
    debug_assert!(gas != 0);
    if config.states[site] != 0 {
        return ArrivalKind::Noop;
    }
    let differs = |idx: Option<usize>| -> Option<usize> {
        idx.filter(|&i| {
            let s = config.states[i];
            s != 0 && s != gas
        })
    };
    let [left, right] = config.neighbors(site);
    let (dl, dr) = (differs(left), differs(right));
    let victim = match (dl, dr) {
        (None, None) => {
            config.states[site] = gas;
            return ArrivalKind::Stick;
        }
        (Some(v), None) | (None, Some(v)) => v,
        (Some(l), Some(r)) => match order {
            NeighborOrder::PreferLeft => l,
            NeighborOrder::PreferRight => r,
        },
    };
    config.states[victim] = 0;
    ArrivalKind::React { victim }
}

/// Applies one arrival of `gas` at `site`, breaking two-sided reaction ties
/// with `order`. The input must satisfy the adjacency invariant.
pub fn apply_arrival(
    config: &Configuration,
    site: usize,
    gas: State,
    order: NeighborOrder,
) -> Result<ArrivalOutcome> {
    config.validate()?;
    if site >= config.len() {
        return Err(Error::InvalidSite { site, len: config.len() });
    }
    if gas == 0 {
        return Err(Error::VacantArrival);
    }
    let mut next = config.clone();
    let kind = apply_in_place(&mut next, site, gas, order);
    debug_assert!(next.validate().is_ok());
    Ok(ArrivalOutcome { kind, config: next })
}

/// Returns `Some(i)` iff every site holds gas `i >= 1`. The all-vacant
/// configuration is not absorbing: it still receives arrivals.
pub fn is_absorbing(config: &Configuration) -> Option<State> {
    let first = *config.states().first()?;
    if first == 0 {
        return None;
    }
    config.states().iter().all(|&s| s == first).then_some(first)
}

/// Block length `|B|`: the maximal run of 1s starting at site 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockLen {
    Finite(usize),
    Infinite,
}

/// A weight value; infinite exactly when every site is 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weight {
    Finite(f64),
    Infinite,
}

impl Weight {
    pub fn finite(self) -> Option<f64> {
        match self {
            Weight::Finite(v) => Some(v),
            Weight::Infinite => None,
        }
    }
}

/// Weight of a configuration: `|B|` plus the score of the window that
/// follows the first 0 after the block.
#[derive(Clone, Debug)]
pub struct WeightReport {
    pub block_len: BlockLen,
    /// The scored window, canonicalized. `None` when the weight is infinite.
    pub window: Option<CanonicalBlock>,
    pub weight: Weight,
}

/// Computes the weight of a blocked-boundary configuration whose origin
/// holds 0 or 1. Window sites past the lattice end read as vacant.
pub fn weight(config: &Configuration, table: &ScoreTable) -> Result<WeightReport> {
    if config.boundary() != Boundary::Blocked {
        return Err(Error::InvalidConfiguration(
            "weight is defined for blocked boundaries".into(),
        ));
    }
    let states = config.states();
    if states.is_empty() {
        return Err(Error::InvalidConfiguration("empty lattice".into()));
    }
    if states[0] > 1 {
        return Err(Error::InvalidConfiguration(format!(
            "site 0 holds gas {}, expected 0 or 1",
            states[0]
        )));
    }
    let run = states.iter().take_while(|&&s| s == 1).count();
    if run == states.len() {
        return Ok(WeightReport {
            block_len: BlockLen::Infinite,
            window: None,
            weight: Weight::Infinite,
        });
    }
    debug_assert_eq!(states[run], 0, "site after a maximal 1-run must be vacant");
    let l = table.block_len();
    let raw: BlockSymbols = (0..l)
        .map(|i| states.get(run + 1 + i).copied().unwrap_or(0))
        .collect();
    let window = canonicalize(&raw)?;
    let score = table
        .score(&window)
        .ok_or_else(|| Error::ScoreTable(format!("no score for window {window}")))?;
    Ok(WeightReport {
        block_len: BlockLen::Finite(run),
        window: Some(window),
        weight: Weight::Finite(run as f64 + score),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::reference::reference_score_table;

    fn blocked(text: &str) -> Configuration {
        Configuration::parse(text, Boundary::Blocked).unwrap()
    }

    #[test]
    fn stick_with_no_differing_neighbor() {
        let out = apply_arrival(&blocked("000"), 1, 2, NeighborOrder::PreferLeft).unwrap();
        assert_eq!(out.kind, ArrivalKind::Stick);
        assert_eq!(out.config.to_text().unwrap(), "020");
    }

    #[test]
    fn occupied_target_is_noop() {
        let out = apply_arrival(&blocked("030"), 1, 2, NeighborOrder::PreferLeft).unwrap();
        assert_eq!(out.kind, ArrivalKind::Noop);
        assert_eq!(out.config.to_text().unwrap(), "030");
    }

    #[test]
    fn react_with_single_differing_neighbor() {
        let out = apply_arrival(&blocked("030"), 0, 2, NeighborOrder::PreferRight).unwrap();
        assert_eq!(out.kind, ArrivalKind::React { victim: 1 });
        assert_eq!(out.config.to_text().unwrap(), "000");
    }

    #[test]
    fn two_sided_reaction_follows_the_ordering() {
        let out = apply_arrival(&blocked("103"), 1, 2, NeighborOrder::PreferLeft).unwrap();
        assert_eq!(out.kind, ArrivalKind::React { victim: 0 });
        assert_eq!(out.config.to_text().unwrap(), "003");
        let out = apply_arrival(&blocked("103"), 1, 2, NeighborOrder::PreferRight).unwrap();
        assert_eq!(out.kind, ArrivalKind::React { victim: 2 });
        assert_eq!(out.config.to_text().unwrap(), "100");
    }

    #[test]
    fn arrival_rejects_bad_inputs() {
        assert!(apply_arrival(&blocked("000"), 3, 2, NeighborOrder::PreferLeft).is_err());
        assert!(apply_arrival(&blocked("000"), 0, 0, NeighborOrder::PreferLeft).is_err());
        let broken = Configuration { states: vec![2, 3], boundary: Boundary::Blocked };
        assert!(apply_arrival(&broken, 0, 1, NeighborOrder::PreferLeft).is_err());
    }

    #[test]
    fn torus_adjacency_wraps() {
        assert!(Configuration::parse("200003", Boundary::Torus).is_err());
        assert!(Configuration::parse("200003", Boundary::Blocked).is_ok());
    }

    #[test]
    fn absorbing_states() {
        assert_eq!(is_absorbing(&blocked("1111")), Some(1));
        assert_eq!(is_absorbing(&blocked("0000")), None);
        assert_eq!(is_absorbing(&blocked("1101")), None);
        assert_eq!(is_absorbing(&blocked("2222")), Some(2));
    }

    #[test]
    fn all_same_gas_is_fixed_by_every_arrival() {
        let cfg = blocked("333");
        for site in 0..3 {
            for gas in 1..=4 {
                let out = apply_arrival(&cfg, site, gas, NeighborOrder::PreferLeft).unwrap();
                assert_eq!(out.kind, ArrivalKind::Noop);
                assert_eq!(out.config, cfg);
            }
        }
    }

    #[test]
    fn weight_of_short_block() {
        let table = reference_score_table();
        let rep = weight(&blocked("1100000000"), &table).unwrap();
        assert_eq!(rep.block_len, BlockLen::Finite(2));
        assert_eq!(rep.window.unwrap().to_string(), "000");
        let w = rep.weight.finite().unwrap();
        assert!((w - 2.664).abs() < 1e-12, "weight {w}");
    }

    #[test]
    fn weight_of_all_ones_is_infinite() {
        let table = reference_score_table();
        let rep = weight(&blocked("11111"), &table).unwrap();
        assert_eq!(rep.weight, Weight::Infinite);
        assert_eq!(rep.block_len, BlockLen::Infinite);
    }

    #[test]
    fn weight_with_empty_block() {
        let table = reference_score_table();
        let rep = weight(&blocked("022200000"), &table).unwrap();
        assert_eq!(rep.block_len, BlockLen::Finite(0));
        assert_eq!(rep.window.unwrap().to_string(), "222");
        assert_eq!(rep.weight.finite().unwrap(), 0.0);
    }

    #[test]
    fn weight_window_pads_past_the_end() {
        let table = reference_score_table();
        let rep = weight(&blocked("110"), &table).unwrap();
        // Window runs past the lattice end and reads vacancies.
        assert_eq!(rep.window.unwrap().to_string(), "000");
        assert!((rep.weight.finite().unwrap() - 2.664).abs() < 1e-12);
    }

    #[test]
    fn weight_requires_blocked_boundary_and_low_origin() {
        let table = reference_score_table();
        let torus = Configuration::parse("1100", Boundary::Torus).unwrap();
        assert!(weight(&torus, &table).is_err());
        assert!(weight(&blocked("200"), &table).is_err());
    }
}
