//! Ab initio drift of the weight function.
//!
//! The configuration under study is a half-line `[1-run >= 2][0][block][followers...]`
//! with a wall on the left. The drift of the weight `W = |B| + score(window)`
//! is the rate-weighted sum of `delta W` over every arrival that can change
//! `W`: arrivals at the leading 0, at vacant block sites, and at the first
//! follower site (reactions from deeper follower sites cannot reach the
//! window). Each outcome is produced by the same single-event transition the
//! simulator uses, so the expressions are derived from the dynamics rather
//! than transcribed.
//!
//! Follower strings are finite. When an outcome's post-event window needs
//! symbols beyond the known followers, pessimistic completion scores that
//! window 0 (the global minimum, since the reference block is pinned at 0
//! and certified tables are nonnegative), which keeps every certified drift
//! a lower bound on the true drift.

use std::collections::HashMap;

use crate::blocks::{
    canonicalize, enumerate_blocks, extend_canonical_from, valid_for, BlockSymbols,
    CanonicalBlock, ScoreTable,
};
use crate::error::{Error, Result};
use crate::model::{GasCount, State};

/// Parameters of the drift computation: gas count and the rate of gas 1.
/// All non-1 gases share the remaining rate.
#[derive(Clone, Copy, Debug)]
pub struct DriftParams {
    pub gases: GasCount,
    pub p1: f64,
}

impl DriftParams {
    pub fn new(gases: GasCount, p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidParameter(format!("p1 = {p1} out of [0, 1]")));
        }
        if let GasCount::Finite(n) = gases {
            if n < 2 {
                return Err(Error::InvalidParameter("need at least 2 gases".into()));
            }
        }
        Ok(DriftParams { gases, p1 })
    }

    #[inline]
    fn other_rate(&self) -> f64 {
        match self.gases {
            GasCount::Finite(n) => (1.0 - self.p1) / f64::from(n - 1),
            GasCount::Infinite => 1.0 - self.p1,
        }
    }
}

/// How to score a post-event window that runs past the known followers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    /// Unknown windows score 0.
    Pessimistic,
    /// Unknown windows are an error; only the given symbols may be used.
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RateKind {
    GasOne,
    /// One specific non-1 gas (finite variant); weight counts how many.
    PerOther,
    /// All fresh molecules together (infinite variant).
    AllOther,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Post {
    Window(u32),
    PastEnd,
}

/// One event's effect: rate class, block-length change, post-event window.
#[derive(Clone, Copy, Debug)]
struct Term {
    site: u8,
    kind: RateKind,
    weight: f64,
    delta_block: f64,
    post: Post,
}

struct Class {
    gas: State,
    kind: RateKind,
    weight: f64,
}

fn arrival_classes(gases: GasCount, full: &[State]) -> Result<Vec<Class>> {
    let labels: std::collections::BTreeSet<State> =
        full.iter().copied().filter(|&s| s >= 2).collect();
    let max_label = labels.iter().max().copied().unwrap_or(1);
    let mut classes = vec![Class { gas: 1, kind: RateKind::GasOne, weight: 1.0 }];
    match gases {
        GasCount::Finite(n) => {
            if labels.len() > (n - 1) as usize {
                return Err(Error::InvalidScenario(format!(
                    "{} distinct non-1 molecules exceed the {n}-gas model",
                    labels.len()
                )));
            }
            for &label in &labels {
                classes.push(Class { gas: label, kind: RateKind::PerOther, weight: 1.0 });
            }
            let fresh = (n - 1) as usize - labels.len();
            if fresh > 0 {
                classes.push(Class {
                    gas: max_label + 1,
                    kind: RateKind::PerOther,
                    weight: fresh as f64,
                });
            }
        }
        GasCount::Infinite => {
            classes.push(Class { gas: max_label + 1, kind: RateKind::AllOther, weight: 1.0 });
        }
    }
    Ok(classes)
}

/// Block-length change and post-event window of a concrete outcome.
/// `full` holds `[1, 1, 0, block..., followers...]`.
fn weight_parts(
    full: &[State],
    block_len: usize,
    index: &HashMap<BlockSymbols, u32>,
) -> (f64, Post) {
    let run = full.iter().take_while(|&&s| s == 1).count();
    let delta = run as f64 - 2.0;
    if run == full.len() {
        // The 1-run reaches the end of the known region; stopping it here
        // under-counts the true block growth, which is the safe direction.
        return (delta, Post::PastEnd);
    }
    debug_assert_eq!(full[run], 0, "a maximal 1-run is followed by a vacancy");
    let start = run + 1;
    if start + block_len > full.len() {
        return (delta, Post::PastEnd);
    }
    let window = canonicalize(&full[start..start + block_len])
        .expect("single events preserve the adjacency invariant");
    let id = index
        .get(window.symbols())
        .copied()
        .expect("post-event windows are canonical blocks of the same system");
    (delta, Post::Window(id))
}

/// Enumerates the drift terms of `block` against a (jointly canonical)
/// follower string. Handles follower strings of any length; events whose
/// reaction set depends on a symbol beyond the followers are rejected unless
/// they provably cannot change the weight.
fn gen_terms(
    block: &[State],
    followers: &[State],
    gases: GasCount,
    index: &HashMap<BlockSymbols, u32>,
) -> Result<Vec<Term>> {
    let l = block.len();
    let mut full: Vec<State> = Vec::with_capacity(3 + l + followers.len());
    full.extend_from_slice(&[1, 1, 0]);
    full.extend_from_slice(block);
    full.extend_from_slice(followers);

    let classes = arrival_classes(gases, &full)?;
    let mut terms = Vec::new();
    let mut scratch = full.clone();

    let emit = |scratch: &mut Vec<State>,
                    pos: usize,
                    change: Option<(usize, State)>,
                    site: u8,
                    class: &Class,
                    frac: f64,
                    terms: &mut Vec<Term>| {
        scratch.clear();
        scratch.extend_from_slice(&full);
        match change {
            Some((victim, _)) => scratch[victim] = 0,
            None => scratch[pos] = class.gas,
        }
        let (delta_block, post) = weight_parts(scratch, l, index);
        terms.push(Term {
            site,
            kind: class.kind,
            weight: class.weight * frac,
            delta_block,
            post,
        });
    };

    // Event positions: the leading 0 (index 2), the block sites, and the
    // first follower site. Deeper follower arrivals cannot change W.
    let last_pos = 3 + l;
    for pos in 2..=last_pos.min(full.len().saturating_sub(1)) {
        if full[pos] != 0 {
            continue;
        }
        let site = (pos - 2) as u8;
        let left = full[pos - 1];
        let right = full.get(pos + 1).copied();
        for class in &classes {
            let dl = left != 0 && left != class.gas;
            match right {
                Some(r) => {
                    let dr = r != 0 && r != class.gas;
                    match (dl, dr) {
                        (false, false) => emit(&mut scratch, pos, None, site, class, 1.0, &mut terms),
                        (true, false) => {
                            emit(&mut scratch, pos, Some((pos - 1, 0)), site, class, 1.0, &mut terms)
                        }
                        (false, true) => {
                            emit(&mut scratch, pos, Some((pos + 1, 0)), site, class, 1.0, &mut terms)
                        }
                        (true, true) => {
                            emit(&mut scratch, pos, Some((pos - 1, 0)), site, class, 0.5, &mut terms);
                            emit(&mut scratch, pos, Some((pos + 1, 0)), site, class, 0.5, &mut terms);
                        }
                    }
                }
                None => {
                    // The right neighbor lies beyond the known followers. If
                    // the arriving molecule differs from an occupied left
                    // neighbor, the reaction split depends on the unknown
                    // symbol and the weight change is unresolved. Otherwise
                    // every branch (stick, or react into the unknown)
                    // leaves the run and window untouched.
                    if dl {
                        return Err(Error::FollowerTooShort(format!(
                            "arrival at follower position {} can react leftward; \
                             extend the follower string",
                            pos - 2 - l
                        )));
                    }
                }
            }
        }
    }
    Ok(terms)
}

fn joint_canonical_followers(
    block: &CanonicalBlock,
    followers: &[State],
    gases: GasCount,
) -> Result<Vec<State>> {
    let mut joint: Vec<State> = block.symbols().to_vec();
    joint.extend_from_slice(followers);
    let canon = canonicalize(&joint)
        .map_err(|_| Error::InvalidScenario(format!("adjacency violation in followers {followers:?}")))?;
    if !valid_for(&canon, gases) {
        return Err(Error::InvalidScenario(
            "follower string uses molecules the model cannot supply".into(),
        ));
    }
    if canon.symbols()[..block.len()] != *block.symbols() {
        return Err(Error::InvalidScenario(
            "followers are inconsistent with the block's labels".into(),
        ));
    }
    Ok(canon.symbols()[block.len()..].to_vec())
}

pub fn symbols_to_string(symbols: &[State]) -> String {
    symbols
        .iter()
        .map(|&s| {
            if s > 9 {
                format!("({s})")
            } else {
                s.to_string()
            }
        })
        .collect()
}

/// Drift of one block against one explicit follower scenario.
#[derive(Clone, Debug)]
pub struct DriftReport {
    pub block: CanonicalBlock,
    pub scenario: String,
    pub value: f64,
    /// Contribution of each event site: leading 0, block sites, first follower.
    pub per_site: Vec<f64>,
}

/// Computes the drift of `block`'s weight against the given follower string,
/// from the single-event dynamics. Rates: gas 1 at `p1`, every other gas at
/// `(1 - p1) / (n - 1)` (or total `1 - p1` of fresh molecules in the
/// infinite variant).
pub fn drift(
    block: &CanonicalBlock,
    table: &ScoreTable,
    params: &DriftParams,
    followers: &[State],
    completion: Completion,
) -> Result<DriftReport> {
    if block.len() != table.block_len() {
        return Err(Error::InvalidBlock(format!(
            "block length {} does not match the {}-site table",
            block.len(),
            table.block_len()
        )));
    }
    if table.gases() != params.gases {
        return Err(Error::ScoreTable("table and parameters disagree on the gas count".into()));
    }
    if !valid_for(block, params.gases) {
        return Err(Error::InvalidBlock(format!("{block} is not valid for this model")));
    }
    if followers.is_empty() {
        return Err(Error::InvalidScenario("follower string must be nonempty".into()));
    }
    let followers = joint_canonical_followers(block, followers, params.gases)?;

    let blocks = enumerate_blocks(table.block_len(), params.gases)?;
    let index: HashMap<BlockSymbols, u32> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.symbols().to_vec(), i as u32))
        .collect();
    let scores: Vec<f64> = blocks.iter().map(|b| table.score(b).unwrap()).collect();
    let own = index[block.symbols()] as usize;

    let terms = gen_terms(block.symbols(), &followers, params.gases, &index)?;
    if completion == Completion::Strict {
        if let Some(t) = terms.iter().find(|t| t.post == Post::PastEnd) {
            return Err(Error::FollowerTooShort(format!(
                "an event at site {} needs symbols beyond the follower string",
                t.site
            )));
        }
    }
    let mut per_site = vec![0.0; block.len() + 2];
    for t in &terms {
        per_site[t.site as usize] += term_value(t, &scores, own, params);
    }
    Ok(DriftReport {
        block: block.clone(),
        scenario: symbols_to_string(&followers),
        value: per_site.iter().sum(),
        per_site,
    })
}

#[inline]
fn rate_of(kind: RateKind, weight: f64, params: &DriftParams) -> f64 {
    match kind {
        RateKind::GasOne => weight * params.p1,
        RateKind::PerOther | RateKind::AllOther => weight * params.other_rate(),
    }
}

#[inline]
fn term_value(t: &Term, scores: &[f64], own: usize, params: &DriftParams) -> f64 {
    let post = match t.post {
        Post::Window(j) => scores[j as usize],
        Post::PastEnd => 0.0,
    };
    rate_of(t.kind, t.weight, params) * (t.delta_block + post - scores[own])
}

/// Precomputed drift terms for every (block, follower scenario) pair of a
/// system. The structure depends only on the gas count, block length and
/// follower bound, so one space serves every `p1` and every score table.
pub struct DriftSpace {
    gases: GasCount,
    block_len: usize,
    follower_bound: usize,
    blocks: Vec<CanonicalBlock>,
    index: HashMap<BlockSymbols, u32>,
    scenarios: Vec<Vec<BlockSymbols>>,
    terms: Vec<Vec<Vec<Term>>>,
}

impl DriftSpace {
    /// Enumerates scenarios of length `follower_bound` (>= 2) for every
    /// block and precomputes their drift terms.
    pub fn new(gases: GasCount, block_len: usize, follower_bound: usize) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::InvalidParameter("block length must be >= 1".into()));
        }
        if follower_bound < 2 {
            return Err(Error::InvalidParameter("follower bound must be >= 2".into()));
        }
        let blocks = enumerate_blocks(block_len, gases)?;
        let index: HashMap<BlockSymbols, u32> = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.symbols().to_vec(), i as u32))
            .collect();
        let mut scenarios = Vec::with_capacity(blocks.len());
        let mut terms = Vec::with_capacity(blocks.len());
        for block in &blocks {
            let mut list: Vec<BlockSymbols> = Vec::new();
            let mut prefix = Vec::with_capacity(follower_bound);
            extend_canonical_from(
                &mut prefix,
                block.symbols(),
                follower_bound,
                gases,
                &mut |s| list.push(s.to_vec()),
            );
            let block_terms = list
                .iter()
                .map(|s| gen_terms(block.symbols(), s, gases, &index))
                .collect::<Result<Vec<_>>>()?;
            scenarios.push(list);
            terms.push(block_terms);
        }
        Ok(DriftSpace { gases, block_len, follower_bound, blocks, index, scenarios, terms })
    }

    pub fn gases(&self) -> GasCount {
        self.gases
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn follower_bound(&self) -> usize {
        self.follower_bound
    }

    pub fn blocks(&self) -> &[CanonicalBlock] {
        &self.blocks
    }

    pub fn block_index(&self, block: &CanonicalBlock) -> Option<usize> {
        self.index.get(block.symbols()).map(|&i| i as usize)
    }

    pub fn scenario_string(&self, block_id: usize, scenario_id: usize) -> String {
        symbols_to_string(&self.scenarios[block_id][scenario_id])
    }

    fn site_count(&self) -> usize {
        self.block_len + 2
    }

    /// Scores aligned with `self.blocks()`.
    pub fn score_vec(&self, table: &ScoreTable) -> Result<Vec<f64>> {
        if table.block_len() != self.block_len || table.gases() != self.gases {
            return Err(Error::ScoreTable("table does not match this drift space".into()));
        }
        Ok(self
            .blocks
            .iter()
            .map(|b| table.score(b).expect("validated table covers every block"))
            .collect())
    }

    pub fn table_from_scores(&self, scores: &[f64]) -> Result<ScoreTable> {
        let map = self
            .blocks
            .iter()
            .cloned()
            .zip(scores.iter().copied())
            .collect();
        ScoreTable::new(self.block_len, self.gases, map)
    }

    fn site_sums(&self, block_id: usize, scenario_id: usize, scores: &[f64], params: &DriftParams, out: &mut [f64]) {
        out.fill(0.0);
        for t in &self.terms[block_id][scenario_id] {
            out[t.site as usize] += term_value(t, scores, block_id, params);
        }
    }

    /// Drift at one precomputed scenario (pessimistic completion).
    pub fn drift_at(&self, block_id: usize, scenario_id: usize, scores: &[f64], params: &DriftParams) -> f64 {
        self.terms[block_id][scenario_id]
            .iter()
            .map(|t| term_value(t, scores, block_id, params))
            .sum()
    }

    /// Minimum drift over every follower scenario, with the (lexicographically
    /// first) minimizing scenario. Ties within rounding keep the earlier
    /// scenario.
    pub fn worst_case(&self, block_id: usize, scores: &[f64], params: &DriftParams) -> (f64, usize) {
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for s in 0..self.scenarios[block_id].len() {
            let v = self.drift_at(block_id, s, scores, params);
            if v < best - TIE_EPS {
                best = v;
                arg = s;
            } else if v < best {
                best = v;
            }
        }
        (best, arg)
    }

    /// Sitewise-adversarial drift: every event site's contribution is
    /// minimized over follower scenarios independently. This is the bound
    /// the printed per-block expressions realize (each term assumes its own
    /// least favorable follower), and the quantity the fixed-point solver
    /// drives to zero. It lower-bounds `worst_case`.
    pub fn sitewise_worst(&self, block_id: usize, scores: &[f64], params: &DriftParams) -> f64 {
        let sites = self.site_count();
        let mut mins = vec![f64::INFINITY; sites];
        let mut sums = vec![0.0; sites];
        for s in 0..self.scenarios[block_id].len() {
            self.site_sums(block_id, s, scores, params, &mut sums);
            for (m, &v) in mins.iter_mut().zip(sums.iter()) {
                if v < *m {
                    *m = v;
                }
            }
        }
        mins.iter().sum()
    }

    /// Affine pieces `(a, b)` per (scenario, site): the site's contribution
    /// under that scenario is `a + b * x` in the block's own score `x`.
    fn affine_pieces(
        &self,
        block_id: usize,
        scores: &[f64],
        params: &DriftParams,
    ) -> (Vec<f64>, Vec<f64>) {
        let sites = self.site_count();
        let n_scen = self.scenarios[block_id].len();
        let mut a = vec![0.0f64; n_scen * sites];
        let mut b = vec![0.0f64; n_scen * sites];
        for (s, terms) in self.terms[block_id].iter().enumerate() {
            for t in terms {
                let r = rate_of(t.kind, t.weight, params);
                let slot = s * sites + t.site as usize;
                match t.post {
                    Post::Window(j) if j as usize == block_id => {
                        a[slot] += r * t.delta_block;
                    }
                    Post::Window(j) => {
                        a[slot] += r * (t.delta_block + scores[j as usize]);
                        b[slot] -= r;
                    }
                    Post::PastEnd => {
                        a[slot] += r * t.delta_block;
                        b[slot] -= r;
                    }
                }
            }
        }
        (a, b)
    }

    /// Solves `sitewise_worst(block) = 0` for the block's own score, holding
    /// every other score fixed.
    pub fn solve_own(&self, block_id: usize, scores: &[f64], params: &DriftParams) -> Result<f64> {
        let sites = self.site_count();
        let n_scen = self.scenarios[block_id].len();
        let (a, b) = self.affine_pieces(block_id, scores, params);
        let eval = |x: f64| -> (f64, f64) {
            let mut g = 0.0;
            let mut slope = 0.0;
            for site in 0..sites {
                let mut best = f64::INFINITY;
                let mut best_b = 0.0;
                for s in 0..n_scen {
                    let slot = s * sites + site;
                    let v = a[slot] + b[slot] * x;
                    if v < best - TIE_EPS {
                        best = v;
                        best_b = b[slot];
                    } else if v < best + TIE_EPS && b[slot] < best_b {
                        // Tied pieces: keep the steepest descent direction.
                        best = best.min(v);
                        best_b = b[slot];
                    }
                }
                g += best;
                slope += best_b;
            }
            (g, slope)
        };
        concave_root(eval, scores[block_id]).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "score equation for block {} has no finite root",
                self.blocks[block_id]
            ))
        })
    }

    /// Solves `worst_case(block) = 0` for the block's own score, holding
    /// every other score fixed. The worst-case drift is a minimum of affine
    /// functions (one per follower scenario) of the own score.
    pub fn solve_own_worst_case(
        &self,
        block_id: usize,
        scores: &[f64],
        params: &DriftParams,
    ) -> Result<f64> {
        let sites = self.site_count();
        let n_scen = self.scenarios[block_id].len();
        let (a, b) = self.affine_pieces(block_id, scores, params);
        // Collapse sites: one affine piece per scenario.
        let mut pa = vec![0.0f64; n_scen];
        let mut pb = vec![0.0f64; n_scen];
        for s in 0..n_scen {
            for site in 0..sites {
                pa[s] += a[s * sites + site];
                pb[s] += b[s * sites + site];
            }
        }
        let eval = |x: f64| -> (f64, f64) {
            let mut best = f64::INFINITY;
            let mut best_b = 0.0;
            for s in 0..n_scen {
                let v = pa[s] + pb[s] * x;
                if v < best - TIE_EPS {
                    best = v;
                    best_b = pb[s];
                } else if v < best + TIE_EPS && pb[s] < best_b {
                    best = best.min(v);
                    best_b = pb[s];
                }
            }
            (best, best_b)
        };
        concave_root(eval, scores[block_id]).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "score equation for block {} has no finite root",
                self.blocks[block_id]
            ))
        })
    }
}

const TIE_EPS: f64 = 1e-12;

/// Root of a concave piecewise-affine function given by `eval(x) = (g(x),
/// slope of an active piece, steepest among ties)`. Supergradient Newton:
/// one step lands at or right of the root, then the iterates decrease onto
/// it. Returns `None` when the function is flat and negative (no root).
fn concave_root(eval: impl Fn(f64) -> (f64, f64), start: f64) -> Option<f64> {
    let mut x = start;
    let mut stride = 1.0;
    for _ in 0..256 {
        let (g, slope) = eval(x);
        if g.abs() < 1e-13 {
            return Some(x);
        }
        if slope < -1e-12 {
            x -= g / slope;
        } else if g > 0.0 {
            // Flat active piece above zero: the root lies further right,
            // where a decreasing piece takes over.
            x += stride;
            stride *= 2.0;
        } else {
            // Flat and negative: g is constant to the left, no root.
            return None;
        }
    }
    Some(x)
}
