//! Canonical right-hand blocks and score tables.
//!
//! A block is a short string over {0, 1, gas labels}. Two blocks are
//! equivalent when one maps to the other by relabeling non-1 gases, so the
//! canonical form relabels non-1 symbols by order of first appearance,
//! starting at 2. Adjacent distinct nonzero symbols are forbidden, matching
//! the reaction rule. In the infinite-gas variant every non-1 symbol is a
//! distinct molecule, so a label never repeats inside a block.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{GasCount, State};

pub type BlockSymbols = Vec<State>;

/// A block in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalBlock(BlockSymbols);

impl CanonicalBlock {
    pub fn symbols(&self) -> &[State] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: BlockSymbols = text
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .ok_or_else(|| Error::InvalidBlock(format!("bad symbol {c:?}")))
            })
            .collect::<Result<_>>()?;
        canonicalize(&raw)
    }
}

impl std::fmt::Display for CanonicalBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.0 {
            if s > 9 {
                write!(f, "({s})")?;
            } else {
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}

fn adjacency_ok(symbols: &[State]) -> bool {
    symbols
        .windows(2)
        .all(|w| w[0] == 0 || w[1] == 0 || w[0] == w[1])
}

/// Relabels non-1 symbols by order of first appearance (2, 3, ...). Keeps 0s
/// and 1s, rejects adjacency violations. Idempotent.
pub fn canonicalize(raw: &[State]) -> Result<CanonicalBlock> {
    if !adjacency_ok(raw) {
        return Err(Error::InvalidBlock(format!(
            "adjacent differing molecules in {raw:?}"
        )));
    }
    let mut map: BTreeMap<State, State> = BTreeMap::new();
    let mut next: State = 2;
    let symbols = raw
        .iter()
        .map(|&s| {
            if s <= 1 {
                s
            } else {
                *map.entry(s).or_insert_with(|| {
                    let label = next;
                    next += 1;
                    label
                })
            }
        })
        .collect();
    Ok(CanonicalBlock(symbols))
}

/// Validity of a canonical block for a given gas count: at most `n - 1`
/// distinct non-1 labels; in the infinite variant labels never repeat.
pub fn valid_for(block: &CanonicalBlock, gases: GasCount) -> bool {
    let labels: Vec<State> = block.symbols().iter().copied().filter(|&s| s >= 2).collect();
    let distinct = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
    match gases {
        GasCount::Finite(n) => distinct <= (n - 1) as usize,
        GasCount::Infinite => distinct == labels.len(),
    }
}

/// All canonical blocks of length `len`, sorted lexicographically.
pub fn enumerate_blocks(len: usize, gases: GasCount) -> Result<Vec<CanonicalBlock>> {
    if len == 0 {
        return Err(Error::InvalidParameter("block length must be >= 1".into()));
    }
    if let GasCount::Finite(n) = gases {
        if n < 2 {
            return Err(Error::InvalidParameter("need at least 2 gases".into()));
        }
    }
    let mut out = Vec::new();
    let mut prefix: BlockSymbols = Vec::with_capacity(len);
    extend_canonical(&mut prefix, len, gases, &mut |symbols| {
        out.push(CanonicalBlock(symbols.to_vec()));
    });
    Ok(out)
}

/// DFS over canonical strings: candidates at each position in ascending
/// symbol order, fresh labels introduced in first-appearance order.
pub(crate) fn extend_canonical(
    prefix: &mut BlockSymbols,
    target_len: usize,
    gases: GasCount,
    emit: &mut impl FnMut(&[State]),
) {
    extend_canonical_from(prefix, &[], target_len, gases, emit);
}

/// As `extend_canonical`, but labels flow across from `context` (used when a
/// follower string is canonicalized jointly with its block).
pub(crate) fn extend_canonical_from(
    prefix: &mut BlockSymbols,
    context: &[State],
    target_len: usize,
    gases: GasCount,
    emit: &mut impl FnMut(&[State]),
) {
    if prefix.len() == target_len {
        emit(prefix);
        return;
    }
    let prev = prefix.last().copied().or_else(|| context.last().copied());
    let compatible = |sym: State| match prev {
        None | Some(0) => true,
        Some(p) => sym == 0 || sym == p,
    };
    let all = context.iter().chain(prefix.iter());
    let max_label = all.clone().copied().filter(|&s| s >= 2).max().unwrap_or(1);
    let used: std::collections::BTreeSet<State> =
        all.copied().filter(|&s| s >= 2).collect();

    let mut candidates: Vec<State> = vec![0];
    if compatible(1) {
        candidates.push(1);
    }
    match gases {
        GasCount::Finite(n) => {
            for &label in &used {
                if compatible(label) {
                    candidates.push(label);
                }
            }
            if used.len() < (n - 1) as usize && compatible(max_label + 1) {
                candidates.push(max_label + 1);
            }
        }
        GasCount::Infinite => {
            // Every molecule is unique: only a fresh label, never adjacent
            // to anything occupied.
            if prev.is_none() || prev == Some(0) {
                candidates.push(max_label + 1);
            }
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    for sym in candidates {
        prefix.push(sym);
        extend_canonical_from(prefix, context, target_len, gases, emit);
        prefix.pop();
    }
}

/// The pinned reference block: all-2s in the finite variant; in the infinite
/// variant the analogous densest non-1 packing, molecules alternating with
/// vacancies starting from the left.
pub fn reference_block(len: usize, gases: GasCount) -> CanonicalBlock {
    let symbols = match gases {
        GasCount::Finite(_) => vec![2; len],
        GasCount::Infinite => (0..len)
            .map(|i| if i % 2 == 0 { 2 + (i as State) / 2 } else { 0 })
            .collect(),
    };
    CanonicalBlock(symbols)
}

/// Scores for every canonical block of a fixed length, with the reference
/// block pinned at exactly 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    len: usize,
    gases: GasCount,
    scores: BTreeMap<CanonicalBlock, f64>,
}

impl ScoreTable {
    /// Builds a table, checking coverage (exactly the canonical blocks of
    /// this length and gas count) and the pinned reference score.
    pub fn new(
        len: usize,
        gases: GasCount,
        scores: BTreeMap<CanonicalBlock, f64>,
    ) -> Result<Self> {
        let expected = enumerate_blocks(len, gases)?;
        if scores.len() != expected.len() {
            return Err(Error::ScoreTable(format!(
                "expected {} blocks, got {}",
                expected.len(),
                scores.len()
            )));
        }
        for block in &expected {
            if !scores.contains_key(block) {
                return Err(Error::ScoreTable(format!("missing block {block}")));
            }
        }
        let reference = reference_block(len, gases);
        match scores.get(&reference) {
            Some(&s) if s == 0.0 => {}
            Some(&s) => {
                return Err(Error::ScoreTable(format!(
                    "reference block {reference} must score exactly 0, got {s}"
                )))
            }
            None => {
                return Err(Error::ScoreTable(format!(
                    "reference block {reference} missing"
                )))
            }
        }
        Ok(ScoreTable { len, gases, scores })
    }

    /// The all-zero table (every block scores 0).
    pub fn zeros(len: usize, gases: GasCount) -> Result<Self> {
        let scores = enumerate_blocks(len, gases)?
            .into_iter()
            .map(|b| (b, 0.0))
            .collect();
        ScoreTable::new(len, gases, scores)
    }

    pub fn block_len(&self) -> usize {
        self.len
    }

    pub fn gases(&self) -> GasCount {
        self.gases
    }

    pub fn reference(&self) -> CanonicalBlock {
        reference_block(self.len, self.gases)
    }

    pub fn score(&self, block: &CanonicalBlock) -> Option<f64> {
        self.scores.get(block).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalBlock, f64)> {
        self.scores.iter().map(|(b, &s)| (b, s))
    }

    /// Scores keyed by block text, for serialization.
    pub fn as_string_map(&self) -> BTreeMap<String, f64> {
        self.scores.iter().map(|(b, &s)| (b.to_string(), s)).collect()
    }
}
