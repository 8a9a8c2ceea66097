//! The bundled reference table for the 4-gas, 3-site system: scores that
//! certify the spread of gas 1 at rate 0.47, the expected worst-case drift
//! of each block, and the least favorable follower assignment(s) behind each
//! expected value. Rows whose expected drift mixes two follower assumptions
//! (different events take their worst case under different followers) list
//! both strings.

use crate::blocks::{CanonicalBlock, ScoreTable};
use crate::error::Result;
use crate::model::GasCount;
use crate::score::engine::{DriftParams, DriftSpace};

/// (block, score, expected worst-case drift at p1 = 0.47, least favorable followers)
pub const REFERENCE_ROWS: &[(&str, f64, f64, &[&str])] = &[
    ("000", 0.664, 0.0055, &["2"]),
    ("001", 0.827, 0.0058, &["00"]),
    ("002", 0.570, 0.0032, &["2"]),
    ("010", 0.920, 0.0044, &["2"]),
    ("011", 1.173, 0.0060, &["00"]),
    ("020", 0.498, 0.0031, &["2"]),
    ("022", 0.354, 0.0034, &["2"]),
    ("100", 1.157, 0.0036, &["22"]),
    ("101", 1.456, 0.0056, &["00", "02"]),
    ("102", 1.008, 0.0034, &["22"]),
    ("110", 1.555, 0.0040, &["222"]),
    ("111", 1.997, 0.0054, &["0222"]),
    ("200", 0.404, 0.0002, &["2"]),
    ("201", 0.493, 0.0018, &["00"]),
    ("202", 0.295, 0.0022, &["2"]),
    ("203", 0.339, 0.0002, &["3"]),
    ("220", 0.163, 0.0012, &["2"]),
    ("222", 0.000, 0.0007, &["2"]),
];

/// The bundled score table.
pub fn reference_score_table() -> ScoreTable {
    let scores = REFERENCE_ROWS
        .iter()
        .map(|(b, s, _, _)| (CanonicalBlock::parse(b).expect("bundled block"), *s))
        .collect();
    ScoreTable::new(3, GasCount::Finite(4), scores).expect("bundled table is complete")
}

/// One row of the reference-table check.
#[derive(Clone, Debug)]
pub struct TableCheckRow {
    pub block: String,
    pub score: f64,
    /// Expected worst-case drift.
    pub expected: f64,
    /// Sitewise-adversarial drift (each event site against its own least
    /// favorable follower) — the quantity the expected values tabulate.
    pub computed: f64,
    /// Worst single follower scenario and its drift.
    pub worst_scenario: String,
    pub worst_drift: f64,
    /// Whether a listed follower is a prefix of the worst scenario. `None`
    /// for rows with mixed follower assumptions, where no single scenario
    /// realizes the expected value.
    pub follower_match: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct TableCheck {
    pub p1: f64,
    pub follower_bound: usize,
    pub rows: Vec<TableCheckRow>,
    /// min over blocks of the worst single-scenario drift.
    pub c: f64,
}

impl TableCheck {
    pub fn max_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.computed - r.expected).abs())
            .fold(0.0, f64::max)
    }

    pub fn all_positive(&self) -> bool {
        self.c > 0.0
    }
}

/// Recomputes every reference row from the dynamics and compares.
pub fn check_reference_table(p1: f64, follower_bound: usize) -> Result<TableCheck> {
    let gases = GasCount::Finite(4);
    let table = reference_score_table();
    let params = DriftParams::new(gases, p1)?;
    let space = DriftSpace::new(gases, 3, follower_bound)?;
    let scores = space.score_vec(&table)?;
    let mut rows = Vec::with_capacity(REFERENCE_ROWS.len());
    let mut c = f64::INFINITY;
    for (name, score, expected, followers) in REFERENCE_ROWS {
        let block = CanonicalBlock::parse(name).unwrap();
        let id = space.block_index(&block).unwrap();
        let computed = space.sitewise_worst(id, &scores, &params);
        let (worst_drift, arg) = space.worst_case(id, &scores, &params);
        let worst_scenario = space.scenario_string(id, arg);
        let follower_match = if followers.len() == 1 {
            Some(worst_scenario.starts_with(followers[0]))
        } else {
            None
        };
        c = c.min(worst_drift);
        rows.push(TableCheckRow {
            block: name.to_string(),
            score: *score,
            expected: *expected,
            computed,
            worst_scenario,
            worst_drift,
            follower_match,
        });
    }
    Ok(TableCheck { p1, follower_bound, rows, c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_is_complete_and_sorted() {
        let table = reference_score_table();
        assert_eq!(table.iter().count(), 18);
        let names: Vec<&str> = REFERENCE_ROWS.iter().map(|(b, ..)| *b).collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        assert_eq!(names, sorted);
    }

    #[test]
    fn every_expected_drift_is_reproduced() {
        let check = check_reference_table(0.47, 6).unwrap();
        for row in &check.rows {
            assert!(
                (row.computed - row.expected).abs() < 2e-3,
                "block {}: computed {} vs expected {}",
                row.block,
                row.computed,
                row.expected
            );
        }
        assert!(check.c >= 1e-4, "c = {}", check.c);
    }

    #[test]
    fn worst_followers_match_the_listed_ones() {
        let check = check_reference_table(0.47, 6).unwrap();
        for row in &check.rows {
            match row.follower_match {
                Some(ok) => assert!(
                    ok,
                    "block {}: worst scenario {} does not extend the listed follower",
                    row.block, row.worst_scenario
                ),
                None => assert!(
                    row.worst_drift > 0.0,
                    "mixed-follower block {} not positive",
                    row.block
                ),
            }
        }
    }
}
