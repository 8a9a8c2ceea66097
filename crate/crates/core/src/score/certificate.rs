//! Certificate assembly: per-block worst-case drifts and the positivity
//! constant.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::ScoreTable;
use crate::error::Result;
use crate::model::GasCount;
use crate::score::engine::{DriftParams, DriftSpace};

#[derive(Clone, Debug, Serialize)]
pub struct WorstCaseEntry {
    pub drift: f64,
    pub scenario: String,
}

/// A drift certificate: the score table, every block's worst-case drift over
/// follower scenarios of length `follower_bound` (pessimistic completion
/// beyond), and the positivity constant `c`.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub gases: String,
    pub p1: f64,
    pub block_len: usize,
    pub follower_bound: usize,
    pub completion: String,
    pub scores: BTreeMap<String, f64>,
    pub worst_case: BTreeMap<String, WorstCaseEntry>,
    pub c: f64,
    pub verdict: String,
}

impl Certificate {
    pub fn positive(&self) -> bool {
        self.c > 0.0
    }
}

/// Checks the drift condition for every block at the given rate: `c` is the
/// minimum over blocks of the worst-case drift, and the verdict is positive
/// exactly when `c > 0`.
pub fn verify_certificate(
    p1: f64,
    gases: GasCount,
    block_len: usize,
    table: &ScoreTable,
    follower_bound: usize,
) -> Result<Certificate> {
    let params = DriftParams::new(gases, p1)?;
    let space = DriftSpace::new(gases, block_len, follower_bound)?;
    let scores = space.score_vec(table)?;
    let entries: Vec<(String, WorstCaseEntry)> = (0..space.blocks().len())
        .into_par_iter()
        .map(|b| {
            let (drift, arg) = space.worst_case(b, &scores, &params);
            (
                space.blocks()[b].to_string(),
                WorstCaseEntry { drift, scenario: space.scenario_string(b, arg) },
            )
        })
        .collect();
    let c = entries
        .iter()
        .map(|(_, e)| e.drift)
        .fold(f64::INFINITY, f64::min);
    Ok(Certificate {
        gases: gases.to_string(),
        p1,
        block_len,
        follower_bound,
        completion: "pessimistic".to_string(),
        scores: table.as_string_map(),
        worst_case: entries.into_iter().collect(),
        c,
        verdict: if c > 0.0 { "positive".to_string() } else { "not-positive".to_string() },
    })
}
