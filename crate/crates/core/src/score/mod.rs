//! Certificate machinery for the spread of gas 1: ab initio drift of the
//! weight function, worst-case follower search, the fixed-point score
//! solver, and the critical-rate threshold search.

mod certificate;
mod engine;
pub mod reference;
mod solver;

pub use certificate::{verify_certificate, Certificate, WorstCaseEntry};
pub use engine::{
    drift, symbols_to_string, Completion, DriftParams, DriftReport, DriftSpace,
};
pub use solver::{
    fixed_point_solve, test_reference_block, threshold_search, BracketStep, SolverConfig,
    SolverOutcome, ThresholdResult,
};
