//! An n-gas catalytic surface model on a finite 1-D lattice.
//!
//! Gases fall on lattice sites at fixed rates; a molecule landing next to a
//! different gas reacts and both sites empty, so distinct gases never sit
//! side by side, and a surface can end up poisoned by a single gas. This
//! crate provides:
//!
//! * exact single-event dynamics and the block-weight function ([`model`]),
//! * reproducible per-site driving randomness ([`randomness`]),
//! * event-driven whole-trajectory simulation ([`sim`]),
//! * the weight-drift certificate machinery: canonical block enumeration,
//!   ab initio drift, the fixed-point score solver and the critical-rate
//!   search ([`score`], [`blocks`]),
//! * coupled two-system dynamics and the monotonicity counterexample
//!   ([`coupling`]).

pub mod blocks;
pub mod coupling;
pub mod error;
pub mod model;
pub mod randomness;
pub mod score;
pub mod sim;

pub use error::{Error, Result};
