//! Delay-aware RAN slicing: a two-timescale PRB allocation simulator, the
//! reward functions that drive a slice controller toward a percentile delay
//! target, small dense networks with policy-gradient and DQN trainers, and
//! cross-agent model personalization.
//!
//! The crate is `no_std` (it needs `alloc`). All randomness is drawn from
//! explicit [`rand_chacha::ChaCha8Rng`] streams so that every run is
//! reproducible from a seed. File formats, configuration and the CLI live in
//! the companion `slicer` crate.

#![no_std]
// Negated float comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agents;
pub mod channel;
pub mod compare;
pub mod env;
pub mod exec;
pub mod nn;
pub mod personalization;
pub mod reward;
pub mod rng;
pub mod stats;
pub mod sweep;
pub mod traffic;

use alloc::string::String;

/// Errors surfaced by the simulator, trainers and aggregation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("action index {index} out of range for {len} actions")]
    InvalidAction { index: usize, len: usize },
    #[error("architecture mismatch between models")]
    ArchitectureMismatch,
    #[error("reward function returned a non-finite value at slot {slot}")]
    NonFiniteReward { slot: u64 },
    #[error("expected arrivals must be positive, got {0}")]
    NoArrivals(f64),
    #[error("aggregation row is not a probability vector (sum {sum})")]
    UnnormalizedRow { sum: f64 },
    #[error("no PRB count up to {prb_max} satisfies the delay target")]
    Infeasible { prb_max: u32 },
    #[error("reward shape check failed: {0}")]
    RewardShape(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
