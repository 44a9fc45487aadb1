//! Analysis and simulation of simultaneous wireless information and power
//! transfer (SWIPT) through an intelligent reflecting surface whose elements
//! are spatially correlated.
//!
//! The crate evaluates the average harvested energy and the outage
//! probability of a power-splitting receiver in closed form for random,
//! equal and optimal phase configurations, and provides a reproducible
//! Monte Carlo simulator of the same link to check those expressions.
//!
//! Data-parallel loops (Monte Carlo trials, the `O(M⁴)` moment sums) run on
//! rayon when the default `parallel` feature is enabled and sequentially
//! otherwise; results are bit-identical either way.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod correlation;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod moments;
pub mod montecarlo;
pub mod quad;
pub mod specfun;
pub mod sum;

pub use channel::{PhaseConfig, PhaseMode, SystemParams};
pub use correlation::{CorrelationKind, CorrelationMatrix, CorrelationModel};
pub use error::{Error, Result};
pub use exec::Execution;
pub use moments::MomentPair;
pub use montecarlo::McEstimate;
