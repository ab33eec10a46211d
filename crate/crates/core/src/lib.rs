//! Analysis of crankback (turn-back) routing over an `n`-hop path with a hard
//! delay budget.
//!
//! Each hop delay is i.i.d. `N(M, V)`. At every intermediate node the packet
//! turns back when the probability that the remaining hops overrun the
//! residual budget exceeds `p_tr`. The crate computes where packets turn back
//! ([`analytic`], [`sim`]), tunes `p_tr` for a target success probability and
//! prices retries in wasted travel ([`planner`]).

pub mod analytic;
pub mod error;
mod gauss_kronrod;
pub mod io;
pub mod normal;
pub mod planner;
pub mod reproduce;
pub mod scenario;
pub mod sim;

pub use analytic::{Decision, Method, ReturnProfile, ThresholdTable};
pub use error::{Error, Result};
pub use normal::NormalParams;
pub use scenario::Scenario;
pub use sim::{Policy, SimConfig, SimReport};
