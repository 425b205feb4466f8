//! A laboratory for distributed consensus with cellular automata.
//!
//! The crate covers one-dimensional rules and their synchronous evolution
//! ([`rule`]), two-dimensional toroidal automata ([`ca2d`]), shell-majority
//! rules on arbitrary graphs ([`graph`]), noisy and asynchronous regimes
//! ([`stochastic`]), exact finite-size analysis ([`analysis`]), multiway
//! graphs over nondeterministic updates ([`multiway`]) and rule-space
//! search ([`search`]).
//!
//! All randomness is driven by explicit `u64` seeds; see [`seed`] for the
//! splitting scheme used to derive per-trial streams.

pub mod analysis;
pub mod ca2d;
pub mod error;
pub mod graph;
pub mod io;
pub mod multiway;
pub mod rule;
pub mod rulespec;
pub mod search;
pub mod seed;
pub mod stochastic;

pub use error::{Error, Result};
pub use rule::{Config1D, Consensus, Rule1D};
