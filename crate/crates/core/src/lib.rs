//! Exact-arithmetic engine for search costs in random trees.
//!
//! Two tree models are covered: binary search trees built from random
//! permutations and digital search trees built from random bit strings.
//! For each model the crate computes probability generating functions,
//! exact moments and cumulants, asymptotic constants, and validates all
//! of it against exhaustive enumeration and Monte Carlo oracles.
//!
//! Everything user-facing is exact (`Rational`) or carries a certified
//! error bound (`Real`). Floating point appears only in simulation
//! summaries, where it is derived from exact integer accumulators.

pub mod asymptotics;
pub mod biseries;
pub mod bst;
pub mod cumulants;
pub mod dst;
pub mod enumeration;
pub mod montecarlo;
pub mod pgf;
pub mod rational;
pub mod real;
mod serde_str;
pub mod verify;

pub use biseries::BiSeries;
pub use bst::Moments;
pub use dst::{KeyModel, SearchKind};
pub use pgf::Pgf;
pub use rational::Rational;
pub use real::{Real, RealCtx};
