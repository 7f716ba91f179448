//! Worst-case sequential search on the unit interval.
//!
//! An agent pays a fixed cost per inspection to locate high quality on a
//! landscape it only knows to be Lipschitz and to attain the quality
//! standard 1 somewhere. This crate provides the exact-arithmetic model
//! (histories, search windows, envelopes), the closed-form left-to-right
//! policy and its search-budget calculus, worst-case adversary
//! constructions, the two-period solution for mid-range costs, seeded
//! landscape fuzzing, and an independent brute-force oracle on discretized
//! instances for end-to-end verification.
//!
//! All quantities are `BigRational`; equalities asserted by the test suite
//! are exact, never float-approximate.

pub mod adversary;
pub mod error;
pub mod fuzz;
pub mod index;
pub mod model;
pub mod oracle;
mod piecewise;
pub mod policy;
pub mod rational;
pub mod sim;
pub mod two_period;
pub mod window;

pub use error::{Error, Result};
pub use index::QualityIndex;
pub use model::{History, Observation, PolicyAction};
pub use oracle::{DiscreteInstance, GameValue};
pub use rational::Rat;
pub use sim::{LeftToRight, ScriptedPolicy, Searcher, Trace};
pub use two_period::RiskClass;
pub use window::SearchWindow;
