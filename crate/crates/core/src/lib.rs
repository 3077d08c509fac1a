//! Budget aggregation mechanisms over exact rational arithmetic.
//!
//! A *division* splits one unit of a divisible resource over `m` alternatives;
//! each voter reports the division they like best, and a mechanism aggregates
//! the reports into a single division. Voter disutility is the l1 distance
//! between the outcome and their report.
//!
//! The heart of the crate is the moving phantom engine ([`phantoms`]): a family
//! of `n + 1` phantom trajectories rises from 0 until the per-alternative
//! generalized medians sum to exactly 1. Two named members are built in:
//!
//! * the independent markets mechanism ([`mechanisms::independent_markets`]),
//!   which is proportional and doubles as a system of per-alternative markets
//!   ([`market`]) and as the unique Nash outcome of a credit-spending game
//!   ([`game`]);
//! * the welfare-maximizing mechanism ([`mechanisms::utilitarian`]), computed
//!   directly by water filling and tie-broken by Shannon entropy.
//!
//! Everything a mechanism outputs is an exact `BigRational`; floating point
//! appears only in the entropy tie-break comparisons and the parimutuel
//! baseline. The [`axioms`] module provides seeded property checkers
//! (incentive compatibility, proportionality, Pareto, monotonicity,
//! participation, reinforcement, and friends) together with brute-force
//! oracles, and [`io`] holds the document formats used by the `phantoms` CLI.

pub mod axioms;
pub mod division;
pub mod error;
pub mod game;
pub mod generate;
pub mod io;
pub mod market;
pub mod mechanisms;
pub mod phantoms;
pub mod rational;

pub use division::{Division, OrderStatistics, Profile};
pub use error::Error;
pub use rational::Rational;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
