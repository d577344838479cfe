//! Generation of atomic consistency-preserving search operators from
//! metamodel multiplicities, and mutation-only NSGA-II search driven by them.

pub mod graph;
pub mod rules;
pub mod rulegen;
pub mod metrics;
pub mod evolve;
pub mod problems;
#[cfg(feature = "testkit")]
pub mod testkit;
