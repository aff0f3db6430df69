//! Approximate maximum-weight nonbipartite b-matching through a dual-primal
//! multiplicative-weights scheme run over simulated sketching rounds.

pub mod cli;
pub mod driver;
pub mod error;
pub mod graph;
pub mod oddset;
pub mod oracle;
pub mod pst;
pub mod seed;
pub mod sketch;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Graph, LeveledGraph, OddSet};
