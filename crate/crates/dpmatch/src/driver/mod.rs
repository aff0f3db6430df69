//! The outer solve loop: start point, per-round deferred sparsifiers, inner
//! packing solves through the micro oracle, and the covering update.

pub mod config;
pub mod report;
pub mod solve;

pub use config::SolverConfig;
pub use report::{Diagnostics, SolveReport, Termination};
pub use solve::solve;
