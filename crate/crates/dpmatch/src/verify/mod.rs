//! Independent reference computations: exhaustive b-matching, exact rational
//! linear programs, dual feasibility, laminarity and cut enumeration.

pub mod brute;
pub mod checks;
pub mod lp;
pub mod simplex;

pub use brute::{brute_force_bmatching, BruteCaps, ExactResult, Method};
pub use checks::{check_dual_feasible, convert_layered, enumerate_cuts_check, laminar_check, DualCheck};
pub use lp::{exact_lp_values, layered_lp, matching_lp, LpCaps, LpValues};
