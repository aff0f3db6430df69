//! Matching-specific oracles: the layered dual iterate, the penalized
//! micro oracle, integral extraction, offline b-matching and the start point.

pub mod checks;
pub mod dual;
pub mod init;
pub mod micro;
pub mod offline;

pub use checks::{check_laginner, check_primal_cert, CertCheck, LagInnerCheck, PrimalCert, SparseSystem};
pub use dual::{edge_rhs, lambda_of, DualIterate, PackRows, SetKey};
pub use init::{initial_solution, maximal_bmatching_rounds, MaximalParams};
pub use micro::{Branch, MicroAudit, MicroOracle, MicroOutcome, MicroStats};
pub use offline::{extract_integral, offline_bmatching, BMatching, Matched};
