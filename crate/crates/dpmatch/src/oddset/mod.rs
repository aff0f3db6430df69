//! Dense small odd sets through an apex-augmented capacity graph, exact
//! Gomory-Hu cut trees and repeated minimum odd-cut extraction.

pub mod collect;
pub mod finder;
pub mod gomory_hu;
pub mod maxflow;

pub use collect::{check_family, collect_violated_sets, DenseSet, FamilyCheck, LevelInput};
pub use finder::{build_auxiliary, find_dense_odd_sets, AuxiliaryGraph, DenseSets};
pub use gomory_hu::{gomory_hu, GomoryHuTree};
pub use maxflow::max_flow;
