//! Multiplicative-weights engines for fractional covering and packing, and the
//! Lagrangian search that turns a penalized oracle into an inner oracle.

pub mod covering;
pub mod lagrangian;
pub mod packing;

pub use covering::{solve_covering, CoverResponse, CoveringOracle, CoveringOutcome, CoveringParams, MwuState};
pub use lagrangian::{lagrangian_search, LagrangeOutcome, MicroReply};
pub use packing::{solve_packing, PackResponse, PackingOracle, PackingOutcome, PackingParams, PackingState};

/// Points that support the convex update x <- (1 - sigma) x + sigma y.
pub trait Mixable: Clone {
    fn mix(&mut self, other: &Self, sigma: f64);
}

impl Mixable for Vec<f64> {
    /// An empty vector stands for the zero vector of any length.
    fn mix(&mut self, other: &Self, sigma: f64) {
        if self.is_empty() {
            self.resize(other.len(), 0.0);
        }
        if other.is_empty() {
            self.iter_mut().for_each(|a| *a *= 1.0 - sigma);
            return;
        }
        assert_eq!(self.len(), other.len(), "mixing vectors of different length");
        for (a, &b) in self.iter_mut().zip(other) {
            *a = (1.0 - sigma) * *a + sigma * b;
        }
    }
}

/// Relative tolerance for contract checks.
pub const TOL: f64 = 1e-9;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
