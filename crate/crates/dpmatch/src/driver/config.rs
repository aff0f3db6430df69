use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every tunable constant of the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// Space exponent: central storage is about n^(1 + 1/p).
    pub p: f64,
    pub seed: u64,
    /// Step-size constant in the multiplicative-weights exponent.
    pub c_alpha: f64,
    /// Iteration budget constant.
    pub c_t: f64,
    /// Forest-count constant of the streaming sparsifier.
    pub c_k: f64,
    /// Degradation constants of the final guarantee.
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Allowed simulated space is space_mult * n^(1 + 1/p) * log2(B + 2).
    pub space_mult: f64,
    /// Run every post-hoc check on oracle outputs.
    pub assert_mode: bool,
    /// Largest edge count solved exactly by the offline matcher.
    pub exact_threshold: usize,
    /// Outer rounds allowed; `None` means 8 * ceil(p / eps).
    pub max_rounds: Option<usize>,
    /// Packing steps allowed per inner solve.
    pub inner_step_cap: usize,
    /// Step with the observed width instead of the worst-case bound.
    pub adaptive_width: bool,
    /// Budget increases allowed for one covering step.
    pub probe_cap: usize,
    /// Vertex cap for exhaustive odd-set audits in assert mode.
    pub audit_max_n: usize,
    /// Sample-size constant of the maximal b-matching rounds.
    pub c_maximal: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1.0 / 16.0,
            p: 2.0,
            seed: 0,
            c_alpha: 4.0,
            c_t: 64.0,
            c_k: 16.0,
            a1: 3.0,
            a2: 2.0,
            a3: 1.0,
            space_mult: 16.0,
            assert_mode: false,
            exact_threshold: 40,
            max_rounds: None,
            inner_step_cap: 16,
            adaptive_width: true,
            probe_cap: 64,
            audit_max_n: 10,
            c_maximal: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0 / 16.0) {
            return Err(Error::InvalidParameter(format!("epsilon {} outside (0, 1/16]", self.epsilon)));
        }
        if !(self.p > 1.0) {
            return Err(Error::InvalidParameter(format!("p = {} must exceed 1", self.p)));
        }
        if !(self.space_mult > 0.0) {
            return Err(Error::InvalidParameter("space multiplier must be positive".into()));
        }
        Ok(())
    }

    pub fn round_cap(&self) -> usize {
        self.max_rounds.unwrap_or_else(|| 8 * (self.p / self.epsilon).ceil() as usize)
    }

    /// Simulated space allowance for a graph.
    pub fn space_limit(&self, n: usize, total_b: u64) -> f64 {
        self.space_mult * (n as f64).powf(1.0 + 1.0 / self.p) * ((total_b + 2) as f64).log2()
    }

    /// Per-round multiplier drift bound, also the promise ratio of the
    /// deferred sparsifiers.
    pub fn drift_bound(&self, n: usize) -> f64 {
        (n as f64).powf(1.0 / (2.0 * self.p)).max(1.0 + self.epsilon)
    }

    /// Deferred sparsifiers built per round: ceil(ln(drift) / eps).
    pub fn batch(&self, n: usize) -> usize {
        (self.drift_bound(n).ln() / self.epsilon).ceil().max(1.0) as usize
    }

    /// Guarantee factor 1 - (1 + a1 + a2 + a3) eps.
    pub fn guarantee(&self) -> f64 {
        1.0 - (1.0 + self.a1 + self.a2 + self.a3) * self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SolverConfig::default();
        c.validate().unwrap();
        assert_eq!(c.round_cap(), 256);
        assert!((c.guarantee() - (1.0 - 7.0 / 16.0)).abs() < 1e-15);
        // Tiny graphs fall back to drift 1 + eps and a single sparsifier.
        assert_eq!(c.batch(1), 1);
        assert_eq!(c.batch(16), (2f64.ln() * 16.0).ceil() as usize);
        let bad = SolverConfig { epsilon: 0.1, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
    }
}
