use serde::Serialize;

use super::config::SolverConfig;
use crate::oracle::{MicroAudit, MicroStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Covering ratio reached 1 - 3 eps.
    Converged,
    /// The round allowance ran out first.
    RoundCap,
}

/// Counters and post-hoc checks gathered during a solve.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub beta0: f64,
    pub init_rounds: usize,
    pub outer_rounds: usize,
    pub covering_steps: usize,
    pub covering_phases: usize,
    pub corollary_violations: usize,
    pub max_drift: f64,
    pub packing_steps: usize,
    /// Inner solves stopped by the step cap before reaching the packing target.
    pub packing_exhausted: usize,
    pub lagrangian_calls: usize,
    pub micro: MicroStats,
    pub certificates: usize,
    /// Certificates whose support held no integral solution of (1 - 2 eps) beta.
    pub certificate_shortfalls: usize,
    pub promise_violations: usize,
    pub harvest_updates: usize,
    pub sparsifier_sizes: Vec<usize>,
    pub switch_checks: usize,
    /// Switch checks whose hypothesis held but conclusion did not; informational.
    pub switch_failures: usize,
    pub audit: Option<MicroAudit>,
    pub space_limit: f64,
    pub round_cap: usize,
    /// Objective of the final dual scaled to full coverage, rescaled units.
    pub dual_bound: f64,
    pub final_lambda: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// (i, j, multiplicity) in input vertex numbering.
    pub matching: Vec<(usize, usize, u32)>,
    /// Weight under the input weights.
    pub weight: f64,
    /// Weight under the discretized level weights.
    pub rescaled_weight: f64,
    /// Certified lower bound on rescaled weight over the fractional optimum.
    pub ratio_bound: f64,
    pub rounds: usize,
    pub peak_space: usize,
    pub lambda_trace: Vec<f64>,
    pub beta_trace: Vec<f64>,
    pub config_echo: SolverConfig,
    pub termination: Termination,
    pub diagnostics: Diagnostics,
}

impl SolveReport {
    /// Contract violations found by assert-mode checks.
    pub fn violations(&self) -> usize {
        let d = &self.diagnostics;
        d.audit.as_ref().map_or(0, |a| a.violations())
    }
}
