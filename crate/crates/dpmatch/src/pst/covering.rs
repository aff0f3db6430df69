use serde::Serialize;

use super::{dot, Mixable, TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoveringParams {
    pub epsilon: f64,
    /// Initial slack: the start point satisfies Ax0 >= (1 - epsilon0) c.
    pub epsilon0: f64,
    /// Width: 0 <= Ax <= rho c on the polytope.
    pub rho: f64,
    pub c_alpha: f64,
    pub c_t: f64,
    /// Step with the width of the returned point instead of rho.
    pub adaptive_width: bool,
    /// Keep every (sigma, point) pair for replay.
    pub record_log: bool,
    /// Run phases far from the target at a coarser accuracy, at most 4 eps.
    pub phase_scaling: bool,
}

impl CoveringParams {
    pub fn new(epsilon: f64, epsilon0: f64, rho: f64) -> Self {
        CoveringParams {
            epsilon,
            epsilon0,
            rho,
            c_alpha: 4.0,
            c_t: 64.0,
            adaptive_width: false,
            record_log: false,
            phase_scaling: true,
        }
    }

    /// Oracle-call budget c_T rho (eps^-2 + log2 1/(1-eps0)) ln(2M/eps).
    pub fn budget(&self, rows: usize) -> usize {
        let e = self.epsilon;
        let slack = (1.0 / (1.0 - self.epsilon0).max(f64::MIN_POSITIVE)).log2().max(0.0);
        let t = self.c_t * self.rho * (1.0 / (e * e) + slack) * (2.0 * rows as f64 / e).ln();
        t.ceil() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRecord {
    pub phase: usize,
    pub lambda_start: f64,
    pub lambda_end: f64,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub sigma: f64,
    pub drift: f64,
    /// u.A x~ / u.c for the multipliers the point answered.
    pub oracle_ratio: f64,
    pub phase_ended: bool,
}

/// Covering MWU state driven one accepted point at a time.
#[derive(Clone, Debug)]
pub struct MwuState {
    params: CoveringParams,
    c: Vec<f64>,
    act: Vec<f64>,
    lambda: f64,
    lambda_t: f64,
    phase: usize,
    phase_steps: usize,
    alpha: f64,
    steps: usize,
    budget: usize,
    pub max_drift: f64,
    pub corollary_violations: usize,
    pub phases: Vec<PhaseRecord>,
}

fn min_ratio(act: &[f64], c: &[f64]) -> f64 {
    act.iter().zip(c).map(|(a, c)| a / c).fold(f64::INFINITY, f64::min)
}

impl MwuState {
    pub fn new(act0: Vec<f64>, c: Vec<f64>, params: CoveringParams) -> Result<Self> {
        if act0.len() != c.len() || c.is_empty() {
            return Err(Error::IndexMismatch("activity and rhs lengths differ or are empty".into()));
        }
        if c.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidParameter("covering rhs must be positive".into()));
        }
        let lambda = min_ratio(&act0, &c);
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("phase lambda {lambda} must be positive")));
        }
        if lambda < (1.0 - params.epsilon0) * (1.0 - TOL) {
            return Err(Error::Contract(format!(
                "start point has lambda {lambda} below 1 - epsilon0 = {}",
                1.0 - params.epsilon0
            )));
        }
        let budget = params.budget(c.len());
        let mut s = MwuState {
            params,
            c,
            act: act0,
            lambda,
            lambda_t: lambda,
            phase: 0,
            phase_steps: 0,
            alpha: 0.0,
            steps: 0,
            budget,
            max_drift: 0.0,
            corollary_violations: 0,
            phases: Vec::new(),
        };
        s.alpha = s.alpha_for(lambda);
        Ok(s)
    }

    /// Accuracy of the phase starting at lambda_t: doubling only needs
    /// 2 lambda_t <= 1 - 3 eps_t, so eps_t = (1 - 2 lambda_t)/4 clamped to
    /// [eps, 4 eps]. The cap keeps per-step drift eps_t/4 within eps.
    pub fn phase_epsilon(&self, lambda_t: f64) -> f64 {
        let eps = self.params.epsilon;
        if self.params.phase_scaling {
            ((1.0 - 2.0 * lambda_t) / 4.0).clamp(eps, 4.0 * eps)
        } else {
            eps
        }
    }

    fn alpha_for(&self, lambda_t: f64) -> f64 {
        let m = self.c.len() as f64;
        let e = self.phase_epsilon(lambda_t);
        self.params.c_alpha * (2.0 * m / e).ln() / (lambda_t * e)
    }

    pub fn params(&self) -> &CoveringParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_t(&self) -> f64 {
        self.lambda_t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn activity(&self) -> &[f64] {
        &self.act
    }

    pub fn rhs(&self) -> &[f64] {
        &self.c
    }

    pub fn target(&self) -> f64 {
        1.0 - 3.0 * self.params.epsilon
    }

    pub fn done(&self) -> bool {
        self.lambda >= self.target()
    }

    /// Natural logs of the multipliers: -alpha (Ax)_l / c_l - ln c_l.
    pub fn log_multipliers(&self) -> Vec<f64> {
        self.act.iter().zip(&self.c).map(|(a, c)| -self.alpha * a / c - c.ln()).collect()
    }

    /// Exact multipliers exp(-alpha (Ax)_l / c_l) / c_l; may underflow.
    pub fn multipliers(&self) -> Vec<f64> {
        self.log_multipliers().into_iter().map(f64::exp).collect()
    }

    /// Multipliers divided by their maximum.
    pub fn normalized_multipliers(&self) -> Vec<f64> {
        let logs = self.log_multipliers();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        logs.into_iter().map(|l| (l - top).exp()).collect()
    }

    /// Applies x <- (1 - sigma) x + sigma x~ given A x~.
    pub fn step(&mut self, act_tilde: &[f64]) -> Result<StepInfo> {
        if act_tilde.len() != self.c.len() {
            return Err(Error::IndexMismatch("oracle activity length".into()));
        }
        let mut width = 0.0f64;
        for (a, c) in act_tilde.iter().zip(&self.c) {
            let r = a / c;
            if r < -TOL || r > self.params.rho * (1.0 + TOL) {
                return Err(Error::Contract(format!("oracle point has row ratio {r} outside [0, {}]", self.params.rho)));
            }
            width = width.max(r);
        }
        let eps = self.params.epsilon;
        let u = self.normalized_multipliers();
        let uc = dot(&u, &self.c);
        let ua_t = dot(&u, act_tilde);
        let ua = dot(&u, &self.act);
        let oracle_ratio = if uc > 0.0 { ua_t / uc } else { f64::INFINITY };
        if self.lambda < self.target() && ua_t >= (1.0 - eps / 2.0) * uc {
            let lhs = (1.0 - eps / 2.0) * ua_t;
            let rhs = (1.0 + eps / 2.0) * ua + eps * uc / 2.0;
            if lhs < rhs * (1.0 - TOL) {
                self.corollary_violations += 1;
            }
        }
        let w = if self.params.adaptive_width { width.max(1.0).min(self.params.rho) } else { self.params.rho };
        let sigma = self.phase_epsilon(self.lambda_t) / (4.0 * self.alpha * w);
        let mut drift = 0.0f64;
        for ((a, &t), c) in self.act.iter_mut().zip(act_tilde).zip(&self.c) {
            let next = (1.0 - sigma) * *a + sigma * t;
            drift = drift.max(self.alpha * (next - *a).abs() / c);
            *a = next;
        }
        if drift > eps * (1.0 + TOL) {
            return Err(Error::Contract(format!("multiplier drift {drift} exceeds {eps}")));
        }
        self.max_drift = self.max_drift.max(drift);
        self.steps += 1;
        self.phase_steps += 1;
        self.lambda = min_ratio(&self.act, &self.c);
        let phase_ended = self.lambda >= (2.0 * self.lambda_t).min(self.target());
        if phase_ended {
            self.phases.push(PhaseRecord {
                phase: self.phase,
                lambda_start: self.lambda_t,
                lambda_end: self.lambda,
                steps: self.phase_steps,
            });
            if !self.done() {
                self.phase += 1;
                self.phase_steps = 0;
                self.lambda_t = self.lambda;
                self.alpha = self.alpha_for(self.lambda);
            }
        }
        if self.steps > self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        Ok(StepInfo { sigma, drift, oracle_ratio, phase_ended })
    }
}

pub enum CoverResponse<P> {
    Point { x: P, activity: Vec<f64> },
    Infeasible,
}

pub trait CoveringOracle {
    type Point;
    /// Finds x~ in P with u.A x~ >= (1 - eps/2) u.c, or reports that none exists.
    fn query(&mut self, u: &[f64]) -> Result<CoverResponse<Self::Point>>;
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringSummary {
    pub steps: usize,
    pub budget: usize,
    pub lambda: f64,
    pub max_drift: f64,
    pub corollary_violations: usize,
    pub phases: Vec<PhaseRecord>,
}

pub enum CoveringOutcome<P> {
    Feasible { x: P, summary: CoveringSummary, log: Vec<(f64, P)> },
    Infeasible { u: Vec<f64>, summary: CoveringSummary },
}

fn summary(s: &MwuState) -> CoveringSummary {
    CoveringSummary {
        steps: s.steps,
        budget: s.budget,
        lambda: s.lambda,
        max_drift: s.max_drift,
        corollary_violations: s.corollary_violations,
        phases: s.phases.clone(),
    }
}

pub fn solve_covering<P, O>(
    c: &[f64],
    x0: P,
    act0: Vec<f64>,
    params: CoveringParams,
    oracle: &mut O,
) -> Result<CoveringOutcome<P>>
where
    P: Mixable,
    O: CoveringOracle<Point = P>,
{
    let mut state = MwuState::new(act0, c.to_vec(), params)?;
    let mut x = x0;
    let mut log = Vec::new();
    while !state.done() {
        let u = state.normalized_multipliers();
        match oracle.query(&u)? {
            CoverResponse::Infeasible => {
                return Ok(CoveringOutcome::Infeasible { u: state.multipliers(), summary: summary(&state) })
            }
            CoverResponse::Point { x: xt, activity } => {
                let uc = dot(&u, c);
                if dot(&u, &activity) < (1.0 - params.epsilon / 2.0) * uc * (1.0 - TOL) {
                    return Err(Error::Contract("oracle point misses the (1 - eps/2) bound".into()));
                }
                let info = state.step(&activity)?;
                x.mix(&xt, info.sigma);
                if params.record_log {
                    log.push((info.sigma, xt));
                }
            }
        }
    }
    Ok(CoveringOutcome::Feasible { x, summary: summary(&state), log })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Box [0, hi] for a single variable with A = [1].
    struct BoxOracle {
        hi: f64,
    }

    impl CoveringOracle for BoxOracle {
        type Point = Vec<f64>;
        fn query(&mut self, u: &[f64]) -> Result<CoverResponse<Vec<f64>>> {
            if u[0] * self.hi >= (1.0 - 1.0 / 32.0) * u[0] {
                Ok(CoverResponse::Point { x: vec![self.hi], activity: vec![self.hi] })
            } else {
                Ok(CoverResponse::Infeasible)
            }
        }
    }

    #[test]
    fn one_constraint() {
        let eps = 1.0 / 16.0;
        let params = CoveringParams::new(eps, 0.5, 2.0);
        let out = solve_covering(&[1.0], vec![0.5], vec![0.5], params, &mut BoxOracle { hi: 2.0 }).unwrap();
        match out {
            CoveringOutcome::Feasible { x, summary, .. } => {
                assert!(x[0] >= 1.0 - 3.0 * eps);
                assert!(summary.steps <= summary.budget);
            }
            _ => panic!("expected feasible"),
        }
    }

    #[test]
    fn infeasible_box() {
        let params = CoveringParams::new(1.0 / 16.0, 0.75, 1.0);
        let out = solve_covering(&[1.0], vec![0.25], vec![0.25], params, &mut BoxOracle { hi: 0.5 }).unwrap();
        match out {
            CoveringOutcome::Infeasible { u, .. } => {
                assert!(u[0] * 0.5 < u[0] * 1.0);
            }
            _ => panic!("expected infeasible"),
        }
    }

    #[test]
    fn multiplier_examples() {
        let params = CoveringParams::new(0.1, 0.5, 2.0);
        let s = MwuState::new(vec![1.0, 1.0, 1.0], vec![1.0; 3], params).unwrap();
        let u = s.multipliers();
        for v in &u {
            assert!((v - (-s.alpha()).exp()).abs() < 1e-15);
        }
        let t = MwuState::new(vec![2.0, 1.0, 1.0], vec![1.0; 3], params).unwrap();
        let r = t.multipliers()[0] / t.multipliers()[1];
        assert!((r.ln() + t.alpha()).abs() < 1e-9);
        // lambda_t <= 0 is rejected
        assert!(MwuState::new(vec![0.0, 1.0], vec![1.0, 1.0], params).is_err());
    }

    #[test]
    fn budget_formula() {
        let p = CoveringParams::new(0.25, 0.5, 2.0);
        let expect = 64.0 * 2.0 * (16.0 + 1.0) * (2.0 * 3.0 / 0.25f64).ln();
        assert_eq!(p.budget(3), expect.ceil() as usize);
    }
}
