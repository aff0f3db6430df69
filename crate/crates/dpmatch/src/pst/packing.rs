use serde::Serialize;

use super::covering::PhaseRecord;
use super::{dot, Mixable, TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PackingParams {
    pub delta: f64,
    /// Start point satisfies A x0 <= delta0 d.
    pub delta0: f64,
    pub rho: f64,
    pub c_alpha: f64,
    pub c_t: f64,
    pub adaptive_width: bool,
    /// Consecutive failed probes tolerated before giving up.
    pub max_failures: usize,
}

impl PackingParams {
    pub fn new(delta: f64, delta0: f64, rho: f64) -> Self {
        PackingParams { delta, delta0, rho, c_alpha: 4.0, c_t: 64.0, adaptive_width: false, max_failures: 64 }
    }

    /// Budget c_T rho (delta^-2 + log2 delta0) ln(2M) on successful calls.
    pub fn budget(&self, rows: usize) -> usize {
        let d = self.delta;
        let t = self.c_t * self.rho * (1.0 / (d * d) + self.delta0.max(1.0).log2()) * (2.0 * rows as f64).ln();
        t.ceil().max(1.0) as usize
    }
}

fn max_ratio(act: &[f64], d: &[f64]) -> f64 {
    act.iter().zip(d).map(|(a, d)| a / d).fold(0.0, f64::max)
}

/// Packing MWU state.
#[derive(Clone, Debug)]
pub struct PackingState {
    params: PackingParams,
    d: Vec<f64>,
    act: Vec<f64>,
    lambda: f64,
    lambda_t: f64,
    phase: usize,
    phase_steps: usize,
    alpha: f64,
    steps: usize,
    budget: usize,
    pub failures: usize,
    pub max_drift: f64,
    pub phases: Vec<PhaseRecord>,
}

impl PackingState {
    pub fn new(act0: Vec<f64>, d: Vec<f64>, params: PackingParams) -> Result<Self> {
        if act0.len() != d.len() {
            return Err(Error::IndexMismatch("activity and rhs lengths differ".into()));
        }
        if d.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidParameter("packing rhs must be positive".into()));
        }
        let lambda = max_ratio(&act0, &d);
        if lambda > params.delta0 * (1.0 + TOL) {
            return Err(Error::Contract(format!("start point ratio {lambda} above delta0 {}", params.delta0)));
        }
        let budget = params.budget(d.len());
        let mut s = PackingState {
            params,
            d,
            act: act0,
            lambda,
            lambda_t: lambda,
            phase: 0,
            phase_steps: 0,
            alpha: 0.0,
            steps: 0,
            budget,
            failures: 0,
            max_drift: 0.0,
            phases: Vec::new(),
        };
        s.alpha = s.alpha_for(lambda.max(s.target()));
        Ok(s)
    }

    fn alpha_for(&self, lambda_t: f64) -> f64 {
        let m = self.d.len().max(1) as f64;
        self.params.c_alpha * (2.0 * m / self.params.delta).ln() / (lambda_t * self.params.delta)
    }

    pub fn target(&self) -> f64 {
        1.0 + 6.0 * self.params.delta
    }

    pub fn done(&self) -> bool {
        self.lambda <= self.target()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn log_multipliers(&self) -> Vec<f64> {
        self.act.iter().zip(&self.d).map(|(a, d)| self.alpha * a / d - d.ln()).collect()
    }

    /// Multipliers exp(alpha' (Ax)_r / d_r) / d_r scaled by their maximum.
    pub fn normalized_multipliers(&self) -> Vec<f64> {
        let logs = self.log_multipliers();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        logs.into_iter().map(|l| (l - top).exp()).collect()
    }

    pub fn step(&mut self, act_tilde: &[f64]) -> Result<f64> {
        if act_tilde.len() != self.d.len() {
            return Err(Error::IndexMismatch("oracle activity length".into()));
        }
        let mut width = 0.0f64;
        for (a, d) in act_tilde.iter().zip(&self.d) {
            let r = a / d;
            if r < -TOL || r > self.params.rho * (1.0 + TOL) {
                return Err(Error::Contract(format!("packing point ratio {r} outside [0, {}]", self.params.rho)));
            }
            width = width.max(r);
        }
        let w = if self.params.adaptive_width { width.max(1.0).min(self.params.rho) } else { self.params.rho };
        let sigma = self.params.delta / (4.0 * self.alpha * w);
        let mut drift = 0.0f64;
        for ((a, &t), d) in self.act.iter_mut().zip(act_tilde).zip(&self.d) {
            let next = (1.0 - sigma) * *a + sigma * t;
            drift = drift.max(self.alpha * (next - *a).abs() / d);
            *a = next;
        }
        if drift > self.params.delta * (1.0 + TOL) {
            return Err(Error::Contract(format!("packing drift {drift} exceeds {}", self.params.delta)));
        }
        self.max_drift = self.max_drift.max(drift);
        self.steps += 1;
        self.phase_steps += 1;
        self.lambda = max_ratio(&self.act, &self.d);
        if self.lambda <= (self.lambda_t / 2.0).max(self.target()) {
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
        Ok(sigma)
    }
}

pub enum PackResponse<P, C> {
    Point { x: P, activity: Vec<f64> },
    Failed,
    Abort(C),
}

pub trait PackingOracle {
    type Point;
    type Cert;
    /// Finds x~ in P with z.A x~ <= (1 + delta/2) z.d.
    fn probe(&mut self, z: &[f64]) -> Result<PackResponse<Self::Point, Self::Cert>>;
}

pub enum PackingOutcome<P, C> {
    Feasible { x: P, steps: usize, failures: usize },
    Aborted(C),
}

pub fn solve_packing<P, C, O>(
    d: &[f64],
    x0: P,
    act0: Vec<f64>,
    params: PackingParams,
    oracle: &mut O,
) -> Result<PackingOutcome<P, C>>
where
    P: Mixable,
    O: PackingOracle<Point = P, Cert = C>,
{
    let mut state = PackingState::new(act0, d.to_vec(), params)?;
    let mut x = x0;
    let mut streak = 0usize;
    while !state.done() {
        let z = state.normalized_multipliers();
        match oracle.probe(&z)? {
            PackResponse::Abort(c) => return Ok(PackingOutcome::Aborted(c)),
            PackResponse::Failed => {
                state.failures += 1;
                streak += 1;
                if streak > params.max_failures {
                    return Err(Error::Contract(format!("{streak} consecutive failed packing probes")));
                }
            }
            PackResponse::Point { x: xt, activity } => {
                streak = 0;
                if dot(&z, &activity) > (1.0 + params.delta / 2.0) * dot(&z, d) * (1.0 + TOL) {
                    return Err(Error::Contract("packing oracle point misses the (1 + delta/2) bound".into()));
                }
                let sigma = state.step(&activity)?;
                x.mix(&xt, sigma);
            }
        }
    }
    Ok(PackingOutcome::Feasible { x, steps: state.steps(), failures: state.failures })
}
