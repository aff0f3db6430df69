use rand::Rng;

use super::dual::DualIterate;
use super::offline::{BMatching, Matched};
use crate::error::{Error, Result};
use crate::graph::LeveledGraph;
use crate::seed;
use crate::sketch::RoundLedger;

/// Sampling constants for the maximal b-matching rounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximalParams {
    pub p: f64,
    /// Sample size multiplier on n^(1 + 1/p).
    pub c: f64,
    /// Rounds allowed per attempt are c_rounds * p.
    pub c_rounds: f64,
    pub retries: usize,
}

impl MaximalParams {
    pub fn new(p: f64) -> Self {
        MaximalParams { p, c: 1.0, c_rounds: 8.0, retries: 3 }
    }

    fn round_cap(&self) -> usize {
        (self.c_rounds * self.p).ceil().max(1.0) as usize
    }
}

/// Lockstep maximal b-matchings for several edge sets at once; every sampling
/// round costs one ledger round shared by all sets.
fn maximal_many(
    n: usize,
    groups: &[Vec<(usize, usize)>],
    b: &[u32],
    params: &MaximalParams,
    seed_value: u64,
    ledger: &mut RoundLedger,
) -> Result<Vec<Vec<u32>>> {
    if !(params.p > 1.0) {
        return Err(Error::InvalidParameter(format!("p = {} must exceed 1", params.p)));
    }
    let target = params.c * (n as f64).powf(1.0 + 1.0 / params.p);
    for attempt in 0..=params.retries {
        let mut res: Vec<Vec<u32>> = vec![b.to_vec(); groups.len()];
        let mut mult: Vec<Vec<u32>> = groups.iter().map(|g| vec![0; g.len()]).collect();
        let mut live: Vec<Vec<usize>> = groups.iter().map(|g| (0..g.len()).collect()).collect();
        let mut rounds = 0;
        while live.iter().any(|l| !l.is_empty()) && rounds < params.round_cap() {
            rounds += 1;
            ledger.begin_round("maximal b-matching sample");
            let mut space = 0;
            for (gi, g) in groups.iter().enumerate() {
                if live[gi].is_empty() {
                    continue;
                }
                let q = (target / live[gi].len() as f64).min(1.0);
                let mut rng = seed::rng(seed_value, &[attempt as u64, rounds as u64, gi as u64]);
                let sample: Vec<usize> = live[gi].iter().copied().filter(|_| q >= 1.0 || rng.gen::<f64>() < q).collect();
                space += sample.len();
                let r = &mut res[gi];
                for &e in &sample {
                    let (i, j) = g[e];
                    let t = r[i].min(r[j]);
                    mult[gi][e] += t;
                    r[i] -= t;
                    r[j] -= t;
                }
                live[gi].retain(|&e| {
                    let (i, j) = g[e];
                    r[i] > 0 && r[j] > 0
                });
            }
            ledger.record_space(space);
        }
        if live.iter().all(|l| l.is_empty()) {
            return Ok(mult);
        }
    }
    Err(Error::RoundCap(params.round_cap()))
}

/// Maximal b-matching built through sampling rounds.
pub fn maximal_bmatching_rounds(
    n: usize,
    edges: &[(usize, usize)],
    b: &[u32],
    params: &MaximalParams,
    seed_value: u64,
    ledger: &mut RoundLedger,
) -> Result<BMatching> {
    let mult = maximal_many(n, &[edges.to_vec()], b, params, seed_value, ledger)?.remove(0);
    let mut out = BMatching::default();
    for (e, &t) in mult.iter().enumerate() {
        if t > 0 {
            let (i, j) = edges[e];
            out.edges.push(Matched { edge: e, i, j, mult: t });
            out.weight += t as f64;
        }
    }
    Ok(out)
}

/// Start point: one maximal b-matching per level; saturated vertices get
/// x_i(k) = (eps/256) w_k and x_i is the maximum over levels. Returns the
/// point and its budget value sum b_i x_i.
pub fn initial_solution(
    lg: &LeveledGraph,
    params: &MaximalParams,
    seed_value: u64,
    ledger: &mut RoundLedger,
) -> Result<(DualIterate, f64)> {
    if lg.edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let r = lg.epsilon / 256.0;
    let levels: Vec<usize> = lg.levels.keys().copied().collect();
    let groups: Vec<Vec<(usize, usize)>> =
        lg.levels.values().map(|ids| ids.iter().map(|&e| (lg.edges[e].i, lg.edges[e].j)).collect()).collect();
    let b = &lg.base.b;
    let mult = maximal_many(lg.n(), &groups, b, params, seed_value, ledger)?;
    let mut x = DualIterate::default();
    for (gi, &k) in levels.iter().enumerate() {
        let mut deg = vec![0u32; lg.n()];
        for (e, &t) in mult[gi].iter().enumerate() {
            deg[groups[gi][e].0] += t;
            deg[groups[gi][e].1] += t;
        }
        for i in 0..lg.n() {
            if deg[i] == b[i] {
                let v = r * lg.level_weight(k);
                x.x_level.insert((i, k), v);
                let top = x.x_top.entry(i).or_insert(0.0);
                *top = top.max(v);
            }
        }
    }
    let beta0 = x.budget_cost(b);
    Ok((x, beta0))
}
