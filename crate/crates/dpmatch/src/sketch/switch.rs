use crate::error::{Error, Result};
use crate::graph::LeveledGraph;
use crate::oracle::dual::DualIterate;

/// Both sides of the sparsifier switch implication for one iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchCheck {
    /// F(x, u_s) >= (1 - eps/8) sum w_k u_s, x >= 0, and the G rows under u_s.
    pub hypothesis: bool,
    /// F(x, u) >= (1 - eps/2) sum w_k u.
    pub conclusion: bool,
    pub f_sparse: f64,
    pub f_full: f64,
}

impl SwitchCheck {
    pub fn holds(&self) -> bool {
        !self.hypothesis || self.conclusion
    }
}

fn level_sums(lg: &LeveledGraph, u: &[f64]) -> f64 {
    u.iter().enumerate().map(|(e, &v)| lg.edge_weight(e) * v).sum()
}

/// F(x, u): vertex terms weighted by incident values at levels >= l plus set
/// terms weighted by internal values at levels >= l.
fn f_value(x: &DualIterate, lg: &LeveledGraph, u: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&(i, l), &v) in &x.x_level {
        if v == 0.0 {
            continue;
        }
        let deg: f64 = lg
            .levels
            .range(l..)
            .flat_map(|(_, ids)| ids.iter())
            .filter(|&&e| lg.edges[e].i == i || lg.edges[e].j == i)
            .map(|&e| u[e])
            .sum();
        total += v * deg;
    }
    for ((set, l), &v) in &x.z {
        if v == 0.0 {
            continue;
        }
        let (inside, _) = set_masses(lg, u, set, *l, true);
        total += v * inside;
    }
    total
}

/// Internal and boundary mass of `set` over levels >= l. When `audit` is set
/// the per-level identity 2 inside + cut = degree sum is checked.
fn set_masses(lg: &LeveledGraph, u: &[f64], set: &[usize], l: usize, audit: bool) -> (f64, f64) {
    let mut member = vec![false; lg.n()];
    for &i in set {
        member[i] = true;
    }
    let (mut inside, mut cut) = (0.0, 0.0);
    for (_, ids) in lg.levels.range(l..) {
        let (mut lin, mut lcut, mut deg) = (0.0, 0.0, 0.0);
        for &e in ids {
            let le = &lg.edges[e];
            let (a, c) = (member[le.i], member[le.j]);
            if a && c {
                lin += u[e];
            } else if a || c {
                lcut += u[e];
            }
            if a {
                deg += u[e];
            }
            if c {
                deg += u[e];
            }
        }
        if audit {
            let lhs = 2.0 * lin + lcut;
            assert!(
                (lhs - deg).abs() <= 1e-9 * deg.abs().max(1e-300),
                "cut accounting identity failed: {lhs} vs {deg}"
            );
        }
        inside += lin;
        cut += lcut;
    }
    (inside, cut)
}

pub fn verify_switch(
    u: &[f64],
    u_s: &[f64],
    x: &DualIterate,
    lg: &LeveledGraph,
    epsilon: f64,
) -> Result<SwitchCheck> {
    let m = lg.edges.len();
    if u.len() != m || u_s.len() != m {
        return Err(Error::IndexMismatch(format!(
            "expected {m} values, got {} and {}",
            u.len(),
            u_s.len()
        )));
    }
    let nonneg = x.x_level.values().chain(x.x_top.values()).chain(x.z.values()).all(|&v| v >= 0.0);
    let g_rows = x.z.iter().filter(|(_, &v)| v > 0.0).all(|((set, l), _)| {
        let (inside, cut) = set_masses(lg, u_s, set, *l, true);
        inside - cut >= -1e-9 * (inside + cut)
    });
    for ((set, l), _) in x.z.iter().filter(|(_, &v)| v > 0.0) {
        set_masses(lg, u, set, *l, true);
    }
    let f_sparse = f_value(x, lg, u_s);
    let f_full = f_value(x, lg, u);
    let hypothesis = nonneg && g_rows && f_sparse >= (1.0 - epsilon / 8.0) * level_sums(lg, u_s);
    let conclusion = f_full >= (1.0 - epsilon / 2.0) * level_sums(lg, u);
    Ok(SwitchCheck { hypothesis, conclusion, f_sparse, f_full })
}
