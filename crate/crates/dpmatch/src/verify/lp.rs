use num_traits::Zero;
use serde::Serialize;

use super::simplex::{q, qi, to_f64, Lp, Q};
use crate::error::{Error, Result};
use crate::graph::{discretize, small_set_limit, Graph, LeveledGraph};
use crate::oracle::PackRows;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LpCaps {
    /// Largest graph for the odd-set LPs.
    pub max_n: usize,
    /// Largest graph for the layered LP.
    pub max_n_layered: usize,
}

impl Default for LpCaps {
    fn default() -> Self {
        LpCaps { max_n: 10, max_n_layered: 7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpValues {
    /// Matching LP with every odd-set row, original weights.
    pub beta_star: f64,
    /// Degree rows only, original weights.
    pub beta_bipartite: f64,
    /// Both of the above on the discretized graph with level weights.
    pub beta_star_rescaled: f64,
    pub beta_bipartite_rescaled: f64,
    /// Layered dual over small odd sets, when within its cap.
    pub beta_hat_layered: Option<f64>,
}

fn odd_masks(b: &[u32], limit: Option<u64>) -> Vec<(usize, u64)> {
    let n = b.len();
    (1usize..1 << n)
        .filter_map(|mask| {
            let mass: u64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| b[i] as u64).sum();
            (mass % 2 == 1 && limit.map_or(true, |l| mass <= l)).then_some((mask, mass))
        })
        .collect()
}

/// max w.y over degree rows, plus odd-set rows added lazily when `odd` is set.
pub fn matching_lp(n: usize, edges: &[(usize, usize, f64)], b: &[u32], odd: bool) -> Result<Q> {
    let mut lp = Lp::new(edges.iter().map(|e| q(e.2)).collect());
    for v in 0..n {
        let row: Vec<(usize, Q)> =
            edges.iter().enumerate().filter(|(_, e)| e.0 == v || e.1 == v).map(|(k, _)| (k, qi(1))).collect();
        lp.add_row(row, qi(b[v] as i64));
    }
    let masks = if odd { odd_masks(b, None) } else { Vec::new() };
    loop {
        let sol = lp.solve()?;
        let mut added = 0;
        for &(mask, mass) in &masks {
            let inside: Vec<usize> =
                (0..edges.len()).filter(|&k| mask >> edges[k].0 & 1 == 1 && mask >> edges[k].1 & 1 == 1).collect();
            if inside.len() < 1 {
                continue;
            }
            let total: Q = inside.iter().fold(Q::zero(), |acc, &k| acc + &sol.y[k]);
            if total > qi((mass / 2) as i64) {
                lp.add_row(inside.iter().map(|&k| (k, qi(1))).collect(), qi((mass / 2) as i64));
                added += 1;
            }
        }
        if added == 0 {
            return Ok(sol.value);
        }
    }
}

/// Optimum of the layered dual over small odd sets, solved through its
/// maximization dual: edge values y, per-row penalties mu and splits nu.
pub fn layered_lp(lg: &LeveledGraph) -> Result<Q> {
    let rows = PackRows::new(lg);
    let m = lg.edges.len();
    let r = rows.len();
    let n = lg.n();
    let (y0, mu0, nu0) = (0, m, m + r);
    let mut c = vec![Q::zero(); m + 2 * r];
    for e in 0..m {
        c[y0 + e] = q(lg.edge_weight(e));
    }
    for (k, &(_, lvl)) in rows.rows.iter().enumerate() {
        c[mu0 + k] = -q(3.0 * lg.level_weight(lvl));
    }
    let mut lp = Lp::new(c);
    for (k, &(i, lvl)) in rows.rows.iter().enumerate() {
        let mut row: Vec<(usize, Q)> = lg
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.level == lvl && (e.i == i || e.j == i))
            .map(|(e, _)| (y0 + e, qi(1)))
            .collect();
        row.push((mu0 + k, qi(-2)));
        row.push((nu0 + k, qi(-1)));
        lp.add_row(row, qi(0));
    }
    for v in 0..n {
        let row: Vec<(usize, Q)> = rows.by_vertex[v].iter().map(|&(_, k)| (nu0 + k, qi(1))).collect();
        lp.add_row(row, qi(lg.base.b[v] as i64));
    }
    let masks = odd_masks(&lg.base.b, Some(small_set_limit(lg.epsilon)));
    let levels: Vec<usize> = lg.levels.keys().copied().collect();
    loop {
        let sol = lp.solve()?;
        let mut added = 0;
        for &(mask, mass) in &masks {
            for &l in &levels {
                let mut row: Vec<(usize, Q)> = Vec::new();
                for (e, le) in lg.edges.iter().enumerate() {
                    if le.level >= l && mask >> le.i & 1 == 1 && mask >> le.j & 1 == 1 {
                        row.push((y0 + e, qi(1)));
                    }
                }
                for (k, &(i, lvl)) in rows.rows.iter().enumerate() {
                    if lvl >= l && mask >> i & 1 == 1 {
                        row.push((mu0 + k, qi(-1)));
                    }
                }
                let lhs: Q = row.iter().fold(Q::zero(), |acc, (j, a)| acc + a * &sol.y[*j]);
                if lhs > qi((mass / 2) as i64) {
                    lp.add_row(row, qi((mass / 2) as i64));
                    added += 1;
                }
            }
        }
        if added == 0 {
            return Ok(sol.value);
        }
    }
}

fn rescaled_edges(lg: &LeveledGraph) -> Vec<(usize, usize, f64)> {
    lg.edges.iter().enumerate().map(|(e, le)| (le.i, le.j, lg.edge_weight(e))).collect()
}

pub fn exact_lp_values(g: &Graph, epsilon: f64, caps: LpCaps) -> Result<LpValues> {
    if g.n > caps.max_n {
        return Err(Error::CapExceeded(format!("{} vertices above LP cap {}", g.n, caps.max_n)));
    }
    let edges: Vec<(usize, usize, f64)> = g.edges.iter().map(|e| (e.i, e.j, e.w)).collect();
    let lg = discretize(g, epsilon)?;
    let scaled = rescaled_edges(&lg);
    let beta_hat_layered =
        if g.n <= caps.max_n_layered { Some(to_f64(&layered_lp(&lg)?)) } else { None };
    Ok(LpValues {
        beta_star: to_f64(&matching_lp(g.n, &edges, &g.b, true)?),
        beta_bipartite: to_f64(&matching_lp(g.n, &edges, &g.b, false)?),
        beta_star_rescaled: to_f64(&matching_lp(g.n, &scaled, &g.b, true)?),
        beta_bipartite_rescaled: to_f64(&matching_lp(g.n, &scaled, &g.b, false)?),
        beta_hat_layered,
    })
}
