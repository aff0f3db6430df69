use serde::Serialize;

use super::checks::PrimalCert;
use crate::error::{Error, Result};
use crate::graph::LeveledGraph;

/// One matched edge; `edge` indexes the input edge list.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Matched {
    pub edge: usize,
    pub i: usize,
    pub j: usize,
    pub mult: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BMatching {
    pub edges: Vec<Matched>,
    pub weight: f64,
}

impl BMatching {
    pub fn degrees(&self, n: usize) -> Vec<u64> {
        let mut d = vec![0u64; n];
        for m in &self.edges {
            d[m.i] += m.mult as u64;
            d[m.j] += m.mult as u64;
        }
        d
    }

    pub fn degree_feasible(&self, b: &[u32]) -> bool {
        self.degrees(b.len()).iter().zip(b).all(|(&d, &c)| d <= c as u64)
    }

    /// Odd-set rows for every odd set of at most `max_n` vertices; integral
    /// degree-feasible solutions always pass.
    pub fn odd_sets_feasible(&self, b: &[u32], max_n: usize) -> Result<bool> {
        let n = b.len();
        if n > max_n {
            return Err(Error::CapExceeded(format!("{n} vertices above odd-set audit cap {max_n}")));
        }
        for mask in 1usize..(1 << n) {
            let mass: u64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| b[i] as u64).sum();
            if mass % 2 == 0 {
                continue;
            }
            let inside: u64 = self
                .edges
                .iter()
                .filter(|m| mask >> m.i & 1 == 1 && mask >> m.j & 1 == 1)
                .map(|m| m.mult as u64)
                .sum();
            if inside > mass / 2 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn cap(res: &[u32], i: usize, j: usize) -> u32 {
    res[i].min(res[j])
}

struct Search<'a> {
    edges: &'a [(usize, usize, f64)],
    order: Vec<usize>,
    /// tail_best[idx][v]: heaviest edge at or after position idx touching v.
    tail_best: Vec<Vec<f64>>,
    res: Vec<u32>,
    mult: Vec<u32>,
    best: f64,
    best_mult: Vec<u32>,
}

impl Search<'_> {
    fn bound(&self, idx: usize) -> f64 {
        let by_vertex: f64 =
            self.res.iter().enumerate().map(|(v, &r)| r as f64 * self.tail_best[idx][v]).sum::<f64>() / 2.0;
        let by_edge: f64 = self.order[idx..]
            .iter()
            .map(|&e| {
                let (i, j, w) = self.edges[e];
                w * cap(&self.res, i, j) as f64
            })
            .sum();
        by_vertex.min(by_edge)
    }

    fn go(&mut self, idx: usize, value: f64) {
        if value > self.best {
            self.best = value;
            self.best_mult.clone_from(&self.mult);
        }
        if idx == self.order.len() || value + self.bound(idx) <= self.best * (1.0 + 1e-12) {
            return;
        }
        let e = self.order[idx];
        let (i, j, w) = self.edges[e];
        let top = cap(&self.res, i, j);
        for t in (0..=top).rev() {
            self.res[i] -= t;
            self.res[j] -= t;
            self.mult[e] = t;
            self.go(idx + 1, value + w * t as f64);
            self.res[i] += t;
            self.res[j] += t;
        }
        self.mult[e] = 0;
    }
}

fn exact(edges: &[(usize, usize, f64)], b: &[u32]) -> Vec<u32> {
    let n = b.len();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &c| edges[c].2.total_cmp(&edges[a].2).then(a.cmp(&c)));
    let mut tail_best = vec![vec![0.0f64; n]; order.len() + 1];
    for idx in (0..order.len()).rev() {
        tail_best[idx] = tail_best[idx + 1].clone();
        let (i, j, w) = edges[order[idx]];
        tail_best[idx][i] = tail_best[idx][i].max(w);
        tail_best[idx][j] = tail_best[idx][j].max(w);
    }
    let mut s = Search {
        edges,
        order,
        tail_best,
        res: b.to_vec(),
        mult: vec![0; edges.len()],
        best: 0.0,
        best_mult: vec![0; edges.len()],
    };
    s.go(0, 0.0);
    s.best_mult
}

/// Greedy by weight, then unit swaps: add one copy of an edge while dropping
/// at most one copy of an incident edge at each saturated endpoint.
fn local_search(edges: &[(usize, usize, f64)], b: &[u32]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &c| edges[c].2.total_cmp(&edges[a].2).then(a.cmp(&c)));
    let mut res = b.to_vec();
    let mut mult = vec![0u32; edges.len()];
    for &e in &order {
        let (i, j, _) = edges[e];
        let t = cap(&res, i, j);
        mult[e] += t;
        res[i] -= t;
        res[j] -= t;
    }
    let cheapest = |mult: &[u32], v: usize, skip: usize| -> Option<usize> {
        (0..edges.len())
            .filter(|&f| f != skip && mult[f] > 0 && (edges[f].0 == v || edges[f].1 == v))
            .min_by(|&a, &c| edges[a].2.total_cmp(&edges[c].2).then(a.cmp(&c)))
    };
    let limit = 64 * edges.len().max(1) * b.iter().map(|&x| x as usize).sum::<usize>().max(1);
    for _ in 0..limit {
        let mut improved = false;
        for &e in &order {
            let (i, j, w) = edges[e];
            let drop_i = if res[i] == 0 { cheapest(&mult, i, e) } else { None };
            if res[i] == 0 && drop_i.is_none() {
                continue;
            }
            // Dropping a copy at i may already free j when the dropped edge is shared.
            let mut res2 = res.clone();
            let mut loss = 0.0;
            if let Some(f) = drop_i {
                res2[edges[f].0] += 1;
                res2[edges[f].1] += 1;
                loss += edges[f].2;
            }
            let mut mult2 = mult.clone();
            if let Some(f) = drop_i {
                mult2[f] -= 1;
            }
            let drop_j = if res2[j] == 0 { cheapest(&mult2, j, e) } else { None };
            if res2[j] == 0 && drop_j.is_none() {
                continue;
            }
            if let Some(f) = drop_j {
                res2[edges[f].0] += 1;
                res2[edges[f].1] += 1;
                loss += edges[f].2;
                mult2[f] -= 1;
            }
            if w > loss * (1.0 + 1e-12) + 1e-300 {
                mult2[e] += 1;
                res2[i] -= 1;
                res2[j] -= 1;
                mult = mult2;
                res = res2;
                improved = true;
                // Refill greedily after the swap.
                for &g in &order {
                    let (a, c, _) = edges[g];
                    let t = cap(&res, a, c);
                    mult[g] += t;
                    res[a] -= t;
                    res[c] -= t;
                }
                break;
            }
        }
        if !improved {
            break;
        }
    }
    mult
}

/// Maximum-weight b-matching on `edges`: exact branch-and-bound when there
/// are at most `exact_threshold` edges, greedy plus local search otherwise.
pub fn offline_bmatching(edges: &[(usize, usize, f64)], b: &[u32], exact_threshold: usize) -> Result<BMatching> {
    let n = b.len();
    for &(i, j, w) in edges {
        if i >= n || j >= n || i == j {
            return Err(Error::IndexMismatch(format!("edge ({i}, {j}) outside {n} vertices")));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::NonPositiveWeight { i, j, w });
        }
    }
    let mult = if edges.len() <= exact_threshold { exact(edges, b) } else { local_search(edges, b) };
    let mut out = BMatching::default();
    for (e, &t) in mult.iter().enumerate() {
        if t > 0 {
            let (i, j, w) = edges[e];
            out.edges.push(Matched { edge: e, i, j, mult: t });
            out.weight += w * t as f64;
        }
    }
    debug_assert!(out.degree_feasible(b));
    Ok(out)
}

/// Integral solution on the certificate's support in rescaled weights.
/// Returned `edge` fields index `lg.edges`.
pub fn extract_integral(
    cert: &PrimalCert,
    lg: &LeveledGraph,
    epsilon: f64,
    beta: f64,
    exact_threshold: usize,
) -> Result<BMatching> {
    let support: Vec<usize> = cert.y.iter().filter(|p| p.1 > 0.0).map(|p| p.0).collect();
    let edges: Vec<(usize, usize, f64)> =
        support.iter().map(|&e| (lg.edges[e].i, lg.edges[e].j, lg.edge_weight(e))).collect();
    let mut m = offline_bmatching(&edges, &lg.base.b, exact_threshold)?;
    for x in &mut m.edges {
        x.edge = support[x.edge];
    }
    let need = (1.0 - 2.0 * epsilon) * beta;
    if m.weight < need * (1.0 - 1e-9) {
        return Err(Error::Contract(format!("integral weight {} on certificate support below {need}", m.weight)));
    }
    Ok(m)
}
