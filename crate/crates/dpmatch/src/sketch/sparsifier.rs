use std::collections::BTreeMap;

use serde::Serialize;

use super::union_find::DisjointSet;
use crate::seed::derive;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SparsifierParams {
    pub xi: f64,
    /// Multiplier in the forest count `ceil(c_k * xi^-2 * ln^2(n+1))`.
    pub c_k: f64,
}

impl SparsifierParams {
    pub fn new(xi: f64) -> Self {
        SparsifierParams { xi, c_k: 16.0 }
    }

    pub fn forests(&self, n: usize) -> usize {
        let l = ((n + 1) as f64).ln();
        (self.c_k * l * l / (self.xi * self.xi)).ceil().max(1.0) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SparseEdge {
    /// Position in the input edge list.
    pub edge: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sparsifier {
    pub n: usize,
    pub edges: Vec<SparseEdge>,
    pub xi: f64,
}

impl Sparsifier {
    /// Total value crossing the cut given by `side`.
    pub fn cut(&self, side: &[bool]) -> f64 {
        self.edges.iter().filter(|e| side[e.i] != side[e.j]).map(|e| e.value).sum()
    }

    /// Edge-count bound `k (n-1) (log2 m + 1)` for one weight class.
    pub fn size_bound(n: usize, m: usize, params: &SparsifierParams) -> usize {
        let layers = (m.max(1) as f64).log2().floor() as usize + 1;
        params.forests(n) * n.saturating_sub(1) * layers
    }
}

/// Sampling decision for one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Sampled {
    pub pos: usize,
    /// Smallest layer at which the endpoints are separated in the k-th forest.
    pub exponent: usize,
    /// Deepest layer the edge survives to.
    pub depth: usize,
}

/// Layered forest construction over the edges `members` of one weight class.
pub(crate) fn layer_sample(
    n: usize,
    endpoints: &[(usize, usize)],
    members: &[usize],
    forests: usize,
    seed: u64,
) -> Vec<Sampled> {
    let m = members.len();
    if m == 0 {
        return Vec::new();
    }
    let top = (m as f64).log2().floor() as usize;
    let depth: Vec<usize> = members
        .iter()
        .map(|&p| (derive(seed, &[p as u64]).trailing_zeros() as usize).min(top + 1))
        .collect();
    let mut exponent: Vec<Option<usize>> = vec![None; m];
    for layer in 0..=top {
        let mut ufs: Vec<DisjointSet> = Vec::new();
        for (idx, &p) in members.iter().enumerate() {
            if depth[idx] < layer {
                continue;
            }
            let (u, v) = endpoints[p];
            let mut slot = None;
            for (f, uf) in ufs.iter_mut().enumerate() {
                if !uf.connected(u, v) {
                    slot = Some(f);
                    break;
                }
            }
            let f = slot.unwrap_or(ufs.len());
            if f >= forests {
                continue;
            }
            if f == ufs.len() {
                ufs.push(DisjointSet::new(n));
            }
            ufs[f].union(u, v);
        }
        for (idx, &p) in members.iter().enumerate() {
            if exponent[idx].is_some() {
                continue;
            }
            let (u, v) = endpoints[p];
            let separated = ufs.len() < forests || !ufs[forests - 1].connected(u, v);
            if separated {
                exponent[idx] = Some(layer);
            }
        }
    }
    members
        .iter()
        .enumerate()
        .map(|(idx, &p)| Sampled { pos: p, exponent: exponent[idx].unwrap_or(top + 1), depth: depth[idx] })
        .collect()
}

/// Dyadic class of a positive value: the l with 2^l <= v < 2^(l+1).
pub(crate) fn dyadic_class(v: f64) -> i64 {
    v.log2().floor() as i64
}

pub(crate) fn classes(values: &[f64]) -> BTreeMap<i64, Vec<usize>> {
    let mut out: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (p, &v) in values.iter().enumerate() {
        if v > 0.0 {
            out.entry(dyadic_class(v)).or_default().push(p);
        }
    }
    out
}

pub(crate) fn class_seed(seed: u64, class: i64) -> u64 {
    derive(seed, &[0x5EED, class as u64])
}

/// Streaming sparsifier of `(i, j, value)` edges: each dyadic value class is
/// sampled through the layered forests and kept edges are reweighted by the
/// inverse sampling probability.
pub fn build_streaming_sparsifier(
    n: usize,
    edges: &[(usize, usize, f64)],
    params: &SparsifierParams,
    seed: u64,
) -> Sparsifier {
    let endpoints: Vec<_> = edges.iter().map(|&(i, j, _)| (i, j)).collect();
    let values: Vec<_> = edges.iter().map(|e| e.2).collect();
    let forests = params.forests(n);
    let mut out = Vec::new();
    for (class, members) in classes(&values) {
        for s in layer_sample(n, &endpoints, &members, forests, class_seed(seed, class)) {
            if s.depth >= s.exponent {
                let (i, j) = endpoints[s.pos];
                let value = values[s.pos] * 2f64.powi(s.exponent as i32);
                out.push(SparseEdge { edge: s.pos, i, j, value });
            }
        }
    }
    out.sort_by_key(|e| e.edge);
    Sparsifier { n, edges: out, xi: params.xi }
}
