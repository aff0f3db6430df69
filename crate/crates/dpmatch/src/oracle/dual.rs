use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::LeveledGraph;
use crate::pst::Mixable;

/// Sorted vertex list identifying an odd set.
pub type SetKey = Vec<usize>;

/// Layered dual point: per-level vertex values, top-level vertex values and
/// per-level odd-set values.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DualIterate {
    pub x_level: BTreeMap<(usize, usize), f64>,
    pub x_top: BTreeMap<usize, f64>,
    pub z: BTreeMap<(SetKey, usize), f64>,
}

impl DualIterate {
    pub fn is_zero(&self) -> bool {
        self.x_level.values().chain(self.x_top.values()).chain(self.z.values()).all(|&v| v == 0.0)
    }

    pub fn nonzeros(&self) -> usize {
        self.x_level.values().chain(self.x_top.values()).chain(self.z.values()).filter(|&&v| v != 0.0).count()
    }

    pub fn x_level(&self, i: usize, k: usize) -> f64 {
        self.x_level.get(&(i, k)).copied().unwrap_or(0.0)
    }

    pub fn x_top(&self, i: usize) -> f64 {
        self.x_top.get(&i).copied().unwrap_or(0.0)
    }

    /// Budget row: sum of b_i x_i plus z_U floor(|U|_b / 2).
    pub fn budget_cost(&self, b: &[u32]) -> f64 {
        let xs: f64 = self.x_top.iter().map(|(&i, &v)| b[i] as f64 * v).sum();
        let zs: f64 = self
            .z
            .iter()
            .map(|((u, _), &v)| (u.iter().map(|&i| b[i] as u64).sum::<u64>() / 2) as f64 * v)
            .sum();
        xs + zs
    }

    pub fn scale(&mut self, t: f64) {
        for v in self.x_level.values_mut().chain(self.x_top.values_mut()).chain(self.z.values_mut()) {
            *v *= t;
        }
    }

    /// Covering activity for every retained edge:
    /// x_i(k) + x_j(k) + sum over l <= k of z_{U,l} with i, j in U.
    pub fn edge_activity(&self, lg: &LeveledGraph) -> Vec<f64> {
        let mut act: Vec<f64> =
            lg.edges.iter().map(|e| self.x_level(e.i, e.level) + self.x_level(e.j, e.level)).collect();
        let mut inside = vec![false; lg.n()];
        for ((u, l), &v) in &self.z {
            if v == 0.0 {
                continue;
            }
            for &i in u {
                inside[i] = true;
            }
            for (_, ids) in lg.levels.range(*l..) {
                for &e in ids {
                    let le = &lg.edges[e];
                    if inside[le.i] && inside[le.j] {
                        act[e] += v;
                    }
                }
            }
            for &i in u {
                inside[i] = false;
            }
        }
        act
    }

    /// Outer packing activity for every row (i, k):
    /// 2 x_i(k) + sum over l <= k of z_{U,l} with i in U.
    pub fn row_activity(&self, rows: &PackRows) -> Vec<f64> {
        let mut act: Vec<f64> = rows.rows.iter().map(|&(i, k)| 2.0 * self.x_level(i, k)).collect();
        for ((u, l), &v) in &self.z {
            if v == 0.0 {
                continue;
            }
            for &i in u {
                for &(k, r) in &rows.by_vertex[i] {
                    if k >= *l {
                        act[r] += v;
                    }
                }
            }
        }
        act
    }

    /// Dual objective of the converted point max_k x_i(k), sum_l z_{U,l}.
    pub fn converted_objective(&self, b: &[u32]) -> f64 {
        let mut top: BTreeMap<usize, f64> = BTreeMap::new();
        for (&(i, _), &v) in &self.x_level {
            let t = top.entry(i).or_insert(0.0);
            *t = t.max(v);
        }
        let xs: f64 = top.iter().map(|(&i, &v)| b[i] as f64 * v).sum();
        let zs: f64 = self
            .z
            .iter()
            .map(|((u, _), &v)| (u.iter().map(|&i| b[i] as u64).sum::<u64>() / 2) as f64 * v)
            .sum();
        xs + zs
    }
}

impl Mixable for DualIterate {
    fn mix(&mut self, other: &Self, sigma: f64) {
        let keep = 1.0 - sigma;
        self.scale(keep);
        for (k, &v) in &other.x_level {
            *self.x_level.entry(*k).or_insert(0.0) += sigma * v;
        }
        for (k, &v) in &other.x_top {
            *self.x_top.entry(*k).or_insert(0.0) += sigma * v;
        }
        for (k, &v) in &other.z {
            *self.z.entry(k.clone()).or_insert(0.0) += sigma * v;
        }
    }
}

/// Rows (i, k) of the outer packing system: vertex i has an edge at level k.
#[derive(Clone, Debug)]
pub struct PackRows {
    pub rows: Vec<(usize, usize)>,
    pub index: BTreeMap<(usize, usize), usize>,
    /// Per vertex, its (level, row) pairs in increasing level.
    pub by_vertex: Vec<Vec<(usize, usize)>>,
}

impl PackRows {
    pub fn new(lg: &LeveledGraph) -> Self {
        let mut keys = std::collections::BTreeSet::new();
        for e in &lg.edges {
            keys.insert((e.i, e.level));
            keys.insert((e.j, e.level));
        }
        let rows: Vec<_> = keys.into_iter().collect();
        let index = rows.iter().enumerate().map(|(r, &k)| (k, r)).collect();
        let mut by_vertex = vec![Vec::new(); lg.n()];
        for (r, &(i, k)) in rows.iter().enumerate() {
            by_vertex[i].push((k, r));
        }
        PackRows { rows, index, by_vertex }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Right-hand side 3 w_k of each row.
    pub fn rhs(&self, lg: &LeveledGraph) -> Vec<f64> {
        self.rows.iter().map(|&(_, k)| 3.0 * lg.level_weight(k)).collect()
    }
}

/// Covering right-hand side: the level weight of every retained edge.
pub fn edge_rhs(lg: &LeveledGraph) -> Vec<f64> {
    (0..lg.edges.len()).map(|e| lg.edge_weight(e)).collect()
}

/// Minimum covering ratio over retained edges.
pub fn lambda_of(x: &DualIterate, lg: &LeveledGraph) -> crate::Result<f64> {
    if lg.edges.is_empty() {
        return Err(crate::Error::EmptyGraph);
    }
    let act = x.edge_activity(lg);
    Ok(act.iter().enumerate().map(|(e, a)| a / lg.edge_weight(e)).fold(f64::INFINITY, f64::min))
}
