use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::dual::{DualIterate, PackRows};
use crate::error::{Error, Result};
use crate::graph::{small_set_limit, LeveledGraph};

/// Sparsifier values attached to a leveled graph, with per-row degree sums.
#[derive(Clone, Debug)]
pub struct SparseSystem<'a> {
    pub lg: &'a LeveledGraph,
    pub rows: &'a PackRows,
    /// (edge id, value) with positive values, ascending edge id.
    pub us: Vec<(usize, f64)>,
    /// Per row (i, k), sum of values of level-k edges at i.
    pub deg: Vec<f64>,
    /// Sum of w_k u over all edges.
    pub uc: f64,
}

impl<'a> SparseSystem<'a> {
    pub fn new(lg: &'a LeveledGraph, rows: &'a PackRows, us: &[(usize, f64)]) -> Result<Self> {
        let mut vals: BTreeMap<usize, f64> = BTreeMap::new();
        for &(e, v) in us {
            if e >= lg.edges.len() {
                return Err(Error::IndexMismatch(format!("edge {e} out of range")));
            }
            if v < 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("bad value {v} on edge {e}")));
            }
            if v > 0.0 && vals.insert(e, v).is_some() {
                return Err(Error::IndexMismatch(format!("edge {e} given twice")));
            }
        }
        let us: Vec<(usize, f64)> = vals.into_iter().collect();
        let mut deg = vec![0.0; rows.len()];
        let mut uc = 0.0;
        for &(e, v) in &us {
            let le = &lg.edges[e];
            deg[rows.index[&(le.i, le.level)]] += v;
            deg[rows.index[&(le.j, le.level)]] += v;
            uc += lg.level_weight(le.level) * v;
        }
        Ok(SparseSystem { lg, rows, us, deg, uc })
    }

    /// Internal value of `set` over levels >= l, and the value crossing it.
    pub fn inside_and_cut(&self, member: &[bool], l: usize) -> (f64, f64) {
        let (mut inside, mut cut) = (0.0, 0.0);
        for &(e, v) in &self.us {
            let le = &self.lg.edges[e];
            if le.level < l {
                continue;
            }
            match (member[le.i], member[le.j]) {
                (true, true) => inside += v,
                (true, false) | (false, true) => cut += v,
                _ => {}
            }
        }
        (inside, cut)
    }

    /// Sum of 3 w_k zeta over rows.
    pub fn zq(&self, zeta: &[f64]) -> f64 {
        self.rows.rows.iter().zip(zeta).map(|(&(_, k), z)| 3.0 * self.lg.level_weight(k) * z).sum()
    }

    /// Covering value u^T A x and packing value zeta^T P x.
    pub fn lag_terms(&self, x: &DualIterate, zeta: &[f64]) -> (f64, f64) {
        let mut cover = 0.0;
        for (key, &v) in &x.x_level {
            if let Some(&r) = self.rows.index.get(key) {
                cover += v * self.deg[r];
            }
        }
        let mut member = vec![false; self.lg.n()];
        for ((set, l), &v) in &x.z {
            if v == 0.0 {
                continue;
            }
            set.iter().for_each(|&i| member[i] = true);
            cover += v * self.inside_and_cut(&member, *l).0;
            set.iter().for_each(|&i| member[i] = false);
        }
        let pack: f64 = x.row_activity(self.rows).iter().zip(zeta).map(|(a, z)| a * z).sum();
        (cover, pack)
    }
}

fn leq(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * (a.abs() + b.abs()).max(1e-300)
}

/// Row-by-row audit of a dual step against the penalized inner system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LagInnerCheck {
    pub lagrangian: bool,
    pub g_rows: bool,
    pub budget: bool,
    pub inner_width: bool,
    pub z_cap: bool,
    pub top_rows: bool,
    pub nonneg: bool,
    pub disjoint: bool,
}

impl LagInnerCheck {
    pub fn ok(&self) -> bool {
        self.lagrangian && self.g_rows && self.budget && self.inner_width && self.z_cap && self.top_rows && self.nonneg && self.disjoint
    }
}

pub fn check_laginner(
    x: &DualIterate,
    sys: &SparseSystem,
    zeta: &[f64],
    varrho: f64,
    beta: f64,
    epsilon: f64,
) -> LagInnerCheck {
    let lg = sys.lg;
    let (cover, pack) = sys.lag_terms(x, zeta);
    let gamma = sys.uc - varrho * sys.zq(zeta);
    let lagrangian = leq((1.0 - epsilon / 16.0) * gamma, cover - varrho * pack);

    let mut member = vec![false; lg.n()];
    let mut g_rows = true;
    let mut z_cap = true;
    let mut by_level: BTreeMap<usize, Vec<&Vec<usize>>> = BTreeMap::new();
    for ((set, l), &v) in &x.z {
        if v <= 0.0 {
            continue;
        }
        set.iter().for_each(|&i| member[i] = true);
        let (inside, cut) = sys.inside_and_cut(&member, *l);
        set.iter().for_each(|&i| member[i] = false);
        g_rows &= leq(cut, inside);
        z_cap &= leq(v, 24.0 * lg.level_weight(*l) / epsilon);
        by_level.entry(*l).or_default().push(set);
    }
    let mut disjoint = true;
    for sets in by_level.values() {
        let mut seen = BTreeSet::new();
        for s in sets {
            for &i in *s {
                disjoint &= seen.insert(i);
            }
        }
    }

    let budget = leq(x.budget_cost(&lg.base.b), beta);

    // Width rows for every (i, k) that carries any term.
    let mut keys: BTreeSet<(usize, usize)> = x.x_level.keys().copied().collect();
    keys.extend(sys.rows.rows.iter().copied());
    let cap = 24.0 / epsilon + 24.0 / (epsilon * epsilon);
    let mut inner_width = true;
    for &(i, k) in &keys {
        let mut act = 2.0 * x.x_level(i, k);
        for ((set, l), &v) in &x.z {
            if *l <= k && set.binary_search(&i).is_ok() {
                act += v;
            }
        }
        inner_width &= leq(act, cap * lg.level_weight(k));
    }
    let top_rows = x.x_level.iter().all(|(&(i, _), &v)| leq(v, x.x_top(i)));
    let nonneg = x.x_level.values().chain(x.x_top.values()).chain(x.z.values()).all(|&v| v >= 0.0);
    LagInnerCheck { lagrangian, g_rows, budget, inner_width, z_cap, top_rows, nonneg, disjoint }
}

/// Fractional primal certificate: edge values, per-(vertex, level) degree
/// values and penalties.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PrimalCert {
    pub y: Vec<(usize, f64)>,
    pub y_vertex: BTreeMap<(usize, usize), f64>,
    pub mu: BTreeMap<(usize, usize), f64>,
}

impl PrimalCert {
    /// Objective sum_k w_k (sum y - 3 sum mu).
    pub fn objective(&self, lg: &LeveledGraph) -> f64 {
        let ys: f64 = self.y.iter().map(|&(e, v)| lg.edge_weight(e) * v).sum();
        let ms: f64 = self.mu.iter().map(|(&(_, k), &v)| lg.level_weight(k) * v).sum();
        ys - 3.0 * ms
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CertCheck {
    pub objective: f64,
    pub objective_ok: bool,
    pub vertex_rows: bool,
    pub capacity_rows: bool,
    pub odd_rows: bool,
    pub nonneg: bool,
    pub odd_rows_checked: usize,
}

impl CertCheck {
    pub fn ok(&self) -> bool {
        self.objective_ok && self.vertex_rows && self.capacity_rows && self.odd_rows && self.nonneg
    }
}

/// Substitutes a certificate into every row of the certificate system. Odd
/// rows are enumerated over all small odd sets when `odd_rows` is set.
pub fn check_primal_cert(cert: &PrimalCert, lg: &LeveledGraph, beta: f64, epsilon: f64, odd_rows: bool) -> Result<CertCheck> {
    let n = lg.n();
    let b = &lg.base.b;
    let objective = cert.objective(lg);
    let objective_ok = leq((1.0 - epsilon) * beta, objective);
    let nonneg = cert.y.iter().map(|p| p.1).chain(cert.y_vertex.values().copied()).chain(cert.mu.values().copied()).all(|v| v >= 0.0);

    let mut sums: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(e, v) in &cert.y {
        let le = &lg.edges[e];
        *sums.entry((le.i, le.level)).or_insert(0.0) += v;
        *sums.entry((le.j, le.level)).or_insert(0.0) += v;
    }
    let mut vertex_rows = true;
    for (key, &s) in &sums {
        let mu = cert.mu.get(key).copied().unwrap_or(0.0);
        let yv = cert.y_vertex.get(key).copied().unwrap_or(0.0);
        vertex_rows &= leq(s - 2.0 * mu, yv);
    }
    let mut per_vertex = vec![0.0; n];
    for (&(i, _), &v) in &cert.y_vertex {
        per_vertex[i] += v;
    }
    let capacity_rows = (0..n).all(|i| leq(per_vertex[i], b[i] as f64));

    let mut check = CertCheck { objective, objective_ok, vertex_rows, capacity_rows, odd_rows: true, nonneg, odd_rows_checked: 0 };
    if odd_rows {
        if n > 20 {
            return Err(Error::CapExceeded(format!("odd-row audit over {n} vertices")));
        }
        let limit = small_set_limit(epsilon);
        let mut levels: BTreeSet<usize> = cert.y.iter().map(|&(e, _)| lg.edges[e].level).collect();
        levels.extend(cert.mu.keys().map(|&(_, k)| k));
        let size = 1usize << n;
        let mut mass = vec![0u64; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            mass[mask] = mass[mask & (mask - 1)] + b[low] as u64;
        }
        let mut inside = vec![0.0f64; size];
        for &l in &levels {
            let mut w = vec![vec![0.0f64; n]; n];
            for &(e, v) in &cert.y {
                let le = &lg.edges[e];
                if le.level >= l {
                    w[le.i][le.j] += v;
                    w[le.j][le.i] += v;
                }
            }
            let mut pen = vec![0.0f64; n];
            for (&(i, k), &v) in &cert.mu {
                if k >= l {
                    pen[i] += v;
                }
            }
            for mask in 1..size {
                let low = mask.trailing_zeros() as usize;
                let rest = mask & (mask - 1);
                let mut add = -pen[low];
                let mut r = rest;
                while r != 0 {
                    let j = r.trailing_zeros() as usize;
                    add += w[low][j];
                    r &= r - 1;
                }
                inside[mask] = inside[rest] + add;
                if mass[mask] % 2 == 1 && mass[mask] <= limit {
                    check.odd_rows_checked += 1;
                    if !leq(inside[mask], (mass[mask] / 2) as f64) {
                        check.odd_rows = false;
                    }
                }
            }
        }
    }
    Ok(check)
}
