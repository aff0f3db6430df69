use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, LeveledGraph};
use crate::oracle::DualIterate;
use crate::sketch::Sparsifier;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualCheck {
    pub feasible: bool,
    pub objective: f64,
    /// Smallest row slack relative to the edge weight.
    pub worst_row: f64,
}

/// Rows x_i + x_j + sum of z_U over odd U containing both ends >= w_ij.
pub fn check_dual_feasible(x: &[f64], z: &[(Vec<usize>, f64)], g: &Graph) -> DualCheck {
    let mut feasible = x.len() == g.n && x.iter().all(|&v| v >= 0.0);
    let mut objective: f64 = x.iter().zip(&g.b).map(|(v, &b)| v * b as f64).sum();
    for (set, v) in z {
        let mass = g.bnorm(set);
        feasible &= *v >= 0.0 && mass % 2 == 1;
        objective += (mass / 2) as f64 * v;
    }
    let mut worst = f64::INFINITY;
    for e in &g.edges {
        let mut lhs = x.get(e.i).copied().unwrap_or(0.0) + x.get(e.j).copied().unwrap_or(0.0);
        for (set, v) in z {
            if set.contains(&e.i) && set.contains(&e.j) {
                lhs += v;
            }
        }
        let slack = (lhs - e.w) / e.w;
        worst = worst.min(slack);
        feasible &= slack >= -1e-9;
    }
    DualCheck { feasible, objective, worst_row: worst }
}

/// Converts a layered point covering every row to the given fraction into a
/// point of the standard dual on the discretized graph: vertex values are the
/// maxima over levels and set values the sums over levels, both divided by
/// the coverage fraction.
pub fn convert_layered(x: &DualIterate, lg: &LeveledGraph, coverage: f64) -> (Vec<f64>, Vec<(Vec<usize>, f64)>) {
    let mut xv = vec![0.0f64; lg.n()];
    for (&(i, _), &v) in &x.x_level {
        xv[i] = xv[i].max(v / coverage);
    }
    let mut z: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for ((set, _), &v) in &x.z {
        *z.entry(set.clone()).or_insert(0.0) += v / coverage;
    }
    (xv, z.into_iter().collect())
}

/// Every pair of sets is nested or disjoint.
pub fn laminar_check(sets: &[Vec<usize>]) -> bool {
    for (a, s) in sets.iter().enumerate() {
        for t in &sets[a + 1..] {
            let common = s.iter().filter(|v| t.contains(v)).count();
            if common > 0 && common < s.len() && common < t.len() {
                return false;
            }
        }
    }
    true
}

/// Compares every cut of the sparsifier with the source graph; true when all
/// are within a factor 1 +- xi.
pub fn enumerate_cuts_check(h: &Sparsifier, n: usize, edges: &[(usize, usize, f64)], xi: f64) -> Result<bool> {
    if n > 16 {
        return Err(Error::CapExceeded(format!("cut enumeration over {n} vertices")));
    }
    if n < 2 {
        return Ok(true);
    }
    for mask in 1usize..(1 << (n - 1)) {
        let side = |v: usize| mask >> v & 1 == 1;
        let g: f64 = edges.iter().filter(|e| side(e.0) != side(e.1)).map(|e| e.2).sum();
        let s: f64 = h.edges.iter().filter(|e| side(e.i) != side(e.j)).map(|e| e.value).sum();
        let tol = 1e-9 * g.max(s).max(1e-300);
        if (s - g).abs() > xi * g + tol {
            return Ok(false);
        }
    }
    Ok(true)
}
