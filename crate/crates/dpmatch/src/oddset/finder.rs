use serde::Serialize;

use super::gomory_hu::gomory_hu;
use super::maxflow::{cut_value, CAP_LIMIT};
use crate::error::{Error, Result};

/// Integer-capacity graph on the vertices plus an apex `s` (index `n`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuxiliaryGraph {
    pub n: usize,
    pub cap: Vec<Vec<i64>>,
    pub kappa: i64,
    /// Discretization factor 8 / eps^3.
    pub scale: f64,
}

impl AuxiliaryGraph {
    pub fn apex(&self) -> usize {
        self.n
    }

    /// Cut of a vertex set that excludes the apex.
    pub fn cut(&self, set: &[usize]) -> i64 {
        let mut side = vec![false; self.n + 1];
        for &v in set {
            side[v] = true;
        }
        cut_value(&self.cap, &side)
    }
}

fn to_units(v: f64, what: &str) -> Result<i64> {
    if !v.is_finite() || v >= CAP_LIMIT as f64 {
        return Err(Error::CapExceeded(format!("{what} {v} exceeds the integer capacity limit")));
    }
    Ok(v as i64)
}

/// Pair capacities floor(q_ij 8/eps^3); apex capacities fill every vertex
/// degree up to ceil(q_hat_i 8/eps^3).
pub fn build_auxiliary(n: usize, q: &[(usize, usize, f64)], q_hat: &[f64], epsilon: f64) -> Result<AuxiliaryGraph> {
    if q_hat.len() != n {
        return Err(Error::IndexMismatch(format!("{} vertex values for {n} vertices", q_hat.len())));
    }
    let scale = 8.0 / epsilon.powi(3);
    let kappa = to_units(scale.floor(), "threshold")?;
    let mut cap = vec![vec![0i64; n + 1]; n + 1];
    let mut load = vec![0.0f64; n];
    for &(i, j, v) in q {
        if v < 0.0 || i == j || i >= n || j >= n {
            return Err(Error::InvalidParameter(format!("bad pair value {v} on ({i}, {j})")));
        }
        let c = to_units((v * scale).floor(), "pair capacity")?;
        cap[i][j] += c;
        cap[j][i] += c;
        load[i] += v;
        load[j] += v;
    }
    for i in 0..n {
        if q_hat[i] < 0.0 || load[i] > q_hat[i] * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::Contract(format!(
                "vertex {i}: pair values {} exceed vertex value {}",
                load[i], q_hat[i]
            )));
        }
        let target = to_units((q_hat[i] * scale).ceil(), "vertex degree")?;
        let used: i64 = cap[i][..n].iter().sum();
        let rest = (target - used).max(0);
        cap[i][n] = rest;
        cap[n][i] = rest;
    }
    Ok(AuxiliaryGraph { n, cap, kappa, scale })
}

/// Disjoint odd sets found by repeated minimum odd-cut extraction.
#[derive(Clone, Debug, Serialize)]
pub struct DenseSets {
    pub sets: Vec<Vec<usize>>,
    pub cuts: Vec<i64>,
    pub aux: AuxiliaryGraph,
}

/// Collects mutually disjoint odd sets (odd b-mass, apex excluded) whose cut
/// in the auxiliary graph is below the threshold, until every odd set that
/// avoids them has cut at least the threshold.
pub fn find_dense_odd_sets(
    q: &[(usize, usize, f64)],
    q_hat: &[f64],
    b: &[u32],
    epsilon: f64,
    c: f64,
) -> Result<DenseSets> {
    let n = b.len();
    for i in 0..n {
        if b[i] == 1 && q_hat.get(i).copied().unwrap_or(0.0) < c * (1.0 - 1e-9) {
            return Err(Error::Contract(format!("vertex {i} has unit capacity but value below {c}")));
        }
    }
    let aux = build_auxiliary(n, q, q_hat, epsilon)?;
    let s = aux.apex();
    let mut merged = vec![false; n];
    let mut sets = Vec::new();
    let mut cuts = Vec::new();
    loop {
        // A vertex with at least kappa capacity into the apex side can never
        // lie in a set of smaller cut.
        for i in 0..n {
            if !merged[i] {
                let to_apex: i64 = aux.cap[i][s] + (0..n).filter(|&w| merged[w]).map(|w| aux.cap[i][w]).sum::<i64>();
                if to_apex >= aux.kappa {
                    merged[i] = true;
                }
            }
        }
        let active: Vec<usize> = (0..n).filter(|&i| !merged[i]).collect();
        if active.is_empty() {
            break;
        }
        let m = active.len();
        let mut cap = vec![vec![0i64; m + 1]; m + 1];
        for (a, &va) in active.iter().enumerate() {
            for (d, &vd) in active.iter().enumerate() {
                cap[a][d] = aux.cap[va][vd];
            }
            let to_apex: i64 = aux.cap[va][s] + (0..n).filter(|&w| merged[w]).map(|w| aux.cap[va][w]).sum::<i64>();
            cap[a][m] = to_apex;
            cap[m][a] = to_apex;
        }
        let tree = gomory_hu(&cap);
        let mut best: Option<(i64, usize, Vec<usize>)> = None;
        for v in 1..=m {
            if tree.value[v] >= aux.kappa {
                continue;
            }
            let side = tree.subtree(v);
            let free: Vec<usize> = (0..m).filter(|&a| side[a] != side[m]).map(|a| active[a]).collect();
            let mass: u64 = free.iter().map(|&i| b[i] as u64).sum();
            if free.is_empty() || mass % 2 == 0 {
                continue;
            }
            let key = (tree.value[v], free[0]);
            if best.as_ref().map_or(true, |(bv, bm, _)| key < (*bv, *bm)) {
                best = Some((key.0, key.1, free));
            }
        }
        match best {
            None => break,
            Some((cut, _, set)) => {
                for &i in &set {
                    merged[i] = true;
                }
                sets.push(set);
                cuts.push(cut);
            }
        }
    }
    for (set, &cut) in sets.iter().zip(&cuts) {
        let direct = aux.cut(set);
        assert_eq!(direct, cut, "contracted cut disagrees with the direct cut");
    }
    Ok(DenseSets { sets, cuts, aux })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auxiliary_formulas() {
        let a = build_auxiliary(2, &[], &[1.0, 1.0], 0.5).unwrap();
        assert_eq!(a.kappa, 64);
        assert_eq!(a.cap[0][1], 0);
        assert_eq!(a.cap[0][2], 64);
        let a = build_auxiliary(2, &[(0, 1, 1.0)], &[1.0, 1.0], 0.5).unwrap();
        assert_eq!(a.cap[0][1], 64);
        assert_eq!(a.cap[0][2], 0);
        assert_eq!(a.cap[1][2], 0);
        match build_auxiliary(2, &[(0, 1, 1.0)], &[0.5, 1.0], 0.5) {
            Err(Error::Contract(msg)) => assert!(msg.contains("vertex 0")),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn triangle(offset: usize) -> Vec<(usize, usize, f64)> {
        vec![(offset, offset + 1, 1.0), (offset + 1, offset + 2, 1.0), (offset, offset + 2, 1.0)]
    }

    #[test]
    fn dense_triangle() {
        let r = find_dense_odd_sets(&triangle(0), &[2.0; 3], &[1; 3], 0.5, 1.0).unwrap();
        assert_eq!(r.sets, vec![vec![0, 1, 2]]);
        assert_eq!(r.cuts, vec![0]);
    }

    #[test]
    fn empty_density() {
        let r = find_dense_odd_sets(&[], &[1.0; 4], &[1; 4], 0.5, 1.0).unwrap();
        assert!(r.sets.is_empty());
    }

    #[test]
    fn two_triangles() {
        let mut q = triangle(0);
        q.extend(triangle(3));
        let r = find_dense_odd_sets(&q, &[2.0; 6], &[1; 6], 0.5, 1.0).unwrap();
        let mut sets = r.sets.clone();
        sets.sort();
        assert_eq!(sets, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(r.cuts, vec![0, 0]);
    }

    #[test]
    fn unit_capacity_precondition() {
        assert!(find_dense_odd_sets(&[], &[0.5], &[1], 0.5, 1.0).is_err());
    }
}
