use serde::Serialize;

use super::finder::find_dense_odd_sets;
use crate::error::{Error, Result};
use crate::graph::small_set_limit;

/// One level's data for odd-set collection. Edge values and vertex penalties
/// are already summed over all levels at or above the current one.
#[derive(Clone, Copy, Debug)]
pub struct LevelInput<'a> {
    pub b: &'a [u32],
    /// (i, j, u) for sparsifier edges at levels >= l.
    pub edges: &'a [(usize, usize, f64)],
    /// Per vertex, the penalty sum over levels >= l.
    pub penalty: &'a [f64],
    pub gamma: f64,
    pub beta: f64,
    pub varrho: f64,
    pub epsilon: f64,
    /// Lower bound on vertex values of unit-capacity vertices.
    pub c: f64,
}

impl LevelInput<'_> {
    /// Conversion factor (1 - eps/4) beta / gamma.
    pub fn coef(&self) -> f64 {
        (1.0 - self.epsilon / 4.0) * self.beta / self.gamma
    }

    /// Internal value minus the penalty of `set`.
    pub fn density(&self, set: &[usize]) -> f64 {
        let mut member = vec![false; self.b.len()];
        for &i in set {
            member[i] = true;
        }
        let inside: f64 = self.edges.iter().filter(|e| member[e.0] && member[e.1]).map(|e| e.2).sum();
        let pen: f64 = set.iter().map(|&i| self.penalty[i]).sum();
        inside - self.varrho * pen
    }

    fn half_floor(&self, set: &[usize]) -> u64 {
        set.iter().map(|&i| self.b[i] as u64).sum::<u64>() / 2
    }

    /// Lower bound a collected set must meet.
    pub fn dense_bound(&self, set: &[usize]) -> f64 {
        self.half_floor(set) as f64 / self.coef()
    }

    /// Upper bound every set avoiding the collection must meet.
    pub fn sparse_bound(&self, set: &[usize]) -> f64 {
        (self.half_floor(set) as f64 + self.epsilon / 2.0) / self.coef()
    }
}

/// A collected set with its density.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseSet {
    pub members: Vec<usize>,
    pub density: f64,
}

fn slack_tol(x: f64, y: f64) -> f64 {
    1e-9 * (x.abs() + y.abs()).max(1e-12)
}

/// Mutually disjoint small odd sets that are dense at this level.
pub fn collect_violated_sets(input: &LevelInput) -> Result<Vec<DenseSet>> {
    let n = input.b.len();
    if !(input.gamma > 0.0) || !(input.beta > 0.0) || !(input.varrho > 0.0) {
        return Err(Error::InvalidParameter("odd-set collection needs positive gamma, beta, varrho".into()));
    }
    if input.penalty.len() != n || input.penalty.iter().any(|&z| z < 0.0) {
        return Err(Error::InvalidParameter("penalty must be nonnegative per vertex".into()));
    }
    let coef = input.coef();
    let q: Vec<(usize, usize, f64)> =
        input.edges.iter().filter(|e| e.2 > 0.0).map(|&(i, j, u)| (i, j, coef * u)).collect();
    if q.is_empty() {
        return Ok(Vec::new());
    }
    let q_hat: Vec<f64> =
        (0..n).map(|i| input.b[i] as f64 + 2.0 * coef * input.varrho * input.penalty[i]).collect();
    let found = find_dense_odd_sets(&q, &q_hat, input.b, input.epsilon, input.c)?;
    let limit = small_set_limit(input.epsilon);
    let mut out = Vec::with_capacity(found.sets.len());
    for set in found.sets {
        let mass: u64 = set.iter().map(|&i| input.b[i] as u64).sum();
        if mass % 2 == 0 || mass > limit {
            return Err(Error::Contract(format!("collected set {set:?} has b-mass {mass} outside the small odd family")));
        }
        let density = input.density(&set);
        let bound = input.dense_bound(&set);
        if density < bound - slack_tol(density, bound) {
            return Err(Error::Contract(format!("collected set {set:?} density {density} below {bound}")));
        }
        out.push(DenseSet { members: set, density });
    }
    Ok(out)
}

/// Exhaustive audit of one level's collection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FamilyCheck {
    pub sets_checked: usize,
    pub disjoint: bool,
    pub dense_ok: bool,
    pub sparse_ok: bool,
    /// Smallest value of sparse bound minus density over untouched sets.
    pub worst_sparse_slack: f64,
}

impl FamilyCheck {
    pub fn ok(&self) -> bool {
        self.disjoint && self.dense_ok && self.sparse_ok
    }
}

/// Checks disjointness, the density lower bound for every collected set and
/// the sparse upper bound for every small odd set avoiding the collection.
pub fn check_family(input: &LevelInput, family: &[DenseSet], max_free: usize) -> Result<FamilyCheck> {
    let n = input.b.len();
    let mut used = vec![false; n];
    let mut disjoint = true;
    let mut dense_ok = true;
    for s in family {
        for &i in &s.members {
            disjoint &= !used[i];
            used[i] = true;
        }
        let d = input.density(&s.members);
        let bound = input.dense_bound(&s.members);
        dense_ok &= d >= bound - slack_tol(d, bound);
    }
    let free: Vec<usize> = (0..n).filter(|&i| !used[i]).collect();
    if free.len() > max_free {
        return Err(Error::CapExceeded(format!("{} free vertices exceed the audit cap {max_free}", free.len())));
    }
    let f = free.len();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = k;
    }
    let mut w = vec![vec![0.0f64; f]; f];
    for &(i, j, u) in input.edges {
        if pos[i] != usize::MAX && pos[j] != usize::MAX {
            w[pos[i]][pos[j]] += u;
            w[pos[j]][pos[i]] += u;
        }
    }
    let limit = small_set_limit(input.epsilon);
    let size = 1usize << f;
    let mut inside = vec![0.0f64; size];
    let mut pen = vec![0.0f64; size];
    let mut mass = vec![0u64; size];
    let mut check = FamilyCheck { disjoint, dense_ok, sparse_ok: true, worst_sparse_slack: f64::INFINITY, sets_checked: 0 };
    let coef = input.coef();
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut add = 0.0;
        let mut r = rest;
        while r != 0 {
            let j = r.trailing_zeros() as usize;
            add += w[low][j];
            r &= r - 1;
        }
        inside[mask] = inside[rest] + add;
        pen[mask] = pen[rest] + input.penalty[free[low]];
        mass[mask] = mass[rest] + input.b[free[low]] as u64;
        if mass[mask] % 2 == 1 && mass[mask] <= limit {
            check.sets_checked += 1;
            let d = inside[mask] - input.varrho * pen[mask];
            let bound = (mass[mask] / 2) as f64 / coef + input.epsilon / (2.0 * coef);
            let slack = bound - d;
            check.worst_sparse_slack = check.worst_sparse_slack.min(slack);
            if slack < -slack_tol(d, bound) {
                check.sparse_ok = false;
            }
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input<'a>(b: &'a [u32], edges: &'a [(usize, usize, f64)], pen: &'a [f64], gamma: f64) -> LevelInput<'a> {
        LevelInput { b, edges, penalty: pen, gamma, beta: 1.0, varrho: 1.0, epsilon: 0.5, c: 1.0 }
    }

    #[test]
    fn zero_values_give_nothing() {
        let b = [1u32; 4];
        let pen = [0.0; 4];
        let edges = [(0, 1, 0.0), (2, 3, 0.0)];
        let inp = input(&b, &edges, &pen, 1.0);
        assert!(collect_violated_sets(&inp).unwrap().is_empty());
        assert!(collect_violated_sets(&input(&b, &[], &pen, 1.0)).unwrap().is_empty());
    }

    #[test]
    fn dense_triangle_collected() {
        let b = [1u32; 4];
        // Penalties lift the vertex values above the pair loads.
        let pen = [0.5, 0.5, 0.55, 0.0];
        // coef = 0.875 / gamma; with gamma = 0.875 the pair values equal u.
        let edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 0.05)];
        let inp = input(&b, &edges, &pen, 0.875);
        let fam = collect_violated_sets(&inp).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].members, vec![0, 1, 2]);
        let chk = check_family(&inp, &fam, 16).unwrap();
        assert!(chk.ok(), "{chk:?}");
    }

    #[test]
    fn sparse_instance_audit() {
        let b = [1u32, 2, 1, 1, 1];
        let pen = [0.1, 0.0, 0.2, 0.0, 0.0];
        let edges = [(0, 1, 0.3), (1, 2, 0.2), (2, 3, 0.4), (3, 4, 0.1)];
        let inp = LevelInput { b: &b, edges: &edges, penalty: &pen, gamma: 1.0, beta: 1.0, varrho: 0.5, epsilon: 0.25, c: 1.0 };
        let fam = collect_violated_sets(&inp).unwrap();
        let chk = check_family(&inp, &fam, 16).unwrap();
        assert!(chk.ok(), "{chk:?}");
        assert!(chk.sets_checked > 0);
    }
}
