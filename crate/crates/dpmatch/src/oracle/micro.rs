use std::collections::BTreeMap;

use serde::Serialize;

use super::checks::{check_laginner, check_primal_cert, PrimalCert, SparseSystem};
use super::dual::DualIterate;
use crate::error::{Error, Result};
use crate::oddset::{check_family, collect_violated_sets, DenseSet, LevelInput};

/// Which return path produced a dual step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Zero,
    Vertex,
    OddSet,
}

#[derive(Clone, Debug)]
pub enum MicroOutcome {
    DualStep { x: DualIterate, branch: Branch },
    PrimalCert(PrimalCert),
}

/// Tallies of the post-hoc audits run on oracle outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MicroAudit {
    /// Largest vertex count for exhaustive odd-set audits.
    pub max_n: usize,
    pub calls: usize,
    pub dual_steps: usize,
    pub dual_failures: usize,
    pub certs: usize,
    pub cert_failures: usize,
    pub families: usize,
    pub family_failures: usize,
    pub worst_sparse_slack: f64,
    pub failures: Vec<String>,
}

impl MicroAudit {
    pub fn new(max_n: usize) -> Self {
        MicroAudit { max_n, worst_sparse_slack: f64::INFINITY, ..Default::default() }
    }

    pub fn violations(&self) -> usize {
        self.dual_failures + self.cert_failures + self.family_failures
    }

    fn note(&mut self, msg: String) {
        if self.failures.len() < 32 {
            self.failures.push(msg);
        }
    }
}

/// Counters for the return paths taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MicroStats {
    pub zero: usize,
    pub vertex: usize,
    pub odd_set: usize,
    pub cert: usize,
}

/// The penalized oracle for one sparsifier and one set of row multipliers;
/// only the Lagrangian weight varies between calls.
pub struct MicroOracle<'a> {
    pub sys: &'a SparseSystem<'a>,
    pub zeta: &'a [f64],
    pub beta: f64,
    pub epsilon: f64,
    /// Lower bound on vertex values of unit-capacity vertices in the odd-set step.
    pub c: f64,
    pub stats: MicroStats,
    pub audit: Option<MicroAudit>,
}

fn leq(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * (a.abs() + b.abs()).max(1e-300)
}

impl<'a> MicroOracle<'a> {
    pub fn new(sys: &'a SparseSystem<'a>, zeta: &'a [f64], beta: f64, epsilon: f64) -> Result<Self> {
        if zeta.len() != sys.rows.len() {
            return Err(Error::IndexMismatch(format!("{} multipliers for {} rows", zeta.len(), sys.rows.len())));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0 / 16.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside (0, 1/16]")));
        }
        Ok(MicroOracle { sys, zeta, beta, epsilon, c: 1.0, stats: MicroStats::default(), audit: None })
    }

    /// Penalized target uc - varrho zq.
    pub fn gamma(&self, varrho: f64) -> f64 {
        self.sys.uc - varrho * self.sys.zq(self.zeta)
    }

    pub fn run(&mut self, varrho: f64) -> Result<MicroOutcome> {
        if !(varrho > 0.0) {
            return Err(Error::InvalidParameter(format!("varrho {varrho} must be positive")));
        }
        let out = self.compute(varrho)?;
        if let Some(mut audit) = self.audit.take() {
            audit.calls += 1;
            match &out {
                MicroOutcome::DualStep { x, branch } => {
                    audit.dual_steps += 1;
                    let c = check_laginner(x, self.sys, self.zeta, varrho, self.beta, self.epsilon);
                    if !c.ok() {
                        audit.dual_failures += 1;
                        audit.note(format!("{branch:?} step fails inner rows: {c:?}"));
                    }
                }
                MicroOutcome::PrimalCert(cert) => {
                    audit.certs += 1;
                    let small = self.sys.lg.n() <= audit.max_n;
                    let c = check_primal_cert(cert, self.sys.lg, self.beta, self.epsilon, small)?;
                    if !c.ok() {
                        audit.cert_failures += 1;
                        audit.note(format!("certificate fails rows: {c:?}"));
                    }
                }
            }
            self.audit = Some(audit);
        }
        Ok(out)
    }

    fn compute(&mut self, varrho: f64) -> Result<MicroOutcome> {
        let sys = self.sys;
        let lg = sys.lg;
        let rows = sys.rows;
        let n = lg.n();
        let eps = self.epsilon;
        let beta = self.beta;
        let b = &lg.base.b;
        let wk = |k: usize| lg.level_weight(k);
        let gamma = self.gamma(varrho);
        if !(gamma > 0.0) {
            self.stats.zero += 1;
            return Ok(MicroOutcome::DualStep { x: DualIterate::default(), branch: Branch::Zero });
        }

        // Positive rows per vertex: (level, row, surplus).
        let mut pos: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            for &(k, r) in &rows.by_vertex[i] {
                let a = sys.deg[r] - 2.0 * varrho * self.zeta[r];
                if a > 0.0 {
                    pos[i].push((k, r, a));
                }
            }
        }
        let delta = |p: &[(usize, usize, f64)], l: usize| -> f64 {
            p.iter().map(|&(k, _, a)| if k <= l { wk(k) * a } else { wk(l) * a }).sum()
        };
        let top_level = lg.max_level;
        let mut kstar: Vec<Option<usize>> = vec![None; n];
        let mut gamma_v = 0.0;
        for i in 0..n {
            if pos[i].is_empty() {
                continue;
            }
            // delta(i, l) / w_l is nonincreasing in l, so the qualifying levels form a prefix.
            let thresh = gamma * b[i] as f64 / beta;
            let mut best = None;
            for l in 0..=top_level {
                if delta(&pos[i], l) > thresh * wk(l) {
                    best = Some(l);
                } else {
                    break;
                }
            }
            if let Some(l) = best {
                kstar[i] = Some(l);
                gamma_v += delta(&pos[i], l);
            }
        }

        if gamma_v >= eps * gamma / 24.0 {
            let mut x = DualIterate::default();
            for i in 0..n {
                let Some(ks) = kstar[i] else { continue };
                let mut top = 0.0f64;
                for &(k, _, _) in &pos[i] {
                    let v = gamma * wk(k.min(ks)) / gamma_v;
                    x.x_level.insert((i, k), v);
                    top = top.max(v);
                }
                x.x_top.insert(i, top);
            }
            self.check_budget(&x)?;
            self.stats.vertex += 1;
            return Ok(MicroOutcome::DualStep { x, branch: Branch::Vertex });
        }

        // Absorb violated rows into the penalties.
        let mut zbar: Vec<f64> = self.zeta.to_vec();
        for i in 0..n {
            let Some(ks) = kstar[i] else { continue };
            for &(k, r, _) in &pos[i] {
                if k <= ks {
                    zbar[r] = sys.deg[r] / (2.0 * varrho);
                }
            }
        }
        for i in 0..n {
            let surplus: f64 = rows.by_vertex[i].iter().map(|&(_, r)| (sys.deg[r] - 2.0 * varrho * zbar[r]).max(0.0)).sum();
            let bound = gamma * b[i] as f64 / beta;
            if !leq(surplus, bound) {
                return Err(Error::Contract(format!("vertex {i}: residual surplus {surplus} exceeds {bound}")));
            }
        }
        let gamma_p = sys.uc - 3.0 * varrho * rows.rows.iter().zip(&zbar).map(|(&(_, k), z)| wk(k) * z).sum::<f64>();
        if !leq((1.0 - eps / 16.0) * gamma, gamma_p) {
            return Err(Error::Contract(format!("absorbed target {gamma_p} below (1 - eps/16) {gamma}")));
        }

        // Levels where the suffix data changes; each level l uses the next such level >= l.
        let mut active: Vec<usize> = sys.us.iter().map(|&(e, _)| lg.edges[e].level).collect();
        active.extend(rows.rows.iter().zip(&zbar).filter(|(_, &z)| z > 0.0).map(|(&(_, k), _)| k));
        active.sort_unstable();
        active.dedup();
        let mut families: Vec<(usize, usize, Vec<DenseSet>)> = Vec::new();
        let mut edges_ge: Vec<(usize, usize, f64)> = Vec::new();
        let mut us_desc: Vec<(usize, f64)> = sys.us.clone();
        us_desc.sort_by_key(|&(e, _)| std::cmp::Reverse(lg.edges[e].level));
        let mut cursor = 0;
        let mut penalty = vec![0.0f64; n];
        let mut rows_desc: Vec<usize> = (0..rows.len()).collect();
        rows_desc.sort_by_key(|&r| std::cmp::Reverse(rows.rows[r].1));
        let mut rcursor = 0;
        for idx in (0..active.len()).rev() {
            let a = active[idx];
            let lo = if idx == 0 { 0 } else { active[idx - 1] + 1 };
            while cursor < us_desc.len() && lg.edges[us_desc[cursor].0].level >= a {
                let (e, v) = us_desc[cursor];
                edges_ge.push((lg.edges[e].i, lg.edges[e].j, v));
                cursor += 1;
            }
            while rcursor < rows_desc.len() && rows.rows[rows_desc[rcursor]].1 >= a {
                let r = rows_desc[rcursor];
                penalty[rows.rows[r].0] += zbar[r];
                rcursor += 1;
            }
            let input = LevelInput { b, edges: &edges_ge, penalty: &penalty, gamma, beta, varrho, epsilon: eps, c: self.c };
            let fam = collect_violated_sets(&input)?;
            if let Some(audit) = self.audit.as_mut() {
                if n <= audit.max_n {
                    let chk = check_family(&input, &fam, audit.max_n)?;
                    audit.families += 1;
                    audit.worst_sparse_slack = audit.worst_sparse_slack.min(chk.worst_sparse_slack);
                    if !chk.ok() {
                        audit.family_failures += 1;
                        audit.note(format!("level {a} family fails: {chk:?}"));
                    }
                }
            }
            if !fam.is_empty() {
                families.push((lo, a, fam));
            }
        }

        let gamma_os: f64 = families
            .iter()
            .map(|(lo, hi, fam)| {
                let wsum: f64 = (*lo..=*hi).map(wk).sum();
                fam.iter().map(|s| s.density).sum::<f64>() * wsum
            })
            .sum();

        if gamma_os >= eps * gamma_p / 24.0 && gamma_os > 0.0 {
            let mut x = DualIterate::default();
            for (lo, hi, fam) in &families {
                for l in *lo..=*hi {
                    for s in fam {
                        x.z.insert((s.members.clone(), l), gamma_p * wk(l) / gamma_os);
                    }
                }
            }
            self.check_budget(&x)?;
            self.stats.odd_set += 1;
            return Ok(MicroOutcome::DualStep { x, branch: Branch::OddSet });
        }

        // Primal certificate.
        let mut zhat: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, &z) in zbar.iter().enumerate() {
            if z > 0.0 {
                zhat.insert(rows.rows[r], z);
            }
        }
        for (lo, hi, fam) in &families {
            for s in fam {
                for &i in &s.members {
                    let add = gamma * b[i] as f64 / (2.0 * varrho * beta);
                    for l in *lo..=*hi {
                        *zhat.entry((i, l)).or_insert(0.0) += add;
                    }
                }
            }
        }
        let scale = (1.0 - eps / 4.0) * beta / ((1.0 + eps / 2.0) * gamma);
        let y: Vec<(usize, f64)> = sys.us.iter().map(|&(e, v)| (e, scale * v)).collect();
        let mu: BTreeMap<(usize, usize), f64> = zhat.iter().map(|(&k, &z)| (k, scale * varrho * z)).collect();
        let mut y_vertex = BTreeMap::new();
        for (r, &(i, k)) in rows.rows.iter().enumerate() {
            let m = mu.get(&(i, k)).copied().unwrap_or(0.0);
            let v = scale * sys.deg[r] - 2.0 * m;
            if v > 0.0 {
                y_vertex.insert((i, k), v);
            }
        }
        self.stats.cert += 1;
        Ok(MicroOutcome::PrimalCert(PrimalCert { y, y_vertex, mu }))
    }

    fn check_budget(&self, x: &DualIterate) -> Result<()> {
        let cost = x.budget_cost(&self.sys.lg.base.b);
        if !leq(cost, self.beta) {
            return Err(Error::Contract(format!("dual step costs {cost} above budget {}", self.beta)));
        }
        let eps = self.epsilon;
        for ((_, l), &v) in &x.z {
            if !leq(v, 24.0 * self.sys.lg.level_weight(*l) / eps) {
                return Err(Error::Contract(format!("set value {v} above cap at level {l}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{discretize, Graph, LeveledGraph};
    use crate::oracle::checks::check_laginner;
    use crate::oracle::dual::PackRows;

    fn leveled(n: usize, edges: &[(usize, usize, f64)], b: Vec<u32>) -> LeveledGraph {
        discretize(&Graph::new(n, edges, b).unwrap(), 1.0 / 16.0).unwrap()
    }

    #[test]
    fn nonpositive_target_gives_zero() {
        let lg = leveled(2, &[(0, 1, 1.0)], vec![1, 1]);
        let rows = PackRows::new(&lg);
        let sys = SparseSystem::new(&lg, &rows, &[(0, 1.0)]).unwrap();
        let zeta = vec![1.0; rows.len()];
        let mut m = MicroOracle::new(&sys, &zeta, 1.0, 0.0625).unwrap();
        match m.run(1e6).unwrap() {
            MicroOutcome::DualStep { x, branch } => {
                assert_eq!(branch, Branch::Zero);
                assert!(x.is_zero());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn star_gives_vertex_step() {
        let lg = leveled(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], vec![1; 4]);
        let rows = PackRows::new(&lg);
        let us: Vec<_> = (0..3).map(|e| (e, 1.0)).collect();
        let sys = SparseSystem::new(&lg, &rows, &us).unwrap();
        let zeta = vec![0.0; rows.len()];
        // The center's degree 3 beats gamma / beta = 1.5; the leaves' degree 1 does not.
        let beta = 2.0 * lg.level_weight(lg.edges[0].level);
        let mut m = MicroOracle::new(&sys, &zeta, beta, 0.0625).unwrap();
        m.audit = Some(MicroAudit::new(10));
        match m.run(1.0).unwrap() {
            MicroOutcome::DualStep { x, branch } => {
                assert_eq!(branch, Branch::Vertex);
                assert!(x.x_top(0) > 0.0);
                assert!(x.budget_cost(&lg.base.b) <= beta * (1.0 + 1e-12));
                assert!(check_laginner(&x, &sys, &zeta, 1.0, beta, 0.0625).ok());
            }
            _ => panic!(),
        }
        assert_eq!(m.audit.unwrap().violations(), 0);
    }

    #[test]
    fn large_budget_gives_certificate() {
        let lg = leveled(4, &[(0, 1, 1.0), (2, 3, 1.0)], vec![1; 4]);
        let rows = PackRows::new(&lg);
        let sys = SparseSystem::new(&lg, &rows, &[(0, 1.0), (1, 1.0)]).unwrap();
        let zeta = vec![0.0; rows.len()];
        // Budget well below the matching value: the certificate must cover (1 - eps) beta.
        let beta = 0.5 * lg.level_weight(lg.edges[0].level);
        let mut m = MicroOracle::new(&sys, &zeta, beta * 4.0, 0.0625).unwrap();
        m.audit = Some(MicroAudit::new(10));
        let out = m.run(1.0).unwrap();
        let audit = m.audit.unwrap();
        assert_eq!(audit.violations(), 0, "{:?}", audit.failures);
        assert!(matches!(out, MicroOutcome::PrimalCert(_)));
    }

    #[test]
    fn dense_triangle_odd_set_step() {
        let lg = leveled(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], vec![1; 3]);
        let rows = PackRows::new(&lg);
        let us: Vec<_> = (0..3).map(|e| (e, 1.0)).collect();
        let sys = SparseSystem::new(&lg, &rows, &us).unwrap();
        // Degree 2 stays below gamma / beta = 2.5, but the triangle is dense.
        let zeta = vec![0.0; rows.len()];
        let w = lg.level_weight(lg.edges[0].level);
        let mut m = MicroOracle::new(&sys, &zeta, 1.2 * w, 0.0625).unwrap();
        m.audit = Some(MicroAudit::new(10));
        let out = m.run(1.0).unwrap();
        let audit = m.audit.unwrap();
        assert_eq!(audit.violations(), 0, "{:?}", audit.failures);
        match out {
            MicroOutcome::DualStep { x, branch } => {
                assert_eq!(branch, Branch::OddSet);
                assert!(x.z.keys().all(|(s, _)| s == &vec![0, 1, 2]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
