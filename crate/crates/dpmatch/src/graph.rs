//! Capacitated graphs, weight discretization into geometric levels, and the
//! family of small odd sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used for level-boundary comparisons.
pub const REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Simple undirected graph with positive integer vertex capacities.
/// Edges are stored with `i < j` in insertion order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub b: Vec<u32>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize, f64)], b: Vec<u32>) -> Result<Self> {
        if b.len() != n {
            return Err(Error::InvalidParameter(format!(
                "capacity vector has length {} for {} vertices",
                b.len(),
                n
            )));
        }
        if let Some(v) = b.iter().position(|&x| x < 1) {
            return Err(Error::BadCapacity(v));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for &(a, c, w) in edges {
            if a == c {
                return Err(Error::SelfLoop(a));
            }
            let (i, j) = if a < c { (a, c) } else { (c, a) };
            if j >= n {
                return Err(Error::InvalidParameter(format!("vertex {j} out of range")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { i, j, w });
            }
            if !seen.insert((i, j)) {
                return Err(Error::DuplicateEdge(i, j));
            }
            out.push(Edge { i, j, w });
        }
        Ok(Graph { n, edges: out, b })
    }

    /// Sum of all capacities.
    pub fn total_b(&self) -> u64 {
        self.b.iter().map(|&x| x as u64).sum()
    }

    pub fn bnorm(&self, set: &[usize]) -> u64 {
        set.iter().map(|&v| self.b[v] as u64).sum()
    }
}

fn parse_fields<'a>(line: &'a str) -> Option<Vec<&'a str>> {
    let body = line.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        None
    } else {
        Some(body.split_whitespace().collect())
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses an edge list ("i j w" per line) and an optional capacity file
/// ("i b_i" per line). Vertices absent from the capacity file get capacity 1.
pub fn load_graph(edge_text: &str, b_text: Option<&str>) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (idx, line) in edge_text.lines().enumerate() {
        let lineno = idx + 1;
        let Some(f) = parse_fields(line) else { continue };
        if f.len() != 3 {
            return Err(parse_err(lineno, format!("expected 3 fields, found {}", f.len())));
        }
        let i: usize = f[0].parse().map_err(|_| parse_err(lineno, "bad vertex id"))?;
        let j: usize = f[1].parse().map_err(|_| parse_err(lineno, "bad vertex id"))?;
        let w: f64 = f[2].parse().map_err(|_| parse_err(lineno, "bad weight"))?;
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::NonPositiveWeight { i: i.min(j), j: i.max(j), w });
        }
        n = n.max(i + 1).max(j + 1);
        edges.push((i, j, w));
    }
    let mut caps = BTreeMap::new();
    if let Some(text) = b_text {
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let Some(f) = parse_fields(line) else { continue };
            if f.len() != 2 {
                return Err(parse_err(lineno, format!("expected 2 fields, found {}", f.len())));
            }
            let v: usize = f[0].parse().map_err(|_| parse_err(lineno, "bad vertex id"))?;
            let bv: i64 = f[1].parse().map_err(|_| parse_err(lineno, "bad capacity"))?;
            if bv < 1 || bv > u32::MAX as i64 {
                return Err(Error::BadCapacity(v));
            }
            n = n.max(v + 1);
            caps.insert(v, bv as u32);
        }
    }
    let b = (0..n).map(|v| caps.get(&v).copied().unwrap_or(1)).collect();
    Graph::new(n, &edges, b)
}

/// Index and weight of a maximum-weight edge; ties go to the
/// lexicographically smallest endpoint pair.
pub fn find_max_weight(g: &Graph) -> Result<(usize, f64)> {
    let mut best: Option<usize> = None;
    for (idx, e) in g.edges.iter().enumerate() {
        best = match best {
            None => Some(idx),
            Some(b) => {
                let cur = &g.edges[b];
                if e.w > cur.w || (e.w == cur.w && (e.i, e.j) < (cur.i, cur.j)) {
                    Some(idx)
                } else {
                    Some(b)
                }
            }
        };
    }
    let idx = best.ok_or(Error::EmptyGraph)?;
    Ok((idx, g.edges[idx].w))
}

/// An edge retained after discretization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelEdge {
    /// Position in `base.edges`.
    pub source: usize,
    pub i: usize,
    pub j: usize,
    pub level: usize,
}

#[derive(Clone, Debug)]
pub struct LeveledGraph {
    pub base: Graph,
    pub epsilon: f64,
    pub wstar: f64,
    pub scale: f64,
    /// Retained edges in source order.
    pub edges: Vec<LevelEdge>,
    /// Level index to positions in `edges`.
    pub levels: BTreeMap<usize, Vec<usize>>,
    pub max_level: usize,
    /// Source edges below the scale threshold.
    pub dropped: Vec<usize>,
}

/// Level of a rescaled ratio `r >= 1`: the unique k with (1+eps)^k <= r < (1+eps)^(k+1).
pub fn level_of(r: f64, epsilon: f64) -> usize {
    let base = 1.0 + epsilon;
    let mut k = (r.ln() / base.ln()).floor().max(0.0) as usize;
    while base.powi(k as i32 + 1) <= r * (1.0 + REL_TOL) {
        k += 1;
    }
    while k > 0 && base.powi(k as i32) > r * (1.0 + REL_TOL) {
        k -= 1;
    }
    k
}

pub fn discretize(g: &Graph, epsilon: f64) -> Result<LeveledGraph> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} not in (0, 1)")));
    }
    let (_, wstar) = find_max_weight(g)?;
    let scale = epsilon * wstar / g.total_b() as f64;
    let mut edges = Vec::new();
    let mut levels: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut dropped = Vec::new();
    for (idx, e) in g.edges.iter().enumerate() {
        let r = e.w / scale;
        if r < 1.0 - REL_TOL {
            dropped.push(idx);
            continue;
        }
        let level = level_of(r, epsilon);
        levels.entry(level).or_default().push(edges.len());
        edges.push(LevelEdge { source: idx, i: e.i, j: e.j, level });
    }
    let max_level = levels.keys().next_back().copied().unwrap_or(0);
    Ok(LeveledGraph { base: g.clone(), epsilon, wstar, scale, edges, levels, max_level, dropped })
}

impl LeveledGraph {
    pub fn n(&self) -> usize {
        self.base.n
    }

    /// Rescaled weight of level k.
    pub fn level_weight(&self, k: usize) -> f64 {
        (1.0 + self.epsilon).powi(k as i32)
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        self.level_weight(self.edges[e].level)
    }

    pub fn original_weight(&self, e: usize) -> f64 {
        self.base.edges[self.edges[e].source].w
    }

    /// Upper bound on the level index implied by the rescaling.
    pub fn level_bound(&self) -> usize {
        let b = self.base.total_b() as f64;
        ((b / self.epsilon).ln() / (1.0 + self.epsilon).ln()).ceil() as usize + 1
    }

    /// Index of the retained edge between `i` and `j`, if any.
    pub fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        let (a, c) = if i < j { (i, j) } else { (j, i) };
        self.edges.iter().position(|e| e.i == a && e.j == c)
    }

    /// Sub-graph of the base restricted to retained edges, with the rescaled
    /// level weights as edge weights.
    pub fn rescaled_graph(&self) -> Graph {
        let edges: Vec<_> =
            self.edges.iter().map(|e| (e.i, e.j, self.level_weight(e.level))).collect();
        Graph::new(self.base.n, &edges, self.base.b.clone()).expect("retained edges are valid")
    }
}

/// A vertex set together with its capacity mass.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OddSet {
    pub members: Vec<usize>,
    pub bnorm: u64,
}

impl OddSet {
    pub fn new(g: &Graph, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        let bnorm = g.bnorm(&members);
        OddSet { members, bnorm }
    }

    pub fn is_odd(&self) -> bool {
        self.bnorm % 2 == 1
    }

    pub fn half_floor(&self) -> u64 {
        self.bnorm / 2
    }
}

/// Largest b-mass allowed for members of the small odd set family.
pub fn small_set_limit(epsilon: f64) -> u64 {
    (4.0 / epsilon + REL_TOL).floor() as u64
}

#[derive(Clone, Copy, Debug)]
pub struct EnumCap {
    pub max_n: usize,
}

impl Default for EnumCap {
    fn default() -> Self {
        EnumCap { max_n: 20 }
    }
}

/// All vertex sets with odd b-mass at most 4/eps, ordered by size and then
/// lexicographically.
pub fn enumerate_small_odd_sets(g: &Graph, epsilon: f64, cap: EnumCap) -> Result<Vec<OddSet>> {
    if g.n > cap.max_n || g.n >= 63 {
        return Err(Error::CapExceeded(format!("{} vertices exceeds {}", g.n, cap.max_n)));
    }
    let limit = small_set_limit(epsilon);
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << g.n) {
        let mut mass = 0u64;
        let mut members = Vec::new();
        for v in 0..g.n {
            if mask >> v & 1 == 1 {
                mass += g.b[v] as u64;
                members.push(v);
            }
        }
        if mass % 2 == 1 && mass <= limit {
            out.push(OddSet { members, bnorm: mass });
        }
    }
    out.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then(a.members.cmp(&b.members)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle(third: f64) -> Graph {
        Graph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, third)], vec![1, 1, 1]).unwrap()
    }

    #[test]
    fn loads_smallest_graph() {
        let g = load_graph("0 1 1.0", Some("0 1\n1 1")).unwrap();
        assert_eq!(g.n, 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.b, vec![1, 1]);
    }

    #[test]
    fn loads_triangle_with_comments() {
        let g = load_graph("# tri\n0 1 1\n1 2 1 # x\n0 2 0.5\n", Some("0 1\n1 1\n2 1")).unwrap();
        assert_eq!(g.edges.len(), 3);
        assert_eq!(g.total_b(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(load_graph("0 0 1.0", None), Err(Error::SelfLoop(0))));
        assert!(matches!(load_graph("0 1 1\n1 0 2", None), Err(Error::DuplicateEdge(0, 1))));
        assert!(matches!(load_graph("0 1 -1", None), Err(Error::NonPositiveWeight { .. })));
        assert!(matches!(load_graph("0 1 1", Some("0 0")), Err(Error::BadCapacity(0))));
        match load_graph("0 1 1\n1 x 2", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_capacities_default_to_one() {
        let g = load_graph("0 1 1\n1 2 1", Some("1 3")).unwrap();
        assert_eq!(g.b, vec![1, 3, 1]);
    }

    #[test]
    fn max_weight_examples() {
        let eps = 1.0 / 16.0;
        let g = triangle(10.0 * eps);
        assert_eq!(find_max_weight(&g).unwrap().1, 1.0);
        let one = Graph::new(2, &[(0, 1, 7.0)], vec![1, 1]).unwrap();
        assert_eq!(find_max_weight(&one).unwrap(), (0, 7.0));
        let g = Graph::new(4, &[(2, 3, 5.0), (0, 1, 3.0), (1, 2, 5.0)], vec![1; 4]).unwrap();
        let (idx, w) = find_max_weight(&g).unwrap();
        assert_eq!(w, 5.0);
        assert_eq!((g.edges[idx].i, g.edges[idx].j), (1, 2));
        let empty = Graph::new(2, &[], vec![1, 1]).unwrap();
        assert!(matches!(find_max_weight(&empty), Err(Error::EmptyGraph)));
    }

    #[test]
    fn discretize_worked_example() {
        // W* = 100 and B = 10 give scale 5 at eps = 0.5.
        let g = Graph::new(10, &[(0, 1, 100.0), (2, 3, 12.0), (4, 5, 5.0), (6, 7, 4.0)], vec![1; 10])
            .unwrap();
        let lg = discretize(&g, 0.5).unwrap();
        assert!((lg.scale - 5.0).abs() < 1e-12);
        assert_eq!(lg.edges[1].level, 2);
        assert!((lg.edge_weight(1) - 2.25).abs() < 1e-12);
        assert_eq!(lg.edges[2].level, 0);
        assert_eq!(lg.edge_weight(2), 1.0);
        assert_eq!(lg.dropped, vec![3]);
        assert_eq!(lg.edges.len(), 3);
    }

    #[test]
    fn small_odd_set_examples() {
        let eps = 1.0 / 16.0;
        let g = triangle(1.0);
        let sets = enumerate_small_odd_sets(&g, eps, EnumCap::default()).unwrap();
        let members: Vec<_> = sets.iter().map(|s| s.members.clone()).collect();
        assert_eq!(members, vec![vec![0], vec![1], vec![2], vec![0, 1, 2]]);

        let g = Graph::new(2, &[(0, 1, 1.0)], vec![1, 1]).unwrap();
        assert_eq!(enumerate_small_odd_sets(&g, eps, EnumCap::default()).unwrap().len(), 2);

        let g = Graph::new(3, &[(0, 1, 1.0)], vec![2, 1, 1]).unwrap();
        let members: Vec<_> = enumerate_small_odd_sets(&g, eps, EnumCap::default())
            .unwrap()
            .into_iter()
            .map(|s| s.members)
            .collect();
        assert_eq!(members, vec![vec![1], vec![2], vec![0, 1], vec![0, 2]]);
    }

    #[test]
    fn enumeration_cap() {
        let g = Graph::new(21, &[(0, 1, 1.0)], vec![1; 21]).unwrap();
        assert!(matches!(
            enumerate_small_odd_sets(&g, 0.0625, EnumCap::default()),
            Err(Error::CapExceeded(_))
        ));
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..9).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let np = pairs.len();
            (
                proptest::collection::vec(proptest::option::of(0.01f64..1000.0), np),
                proptest::collection::vec(1u32..4, n),
            )
                .prop_map(move |(ws, b)| {
                    let mut edges: Vec<_> = pairs
                        .iter()
                        .zip(ws)
                        .filter_map(|(&(i, j), w)| w.map(|w| (i, j, w)))
                        .collect();
                    if edges.is_empty() {
                        edges.push((0, 1, 1.0));
                    }
                    Graph::new(n, &edges, b).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn rescaling_is_sound(g in arb_graph(), inv in 2u32..40) {
            let eps = 1.0 / inv as f64;
            let lg = discretize(&g, eps).unwrap();
            let b = g.total_b() as f64;
            let mut dropped_mass = 0.0;
            for &d in &lg.dropped {
                let w = g.edges[d].w;
                prop_assert!(w < lg.scale);
                dropped_mass += w;
            }
            prop_assert!(dropped_mass <= eps * lg.wstar * lg.dropped.len() as f64 / b + 1e-9);
            for (e, le) in lg.edges.iter().enumerate() {
                let r = g.edges[le.source].w * b / (eps * lg.wstar);
                let wk = lg.edge_weight(e);
                prop_assert!(wk <= r * (1.0 + REL_TOL));
                prop_assert!(r < (1.0 + eps) * wk * (1.0 + REL_TOL));
                // exactly one level satisfies the sandwich
                let count = (0..=lg.max_level + 1)
                    .filter(|&k| {
                        let lo = (1.0 + eps).powi(k as i32);
                        lo <= r * (1.0 + REL_TOL) && r * (1.0 + REL_TOL) < lo * (1.0 + eps)
                    })
                    .count();
                prop_assert_eq!(count, 1);
            }
            prop_assert!(lg.max_level <= lg.level_bound());
        }

        #[test]
        fn odd_sets_match_bitmask_enumeration(g in arb_graph(), inv in 1u32..5) {
            let eps = 1.0 / inv as f64;
            let sets = enumerate_small_odd_sets(&g, eps, EnumCap::default()).unwrap();
            let limit = (4.0 / eps).floor() as u64;
            let mut expected = 0usize;
            for mask in 1u32..(1 << g.n) {
                let mass: u64 = (0..g.n).filter(|v| mask >> v & 1 == 1).map(|v| g.b[v] as u64).sum();
                if mass % 2 == 1 && mass <= limit {
                    expected += 1;
                }
            }
            prop_assert_eq!(sets.len(), expected);
            let uniq: BTreeSet<_> = sets.iter().map(|s| s.members.clone()).collect();
            prop_assert_eq!(uniq.len(), sets.len());
            for s in &sets {
                prop_assert!(s.is_odd() && s.bnorm <= limit);
            }
        }
    }
}
