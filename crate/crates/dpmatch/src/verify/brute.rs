use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BruteCaps {
    pub max_n: usize,
    pub max_total_b: u64,
}

impl Default for BruteCaps {
    fn default() -> Self {
        BruteCaps { max_n: 14, max_total_b: 24 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Enumeration,
    LpVertexSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactResult {
    pub value: f64,
    /// (edge index, multiplicity) with positive multiplicity.
    pub witness: Vec<(usize, u32)>,
    pub method: Method,
}

struct Dp<'a> {
    n: usize,
    /// Per vertex, (edge index, other endpoint) for edges to higher vertices.
    forward: Vec<Vec<(usize, usize)>>,
    g: &'a Graph,
    memo: HashMap<(usize, Vec<u8>), f64>,
}

impl Dp<'_> {
    /// Every way to spend at most res[v] on v's forward edges.
    fn options(&self, v: usize, res: &[u8]) -> Vec<Vec<(usize, usize, u8)>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(
            k: usize,
            fw: &[(usize, usize)],
            left: u8,
            res: &[u8],
            cur: &mut Vec<(usize, usize, u8)>,
            out: &mut Vec<Vec<(usize, usize, u8)>>,
        ) {
            if k == fw.len() || left == 0 {
                out.push(cur.clone());
                return;
            }
            let (e, j) = fw[k];
            for t in 0..=left.min(res[j]) {
                if t > 0 {
                    cur.push((e, j, t));
                }
                rec(k + 1, fw, left - t, res, cur, out);
                if t > 0 {
                    cur.pop();
                }
            }
        }
        rec(0, &self.forward[v], res[v], res, &mut cur, &mut out);
        out
    }

    fn best(&mut self, v: usize, res: &mut Vec<u8>) -> f64 {
        if v == self.n {
            return 0.0;
        }
        let key = (v, res[v..].to_vec());
        if let Some(&b) = self.memo.get(&key) {
            return b;
        }
        let mut best = 0.0f64;
        for opt in self.options(v, res) {
            let mut gain = 0.0;
            for &(e, j, t) in &opt {
                res[j] -= t;
                gain += self.g.edges[e].w * t as f64;
            }
            best = best.max(gain + self.best(v + 1, res));
            for &(_, j, t) in &opt {
                res[j] += t;
            }
        }
        self.memo.insert(key, best);
        best
    }
}

/// Maximum-weight b-matching by memoized vertex elimination: each vertex in
/// turn chooses multiplicities on its edges to later vertices.
pub fn brute_force_bmatching(g: &Graph, caps: BruteCaps) -> Result<ExactResult> {
    if g.n > caps.max_n || g.total_b() > caps.max_total_b {
        return Err(Error::CapExceeded(format!(
            "n = {} and B = {} exceed caps {} and {}",
            g.n,
            g.total_b(),
            caps.max_n,
            caps.max_total_b
        )));
    }
    let n = g.n;
    let mut forward = vec![Vec::new(); n];
    for (e, ed) in g.edges.iter().enumerate() {
        let (a, c) = if ed.i < ed.j { (ed.i, ed.j) } else { (ed.j, ed.i) };
        forward[a].push((e, c));
    }
    let mut dp = Dp { n, forward, g, memo: HashMap::new() };
    let mut res: Vec<u8> = g.b.iter().map(|&x| x.min(255) as u8).collect();
    let value = dp.best(0, &mut res);
    // Walk the memo table to recover one optimal choice per vertex.
    let mut witness = Vec::new();
    let mut acc = 0.0;
    for v in 0..n {
        let target = dp.best(v, &mut res);
        let mut chosen = None;
        for opt in dp.options(v, &res) {
            let mut gain = 0.0;
            for &(e, j, t) in &opt {
                res[j] -= t;
                gain += g.edges[e].w * t as f64;
            }
            let rest = dp.best(v + 1, &mut res);
            for &(_, j, t) in &opt {
                res[j] += t;
            }
            if gain + rest >= target * (1.0 - 1e-12) - 1e-300 {
                chosen = Some(opt);
                break;
            }
        }
        let opt = chosen.expect("memo walk lost the optimum");
        for (e, j, t) in opt {
            res[j] -= t;
            res[v] -= t;
            acc += g.edges[e].w * t as f64;
            witness.push((e, t as u32));
        }
    }
    witness.sort_unstable();
    debug_assert!((acc - value).abs() <= 1e-9 * value.max(1.0));
    Ok(ExactResult { value: acc, witness, method: Method::Enumeration })
}
