use super::maxflow::max_flow;

/// Gomory-Hu cut tree rooted at node 0: every non-root node `v` has a tree
/// edge to `parent[v]` whose value is the minimum cut between them, and the
/// component of `v` after deleting that edge is a minimum cut side.
#[derive(Clone, Debug, PartialEq)]
pub struct GomoryHuTree {
    pub parent: Vec<usize>,
    pub value: Vec<i64>,
}

/// Gusfield's construction with n - 1 max-flow calls.
pub fn gomory_hu(cap: &[Vec<i64>]) -> GomoryHuTree {
    let n = cap.len();
    let mut parent = vec![0usize; n];
    let mut value = vec![0i64; n];
    for s in 1..n {
        let t = parent[s];
        let (f, side) = max_flow(cap, s, t);
        value[s] = f;
        for v in 0..n {
            if v != s && side[v] && parent[v] == t {
                parent[v] = s;
            }
        }
        if side[parent[t]] && t != 0 {
            parent[s] = parent[t];
            parent[t] = s;
            value[s] = value[t];
            value[t] = f;
        }
    }
    GomoryHuTree { parent, value }
}

impl GomoryHuTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Nodes in the subtree of `v`, i.e. the side of the edge (v, parent[v])
    /// that holds `v`.
    pub fn subtree(&self, v: usize) -> Vec<bool> {
        let n = self.len();
        let mut inside = vec![false; n];
        for a in 0..n {
            let mut cur = a;
            let mut steps = 0;
            while cur != 0 && cur != v && steps <= n {
                cur = self.parent[cur];
                steps += 1;
            }
            inside[a] = cur == v;
        }
        inside
    }

    /// Minimum cut between two nodes: the smallest value on their tree path.
    pub fn min_cut(&self, a: usize, c: usize) -> i64 {
        let n = self.len();
        let path_to_root = |mut v: usize| {
            let mut p = vec![v];
            while v != 0 {
                v = self.parent[v];
                p.push(v);
                assert!(p.len() <= n + 1, "cycle in cut tree");
            }
            p
        };
        let pa = path_to_root(a);
        let pc = path_to_root(c);
        let on_c: Vec<bool> = (0..n).map(|v| pc.contains(&v)).collect();
        let meet = *pa.iter().find(|&&v| on_c[v]).expect("tree is connected");
        let mut best = i64::MAX;
        for p in [&pa, &pc] {
            for &v in p.iter().take_while(|&&v| v != meet) {
                best = best.min(self.value[v]);
            }
        }
        best
    }
}
