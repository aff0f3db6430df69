use std::collections::VecDeque;

/// Largest capacity accepted, leaving headroom for flow sums in i64.
pub const CAP_LIMIT: i64 = 1 << 52;

/// Maximum s-t flow on a dense symmetric capacity matrix by capacity-scaling
/// BFS augmentation. Returns the flow value and the source side of a minimum
/// cut (vertices reachable from `s` in the final residual graph).
pub fn max_flow(cap: &[Vec<i64>], s: usize, t: usize) -> (i64, Vec<bool>) {
    let n = cap.len();
    assert!(s != t && s < n && t < n, "bad terminals {s}, {t}");
    let mut res: Vec<Vec<i64>> = cap.to_vec();
    let top = cap.iter().flatten().copied().max().unwrap_or(0);
    let mut delta = if top > 0 { 1i64 << (63 - top.leading_zeros()) } else { 0 };
    let mut flow = 0i64;
    let mut prev = vec![usize::MAX; n];
    while delta >= 1 {
        loop {
            prev.iter_mut().for_each(|p| *p = usize::MAX);
            prev[s] = s;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                if v == t {
                    break;
                }
                for w in 0..n {
                    if prev[w] == usize::MAX && res[v][w] >= delta {
                        prev[w] = v;
                        queue.push_back(w);
                    }
                }
            }
            if prev[t] == usize::MAX {
                break;
            }
            let mut push = i64::MAX;
            let mut v = t;
            while v != s {
                push = push.min(res[prev[v]][v]);
                v = prev[v];
            }
            let mut v = t;
            while v != s {
                res[prev[v]][v] -= push;
                res[v][prev[v]] += push;
                v = prev[v];
            }
            flow += push;
        }
        delta /= 2;
    }
    let mut side = vec![false; n];
    side[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for w in 0..n {
            if !side[w] && res[v][w] > 0 {
                side[w] = true;
                queue.push_back(w);
            }
        }
    }
    (flow, side)
}

/// Capacity of the cut separating `side` from its complement.
pub fn cut_value(cap: &[Vec<i64>], side: &[bool]) -> i64 {
    let n = cap.len();
    let mut total = 0;
    for a in 0..n {
        for c in 0..n {
            if side[a] && !side[c] {
                total += cap[a][c];
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: usize, edges: &[(usize, usize, i64)]) -> Vec<Vec<i64>> {
        let mut c = vec![vec![0; n]; n];
        for &(a, b, w) in edges {
            c[a][b] += w;
            c[b][a] += w;
        }
        c
    }

    #[test]
    fn path_bottleneck() {
        let c = sym(3, &[(0, 1, 2), (1, 2, 5)]);
        let (f, side) = max_flow(&c, 0, 2);
        assert_eq!(f, 2);
        assert_eq!(cut_value(&c, &side), 2);
        assert!(!side[2]);
    }

    #[test]
    fn disconnected() {
        let c = sym(3, &[(0, 1, 4)]);
        assert_eq!(max_flow(&c, 0, 2).0, 0);
    }

    #[test]
    fn matches_cut_enumeration() {
        let c = sym(5, &[(0, 1, 3), (0, 2, 7), (1, 2, 1), (1, 3, 6), (2, 4, 2), (3, 4, 9), (0, 4, 1)]);
        for s in 0..5 {
            for t in 0..5 {
                if s == t {
                    continue;
                }
                let mut best = i64::MAX;
                for mask in 0u32..32 {
                    if mask >> s & 1 == 1 && mask >> t & 1 == 0 {
                        let side: Vec<bool> = (0..5).map(|v| mask >> v & 1 == 1).collect();
                        best = best.min(cut_value(&c, &side));
                    }
                }
                assert_eq!(max_flow(&c, s, t).0, best);
            }
        }
    }
}
