use std::collections::BTreeMap;

use crate::geometry::{Edge, PointSet};
use crate::structures::SpanningTree;

/// Minimum spanning tree by dense Prim, O(n²).
pub fn mst(ps: &PointSet) -> (SpanningTree, f64) {
    let n = ps.len();
    if n < 2 {
        return (SpanningTree { edges: Vec::new() }, 0.0);
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let p = ps.point(cur);
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = crate::geometry::dist(p, ps.point(v));
            if d < best[v] {
                best[v] = d;
                parent[v] = cur;
            }
            if best[v] < next_d {
                next_d = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push(Edge::new(parent[next], next));
        total += next_d;
        cur = next;
    }
    edges.sort_unstable();
    (SpanningTree { edges }, total)
}

/// Number of vertices of each degree.
pub fn mst_degree_histogram(t: &SpanningTree, n: usize) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for d in t.degrees(n) {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}
