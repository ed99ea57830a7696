use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mst::mst;
use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};
use crate::structures::{Dsu, SpanningTree};

/// Largest instance solved exactly by branch-and-bound.
pub const MST_K_EXACT_MAX: usize = 20;
const PATH_DP_MAX: usize = 16;
const BNB_NODE_BUDGET: usize = 200_000;
const LOCAL_NEIGHBORS: usize = 12;

/// Minimum spanning tree with maximum degree at most `k`.
///
/// Returns the tree, its length and whether it is certified optimal. The MST
/// itself is returned when it already satisfies the bound; otherwise small
/// instances are solved exactly (a path dynamic program for `k = 2`, a
/// degree-branching search otherwise) and larger ones by local search.
pub fn mst_k(ps: &PointSet, k: usize) -> Result<(SpanningTree, f64, bool)> {
    let n = ps.len();
    if n < 2 {
        return Err(Error::SizeOutOfRange { n, min: 2, max: usize::MAX });
    }
    if k == 0 || (k == 1 && n > 2) {
        return Err(Error::Infeasible(format!("no spanning tree on {n} points has maximum degree {k}")));
    }
    let (t, len) = mst(ps);
    if t.max_degree(n) <= k {
        return Ok((t, len, true));
    }
    if k == 2 && n <= PATH_DP_MAX {
        let (t, len) = hamiltonian_path(ps);
        return Ok((t, len, true));
    }
    let (ht, hlen) = local_search(ps, k, t);
    if n <= MST_K_EXACT_MAX {
        if let Some((t, len)) = degree_bnb(ps, k, (ht.clone(), hlen), BNB_NODE_BUDGET) {
            return Ok((t, len, true));
        }
    }
    Ok((ht, hlen, false))
}

/// Shortest Hamiltonian path by bitmask dynamic programming.
fn hamiltonian_path(ps: &PointSet) -> (SpanningTree, f64) {
    let n = ps.len();
    let full = (1usize << n) - 1;
    let mut dp = vec![f64::INFINITY; (1 << n) * n];
    let mut par = vec![u8::MAX; (1 << n) * n];
    for j in 0..n {
        dp[(1 << j) * n + j] = 0.0;
    }
    for mask in 1..=full {
        for j in 0..n {
            let cur = dp[mask * n + j];
            if mask & (1 << j) == 0 || cur == f64::INFINITY {
                continue;
            }
            for x in 0..n {
                if mask & (1 << x) != 0 {
                    continue;
                }
                let nm = mask | 1 << x;
                let c = cur + ps.dist(j, x);
                if c < dp[nm * n + x] {
                    dp[nm * n + x] = c;
                    par[nm * n + x] = j as u8;
                }
            }
        }
    }
    let (mut j, mut best) = (0, f64::INFINITY);
    for x in 0..n {
        if dp[full * n + x] < best {
            best = dp[full * n + x];
            j = x;
        }
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut mask = full;
    while par[mask * n + j] != u8::MAX {
        let p = par[mask * n + j] as usize;
        edges.push(Edge::new(p, j));
        mask &= !(1 << j);
        j = p;
    }
    edges.sort_unstable();
    let len = edges.iter().map(|e| ps.dist(e.u, e.v)).sum();
    (SpanningTree { edges }, len)
}

struct Node {
    bound: f64,
    seq: usize,
    include: BTreeSet<Edge>,
    exclude: BTreeSet<Edge>,
    tree: Vec<Edge>,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound).then(o.seq.cmp(&self.seq))
    }
}

/// Kruskal with forced and forbidden edges over pre-sorted pairs.
fn constrained_mst(
    n: usize,
    sorted: &[(f64, Edge)],
    include: &BTreeSet<Edge>,
    exclude: &BTreeSet<Edge>,
) -> Option<(Vec<Edge>, f64)> {
    let mut dsu = Dsu::new(n);
    let mut tree = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    for &(d, e) in sorted {
        if include.contains(&e) {
            if !dsu.union(e.u, e.v) {
                return None;
            }
            tree.push(e);
            total += d;
        }
    }
    for &(d, e) in sorted {
        if tree.len() == n - 1 {
            break;
        }
        if !include.contains(&e) && !exclude.contains(&e) && dsu.union(e.u, e.v) {
            tree.push(e);
            total += d;
        }
    }
    (tree.len() == n - 1).then_some((tree, total))
}

/// Best-first search: at a node whose tree has a vertex `v` of degree above
/// `k`, any feasible tree misses one of `k+1` of `v`'s tree edges; child `j`
/// keeps the first `j` of them and forbids edge `j`. Returns `None` when the
/// node budget runs out; otherwise the optimum, which may be `incumbent`.
fn degree_bnb(
    ps: &PointSet,
    k: usize,
    incumbent: (SpanningTree, f64),
    budget: usize,
) -> Option<(SpanningTree, f64)> {
    let n = ps.len();
    let mut sorted: Vec<(f64, Edge)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| Edge::new(u, v))).map(|e| (ps.dist(e.u, e.v), e)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut ub = incumbent.1;
    let mut best = (incumbent.0.edges, incumbent.1);
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut nodes = 0;
    let (inc, exc) = (BTreeSet::new(), BTreeSet::new());
    let (tree, bound) = constrained_mst(n, &sorted, &inc, &exc)?;
    heap.push(Node { bound, seq, include: inc, exclude: exc, tree });
    while let Some(node) = heap.pop() {
        if node.bound >= ub - 1e-12 {
            break;
        }
        let mut deg = vec![0usize; n];
        for e in &node.tree {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        let v = (0..n).max_by_key(|&v| (deg[v], std::cmp::Reverse(v))).unwrap();
        if deg[v] <= k {
            ub = node.bound;
            best = (node.tree, node.bound);
            continue;
        }
        nodes += 1;
        if nodes > budget {
            return None;
        }
        let mut at_v: Vec<Edge> = node.tree.iter().copied().filter(|e| e.contains(v)).collect();
        at_v.sort_by_key(|e| (!node.include.contains(e), *e));
        let mut include = node.include.clone();
        for &e in at_v.iter().take(k + 1) {
            if !include.contains(&e) {
                let mut exclude = node.exclude.clone();
                exclude.insert(e);
                let mut ideg = vec![0usize; n];
                for f in &include {
                    ideg[f.u] += 1;
                    ideg[f.v] += 1;
                }
                if ideg.iter().all(|&d| d <= k) {
                    if let Some((tree, bound)) = constrained_mst(n, &sorted, &include, &exclude) {
                        if bound < ub - 1e-12 {
                            seq += 1;
                            heap.push(Node { bound, seq, include: include.clone(), exclude, tree });
                        }
                    }
                }
            }
            include.insert(e);
        }
    }
    let mut edges = best.0;
    edges.sort_unstable();
    let len = edges.iter().map(|e| ps.dist(e.u, e.v)).sum::<f64>();
    Some((SpanningTree { edges }, len))
}

struct TreeState {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl TreeState {
    fn from_edges(n: usize, edges: &[Edge]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for e in edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        TreeState { n, adj }
    }

    fn remove(&mut self, a: usize, b: usize) {
        self.adj[a].retain(|&x| x != b);
        self.adj[b].retain(|&x| x != a);
    }

    fn add(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
    }

    fn deg(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Vertices reachable from `s`.
    fn side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut q = VecDeque::from([s]);
        seen[s] = true;
        while let Some(x) = q.pop_front() {
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    q.push_back(y);
                }
            }
        }
        seen
    }

    /// Tree path from `a` to `b` as consecutive vertex pairs.
    fn path(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        let mut parent = vec![usize::MAX; self.n];
        parent[a] = a;
        let mut q = VecDeque::from([a]);
        while let Some(x) = q.pop_front() {
            if x == b {
                break;
            }
            for &y in &self.adj[x] {
                if parent[y] == usize::MAX {
                    parent[y] = x;
                    q.push_back(y);
                }
            }
        }
        let mut out = Vec::new();
        let mut x = b;
        while x != a {
            out.push((parent[x], x));
            x = parent[x];
        }
        out
    }

    fn edges(&self) -> Vec<Edge> {
        let mut e: Vec<Edge> =
            (0..self.n).flat_map(|u| self.adj[u].iter().filter(move |&&v| u < v).map(move |&v| Edge::new(u, v))).collect();
        e.sort_unstable();
        e
    }
}

/// Degree repair of the MST followed by random first-improvement edge swaps.
fn local_search(ps: &PointSet, k: usize, start: SpanningTree) -> (SpanningTree, f64) {
    let n = ps.len();
    let nbrs = ps.nearest_neighbors(LOCAL_NEIGHBORS.min(n - 1));
    let mut t = TreeState::from_edges(n, &start.edges);
    while let Some(v) = (0..n).find(|&v| t.deg(v) > k) {
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for w in t.adj[v].clone() {
            t.remove(v, w);
            let side = t.side(v);
            let ok = |t: &TreeState, a: usize| a != v && t.deg(a) < k;
            let consider = |a: usize, b: usize, best: &mut Option<(f64, usize, usize, usize)>| {
                if side[a] != side[b] && ok(&t, a) && ok(&t, b) {
                    let delta = ps.dist(a, b) - ps.dist(v, w);
                    if best.is_none_or(|x| delta < x.0) {
                        *best = Some((delta, w, a, b));
                    }
                }
            };
            for a in 0..n {
                for &b in &nbrs[a] {
                    consider(a, b, &mut best);
                }
            }
            t.add(v, w);
        }
        if best.is_none() {
            for w in t.adj[v].clone() {
                t.remove(v, w);
                let side = t.side(v);
                for a in 0..n {
                    for b in a + 1..n {
                        if side[a] != side[b] && a != v && b != v && t.deg(a) < k && t.deg(b) < k {
                            let delta = ps.dist(a, b) - ps.dist(v, w);
                            if best.is_none_or(|x| delta < x.0) {
                                best = Some((delta, w, a, b));
                            }
                        }
                    }
                }
                t.add(v, w);
            }
        }
        let (_, w, a, b) = best.expect("a degree-feasible reconnection exists for k >= 2");
        t.remove(v, w);
        t.add(a, b);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d73_746b ^ (n as u64) << 8 ^ k as u64);
    let iters = 200 * n;
    for _ in 0..iters {
        let a = rng.gen_range(0..n);
        let b = nbrs[a][rng.gen_range(0..nbrs[a].len())];
        if t.adj[a].contains(&b) {
            continue;
        }
        let dab = ps.dist(a, b);
        let mut best: Option<(f64, usize, usize)> = None;
        for (x, y) in t.path(a, b) {
            let da = t.deg(a) + 1 - (a == x || a == y) as usize;
            let db = t.deg(b) + 1 - (b == x || b == y) as usize;
            if da <= k && db <= k {
                let d = ps.dist(x, y);
                if best.is_none_or(|z| d > z.0) {
                    best = Some((d, x, y));
                }
            }
        }
        if let Some((d, x, y)) = best {
            if d > dab + 1e-12 {
                t.remove(x, y);
                t.add(a, b);
            }
        }
    }
    let edges = t.edges();
    let len = edges.iter().map(|e| ps.dist(e.u, e.v)).sum();
    (SpanningTree { edges }, len)
}
