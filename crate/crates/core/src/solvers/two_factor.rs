use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use super::matching::{price_tol, CostMatching};
use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};
use crate::structures::{cycle_edges, Constraints, TwoFactor};

const COMPLETE_BELOW: usize = 17;
const CANDIDATE_NEIGHBORS: usize = 8;
pub const GIRTH_NODE_BUDGET: usize = 1_000_000;

/// Minimum 2-factor honoring forced edges `I` and forbidden edges `O`.
///
/// Each vertex `v` becomes two slots and each candidate edge `e = uv` a pair
/// `e_u, e_v` joined at cost zero; slot-to-`e_u` and `e_v`-to-slot edges cost
/// half of `|uv|`. A perfect matching either pairs `e_u` with `e_v` (edge
/// unused) or routes both through slots (edge used). A forced edge loses its
/// zero-cost link; a forbidden edge has no gadget at all.
pub fn two_factor(ps: &PointSet, c: &Constraints) -> Result<(TwoFactor, f64)> {
    let n = ps.len();
    if n < 3 {
        return Err(Error::SizeOutOfRange { n, min: 3, max: usize::MAX });
    }
    c.validate(n)?;
    let mut cand: BTreeSet<Edge> = BTreeSet::new();
    let mut complete = n < COMPLETE_BELOW;
    if complete {
        for u in 0..n {
            for v in u + 1..n {
                cand.insert(Edge::new(u, v));
            }
        }
    } else {
        for (u, nb) in ps.nearest_neighbors(CANDIDATE_NEIGHBORS).into_iter().enumerate() {
            for v in nb {
                cand.insert(Edge::new(u, v));
            }
        }
        cand.extend(c.include.iter().copied());
    }
    for e in &c.exclude {
        cand.remove(e);
    }
    loop {
        let list: Vec<Edge> = cand.iter().copied().collect();
        let (m, used) = solve_gadget(ps, &list, &c.include);
        if !m.sol.is_perfect() {
            if complete {
                return Err(Error::Infeasible("no 2-factor satisfies the constraints".into()));
            }
            complete = true;
            for u in 0..n {
                for v in u + 1..n {
                    let e = Edge::new(u, v);
                    if !c.exclude.contains(&e) {
                        cand.insert(e);
                    }
                }
            }
            continue;
        }
        let mut added = false;
        if !complete {
            let slot_min: Vec<i64> =
                (0..n).map(|v| m.sol.vertex_dual(2 * v).min(m.sol.vertex_dual(2 * v + 1))).collect();
            let w0 = m.weight(0.0);
            for u in 0..n {
                for v in u + 1..n {
                    let e = Edge::new(u, v);
                    if cand.contains(&e) || c.exclude.contains(&e) {
                        continue;
                    }
                    let wh = m.weight(ps.dist(u, v) / 2.0);
                    if 4 * wh - 2 * w0 > slot_min[u] + slot_min[v] + price_tol() {
                        cand.insert(e);
                        added = true;
                    }
                }
            }
        }
        if !added {
            let chosen: Vec<Edge> = list.iter().zip(&used).filter(|(_, &u)| u).map(|(e, _)| *e).collect();
            let tf = TwoFactor::from_edges(n, &chosen)?;
            let len = tf.length(ps);
            return Ok((tf, len));
        }
    }
}

fn solve_gadget(ps: &PointSet, cand: &[Edge], include: &BTreeSet<Edge>) -> (CostMatching, Vec<bool>) {
    let n = ps.len();
    let nv = 2 * n + 2 * cand.len();
    let mut edges = Vec::with_capacity(5 * cand.len());
    let mut pre = Vec::with_capacity(cand.len());
    for (k, e) in cand.iter().enumerate() {
        let (a, b) = (2 * n + 2 * k, 2 * n + 2 * k + 1);
        let h = ps.dist(e.u, e.v) / 2.0;
        edges.push((2 * e.u, a, h));
        edges.push((2 * e.u + 1, a, h));
        edges.push((2 * e.v, b, h));
        edges.push((2 * e.v + 1, b, h));
        if !include.contains(e) {
            pre.push(edges.len());
            edges.push((a, b, 0.0));
        }
    }
    let m = CostMatching::solve(nv, &edges, &pre);
    let used = (0..cand.len()).map(|k| m.sol.mate(2 * n + 2 * k) != Some(2 * n + 2 * k + 1)).collect();
    (m, used)
}

/// Search statistics of the girth branch-and-bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GirthStats {
    pub nodes: usize,
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    c: Constraints,
    tf: TwoFactor,
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
    // Max-heap: smallest bound first, then deeper, then older.
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&o.depth))
            .then(o.seq.cmp(&self.seq))
    }
}

/// Children of a node whose 2-factor contains the short cycle `cycle`:
/// child `j` includes the first `j` cycle edges and excludes edge `j`.
/// Children whose constraints are contradictory are dropped.
pub fn cycle_children(c: &Constraints, cycle: &[usize], n: usize, girth: usize) -> Vec<Constraints> {
    let edges = cycle_edges(cycle);
    let mut out = Vec::with_capacity(edges.len());
    let mut inc = c.include.clone();
    for e in edges {
        let mut child = Constraints { include: inc.clone(), exclude: c.exclude.clone() };
        child.exclude.insert(e);
        if child.validate(n).is_ok() && child.forced_cycle_len(n).is_none_or(|l| l >= girth) {
            out.push(child);
        }
        inc.insert(e);
    }
    out
}

/// Minimum 2-factor whose cycles all have at least `g` vertices.
pub fn two_factor_girth(ps: &PointSet, g: usize, c: &Constraints) -> Result<(TwoFactor, f64)> {
    two_factor_girth_budget(ps, g, c, GIRTH_NODE_BUDGET).map(|(tf, l, _)| (tf, l))
}

pub fn two_factor_girth_budget(
    ps: &PointSet,
    g: usize,
    c: &Constraints,
    budget: usize,
) -> Result<(TwoFactor, f64, GirthStats)> {
    let n = ps.len();
    if n < g.max(3) {
        return Err(Error::Infeasible(format!("girth {g} exceeds {n} points")));
    }
    c.validate(n)?;
    let mut stats = GirthStats::default();
    let mut best: Option<(TwoFactor, f64)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut push = |heap: &mut BinaryHeap<Node>, c: Constraints, depth: usize, stats: &mut GirthStats| {
        stats.nodes += 1;
        if let Ok((tf, bound)) = two_factor(ps, &c) {
            seq += 1;
            heap.push(Node { bound, depth, seq, c, tf });
        }
    };
    if c.forced_cycle_len(n).is_none_or(|l| l >= g) {
        push(&mut heap, c.clone(), 0, &mut stats);
    }
    while let Some(node) = heap.pop() {
        if best.as_ref().is_some_and(|b| node.bound >= b.1 - 1e-12) {
            break;
        }
        let short = node.tf.cycles.iter().filter(|cy| cy.len() < g).min_by_key(|cy| cy.len());
        let Some(cycle) = short else {
            best = Some((node.tf, node.bound));
            continue;
        };
        if stats.nodes >= budget {
            let best_bound = node.bound;
            return Err(Error::BudgetExhausted { budget, best_bound });
        }
        for child in cycle_children(&node.c, cycle, n, g) {
            push(&mut heap, child, node.depth + 1, &mut stats);
        }
    }
    match best {
        Some((tf, l)) => Ok((tf, l, stats)),
        None => Err(Error::Infeasible("no 2-factor of the requested girth satisfies the constraints".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_uniform;
    use crate::oracles::{tsp_oracle, two_factor_oracle};

    fn square() -> PointSet {
        PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
    }

    fn far_triangles() -> PointSet {
        let h = 3f64.sqrt() / 2.0;
        PointSet::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h], vec![10.0, 0.0], vec![11.0, 0.0], vec![10.5, h]],
        )
        .unwrap()
    }

    #[test]
    fn triangle_and_square() {
        let t = PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]).unwrap();
        assert!((two_factor(&t, &Constraints::none()).unwrap().1 - 3.0).abs() < 1e-12);
        let c = Constraints::none().with_exclude(Edge::new(0, 1));
        let (tf, len) = two_factor(&square(), &c).unwrap();
        assert!(!tf.edges().contains(&Edge::new(0, 1)));
        assert!((len - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn constraint_errors() {
        let c = Constraints::none().with_include(Edge::new(0, 1)).with_include(Edge::new(0, 2)).with_include(Edge::new(0, 3));
        assert_eq!(two_factor(&square(), &c), Err(Error::DegreeViolation { vertex: 0, degree: 3 }));
        let c = Constraints::none().with_exclude(Edge::new(0, 1)).with_exclude(Edge::new(0, 2));
        assert!(matches!(two_factor(&square(), &c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn forced_edges_are_used() {
        let ps = far_triangles();
        let c = Constraints::none().with_include(Edge::new(2, 3));
        let (tf, len) = two_factor(&ps, &c).unwrap();
        assert!(tf.edges().contains(&Edge::new(2, 3)));
        assert_eq!(tf.cycles.len(), 1);
        assert!(len > 18.0);
    }

    #[test]
    fn girth_four_on_far_triangles() {
        let ps = far_triangles();
        let (tf, len) = two_factor_girth(&ps, 4, &Constraints::none()).unwrap();
        assert_eq!(tf.cycles.len(), 1);
        let (_, o) = two_factor_oracle(&ps, 4).unwrap();
        assert!((len - o).abs() < 1e-9);
        let (_, l3) = two_factor_girth(&ps, 3, &Constraints::none()).unwrap();
        assert!((l3 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_oracles() {
        for seed in 0..25 {
            let n = 5 + seed as usize % 6;
            let ps = generate_uniform(n, 2, 100 + seed).unwrap();
            for g in [3, 4, 5] {
                if g > n {
                    continue;
                }
                let (tf, len) = two_factor_girth(&ps, g, &Constraints::none()).unwrap();
                tf.validate(n, g).unwrap();
                let (_, o) = two_factor_oracle(&ps, g).unwrap();
                assert!((len - o).abs() < 1e-9, "seed {seed} g {g}: {len} vs {o}");
            }
            let (_, tour) = tsp_oracle(&ps).unwrap();
            let (_, hn) = two_factor_girth(&ps, n, &Constraints::none()).unwrap();
            assert!((hn - tour).abs() < 1e-9);
        }
    }

    #[test]
    fn sparse_candidates_match_complete_graph() {
        for seed in 0..3 {
            let ps = generate_uniform(60, 2, seed).unwrap();
            let (tf, len) = two_factor(&ps, &Constraints::none()).unwrap();
            tf.validate(60, 3).unwrap();
            let all: Vec<Edge> = (0..60).flat_map(|u| (u + 1..60).map(move |v| Edge::new(u, v))).collect();
            let (m, used) = solve_gadget(&ps, &all, &BTreeSet::new());
            assert!(m.sol.is_perfect());
            let full: f64 = all.iter().zip(&used).filter(|(_, &u)| u).map(|(e, _)| ps.dist(e.u, e.v)).sum();
            assert!((len - full).abs() < 1e-9, "{len} vs {full}");
        }
    }
}
