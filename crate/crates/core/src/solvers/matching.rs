use std::collections::HashSet;

use super::blossom::{max_weight_matching, MatchingSolution};
use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};
use crate::structures::Matching;

/// Integer resolution of scaled weights: the largest weight maps to `2^42`.
const WEIGHT_RANGE: f64 = 4_398_046_511_104.0;
/// Slack (in doubled integer units) below which a missing pair is priced in.
const PRICE_TOL: i64 = 4;
/// Instances up to this size use the complete graph directly.
const COMPLETE_BELOW: usize = 80;
const CANDIDATE_NEIGHBORS: usize = 10;

/// A minimum-cost perfect matching obtained through the max-weight engine on
/// weights `top - cost`, scaled to integers.
pub(crate) struct CostMatching {
    pub sol: MatchingSolution,
    top: f64,
    scale: f64,
}

impl CostMatching {
    pub fn solve(nv: usize, edges: &[(usize, usize, f64)], prematched: &[usize]) -> Self {
        let top = edges.iter().map(|e| e.2).fold(0.0, f64::max);
        let scale = if top > 0.0 { WEIGHT_RANGE / top } else { 1.0 };
        let ints: Vec<(usize, usize, i64)> =
            edges.iter().map(|&(i, j, c)| (i, j, scaled_weight(top, scale, c))).collect();
        CostMatching { sol: max_weight_matching(nv, &ints, true, prematched), top, scale }
    }

    pub fn weight(&self, cost: f64) -> i64 {
        scaled_weight(self.top, self.scale, cost)
    }

    pub fn violates(&self, i: usize, j: usize, cost: f64) -> bool {
        self.sol.slack(i, j, self.weight(cost)) < -PRICE_TOL
    }
}

fn scaled_weight(top: f64, scale: f64, cost: f64) -> i64 {
    ((top - cost) * scale).round() as i64
}

pub(crate) fn price_tol() -> i64 {
    PRICE_TOL
}

/// Minimum-length matching of `floor(n/2)` edges. For odd `n` the omitted
/// vertex is chosen optimally through a zero-cost dummy partner.
pub fn min_matching(ps: &PointSet) -> Result<(Matching, f64)> {
    let n = ps.len();
    if n < 2 {
        return Err(Error::SizeOutOfRange { n, min: 2, max: usize::MAX });
    }
    let odd = n % 2 == 1;
    let nv = n + odd as usize;
    let mut cand: HashSet<Edge> = HashSet::new();
    if n <= COMPLETE_BELOW {
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
    }
    let mut complete = n <= COMPLETE_BELOW;
    loop {
        let mut list: Vec<Edge> = cand.iter().copied().collect();
        list.sort_unstable();
        let mut edges: Vec<(usize, usize, f64)> = list.iter().map(|e| (e.u, e.v, ps.dist(e.u, e.v))).collect();
        if odd {
            edges.extend((0..n).map(|v| (v, n, 0.0)));
        }
        let m = CostMatching::solve(nv, &edges, &[]);
        if !m.sol.is_perfect() {
            if complete {
                return Err(Error::Infeasible("no perfect matching".into()));
            }
            complete = true;
            for u in 0..n {
                for v in u + 1..n {
                    cand.insert(Edge::new(u, v));
                }
            }
            continue;
        }
        let mut added = false;
        if !complete {
            for u in 0..n {
                for v in u + 1..n {
                    let e = Edge::new(u, v);
                    if !cand.contains(&e) && m.violates(u, v, ps.dist(u, v)) {
                        cand.insert(e);
                        added = true;
                    }
                }
            }
        }
        if !added {
            let mut out = Vec::with_capacity(n / 2);
            for u in 0..n {
                if let Some(v) = m.sol.mate(u) {
                    if u < v && v < n {
                        out.push(Edge::new(u, v));
                    }
                }
            }
            out.sort_unstable();
            let len = out.iter().map(|e| ps.dist(e.u, e.v)).sum();
            return Ok((Matching { edges: out }, len));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_uniform;
    use crate::oracles::matching_oracle;

    #[test]
    fn two_points_and_square() {
        let ps = PointSet::new(2, vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(min_matching(&ps).unwrap().1, 5.0);
        let sq = PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!((min_matching(&sq).unwrap().1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn odd_count_omits_best_vertex() {
        let ps = PointSet::new(1, vec![vec![0.0], vec![1.0], vec![10.0]]).unwrap();
        let (m, len) = min_matching(&ps).unwrap();
        assert_eq!(m.edges, vec![Edge::new(0, 1)]);
        assert_eq!(len, 1.0);
    }

    #[test]
    fn agrees_with_oracle() {
        for seed in 0..40 {
            let n = 4 + (seed as usize % 9);
            let ps = generate_uniform(n, 2, seed).unwrap();
            let (m, len) = min_matching(&ps).unwrap();
            m.validate(n).unwrap();
            if n % 2 == 0 {
                let (_, o) = matching_oracle(&ps).unwrap();
                assert!((len - o).abs() < 1e-9, "seed {seed}");
            }
        }
    }

    #[test]
    fn sparse_candidates_agree_with_complete_graph() {
        for seed in 0..4 {
            let ps = generate_uniform(161, 2, seed).unwrap();
            let (m, len) = min_matching(&ps).unwrap();
            m.validate(161).unwrap();
            let mut edges = Vec::new();
            for u in 0..161 {
                for v in u + 1..161 {
                    edges.push((u, v, ps.dist(u, v)));
                }
                edges.push((u, 161, 0.0));
            }
            let full = CostMatching::solve(162, &edges, &[]);
            let flen: f64 = (0..161)
                .filter_map(|u| full.sol.mate(u).filter(|&v| v > u && v < 161).map(|v| ps.dist(u, v)))
                .sum();
            assert!((len - flen).abs() < 1e-9, "seed {seed}: {len} vs {flen}");
        }
    }
}
