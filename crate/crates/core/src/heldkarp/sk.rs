use std::f64::consts::PI;

use super::FractionalSolution;
use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};

const INNER_RADIUS: f64 = 1.0;
const OUTER_RADIUS: f64 = 4.0;
const GAP_X: f64 = 2.0;
const ENTRY_OFFSET: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkKind {
    OnePass,
    TwoPass,
}

/// The ring configuration with a fractional solution threading it.
///
/// Vertices `0..k` lie on the inner circle, `k..3k` on the outer circle,
/// `3k` and `3k+1` are the gap points `(2,0)` and `(-2,0)`, and the entry
/// points follow.
#[derive(Debug, Clone)]
pub struct SkConstruction {
    pub k: usize,
    pub points: PointSet,
    pub solution: FractionalSolution,
    pub entries: Vec<usize>,
}

impl SkConstruction {
    pub fn ring_size(&self) -> usize {
        3 * self.k + 2
    }

    /// Cost of the edges with both ends on the ring.
    pub fn internal_cost(&self) -> f64 {
        let r = self.ring_size();
        self.solution.iter().filter(|(e, _)| e.v < r).map(|(e, w)| w * self.points.dist(e.u, e.v)).sum()
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 12 || k % 4 != 0 {
        return Err(Error::InvalidInput(format!("k = {k} must be at least 12 and divisible by 4")));
    }
    Ok(())
}

fn outer_angle(k: usize, j: usize) -> f64 {
    PI * (j as f64 + 0.5) / k as f64
}

fn ring_points(k: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(3 * k + 2);
    for j in 0..k {
        let a = 2.0 * PI * (j as f64 + 0.5) / k as f64;
        pts.push(vec![INNER_RADIUS * a.cos(), INNER_RADIUS * a.sin()]);
    }
    for j in 0..2 * k {
        let a = outer_angle(k, j);
        pts.push(vec![OUTER_RADIUS * a.cos(), OUTER_RADIUS * a.sin()]);
    }
    pts.push(vec![GAP_X, 0.0]);
    pts.push(vec![-GAP_X, 0.0]);
    pts
}

/// Inner circle of `k` points at radius 1, outer circle of `2k` points at
/// radius 4, and the two gap points `(±2,0)`.
pub fn build_sk(k: usize) -> Result<PointSet> {
    check_k(k)?;
    PointSet::new(2, ring_points(k))
}

/// Default outer-circle positions of the entry anchors.
pub fn default_anchors(k: usize, kind: SkKind) -> Vec<usize> {
    match kind {
        SkKind::OnePass => vec![k / 2, 3 * k / 2],
        SkKind::TwoPass => vec![k / 4, 3 * k / 4, 5 * k / 4, 7 * k / 4],
    }
}

pub fn build_sk_fractional(k: usize, kind: SkKind) -> Result<SkConstruction> {
    build_sk_with_anchors(k, &default_anchors(k, kind))
}

/// Builds the fractional solution with one entry point per anchor. Anchors
/// are outer-circle positions in `0..2k`, taken in pairs: each pair is one
/// pass of the outside tour through the ring.
pub fn build_sk_with_anchors(k: usize, anchors: &[usize]) -> Result<SkConstruction> {
    check_k(k)?;
    if anchors.len() != 2 && anchors.len() != 4 {
        return Err(Error::InvalidInput(format!("expected 2 or 4 anchors, got {}", anchors.len())));
    }
    let m = 2 * k;
    let outer = |j: usize| k + j % m;
    let (g1, g2) = (3 * k, 3 * k + 1);
    let mut claimed = vec![false; m];
    // Outer neighbors of the gap points: positions 2k-1,0 and k-1,k.
    for j in [m - 1, 0, k - 1, k] {
        claimed[j] = true;
    }
    for &a in anchors {
        if a >= m {
            return Err(Error::InvalidInput(format!("anchor {a} outside 0..{m}")));
        }
        for j in [a + m - 1, a, a + 1] {
            if claimed[j % m] {
                return Err(Error::InvalidInput(format!("anchor {a} overlaps another named point")));
            }
            claimed[j % m] = true;
        }
    }
    let mut pts = ring_points(k);
    let first_entry = pts.len();
    for &a in anchors {
        let ang = outer_angle(k, a);
        let r = OUTER_RADIUS + ENTRY_OFFSET;
        pts.push(vec![r * ang.cos(), r * ang.sin()]);
    }
    let n = pts.len();
    let mut sol = FractionalSolution::new(n);
    let triangle = |sol: &mut FractionalSolution, a: usize, b: usize, c: usize| {
        for e in [Edge::new(a, b), Edge::new(b, c), Edge::new(a, c)] {
            sol.set(e, 0.5);
        }
    };
    triangle(&mut sol, outer(m - 1), outer(0), g1);
    triangle(&mut sol, outer(k - 1), outer(k), g2);
    triangle(&mut sol, k - 1, 0, g1);
    triangle(&mut sol, k / 2 - 1, k / 2, g2);
    for (i, &a) in anchors.iter().enumerate() {
        triangle(&mut sol, outer(a + m - 1), outer(a), outer(a + 1));
        sol.set(Edge::new(outer(a), first_entry + i), 1.0);
    }
    for j in 0..m {
        let e = Edge::new(outer(j), outer(j + 1));
        if sol.get(e) == 0.0 {
            sol.set(e, 1.0);
        }
    }
    for j in 0..k {
        let e = Edge::new(j, (j + 1) % k);
        if sol.get(e) == 0.0 {
            sol.set(e, 1.0);
        }
    }
    let passes = anchors.len() / 2;
    for p in 0..passes {
        let leave = first_entry + 2 * p + 1;
        let next = first_entry + (2 * p + 2) % anchors.len();
        sol.add(Edge::new(leave, next), 1.0);
    }
    Ok(SkConstruction { k, points: PointSet::new(2, pts)?, solution: sol, entries: (first_entry..n).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heldkarp::hk_feasible;

    #[test]
    fn point_layout() {
        let ps = build_sk(12).unwrap();
        assert_eq!(ps.len(), 38);
        for j in 0..12 {
            let p = ps.point(j);
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
        for j in 12..36 {
            let p = ps.point(j);
            assert!((p[0].hypot(p[1]) - 4.0).abs() < 1e-12);
        }
        assert_eq!(ps.point(36), &[2.0, 0.0]);
        assert_eq!(ps.point(37), &[-2.0, 0.0]);
        assert!(build_sk(10).is_err());
        assert!(build_sk(14).is_err());
    }

    #[test]
    fn gap_neighbors_are_nearest() {
        let k = 16;
        let ps = build_sk(k).unwrap();
        let g1 = 3 * k;
        let mut inner: Vec<usize> = (0..k).collect();
        inner.sort_by(|&a, &b| ps.dist(g1, a).total_cmp(&ps.dist(g1, b)));
        let mut two = inner[..2].to_vec();
        two.sort();
        assert_eq!(two, vec![0, k - 1]);
        let g2 = 3 * k + 1;
        inner.sort_by(|&a, &b| ps.dist(g2, a).total_cmp(&ps.dist(g2, b)));
        let mut two = inner[..2].to_vec();
        two.sort();
        assert_eq!(two, vec![k / 2 - 1, k / 2]);
    }

    #[test]
    fn both_kinds_are_feasible() {
        for k in [12, 16, 24, 48] {
            for kind in [SkKind::OnePass, SkKind::TwoPass] {
                let c = build_sk_fractional(k, kind).unwrap();
                hk_feasible(&c.solution).unwrap_or_else(|v| panic!("k={k} {kind:?}: {v}"));
                assert!(!c.solution.is_integral(1e-9));
            }
        }
    }

    #[test]
    fn internal_cost_near_limit() {
        let c = build_sk_fractional(48, SkKind::OnePass).unwrap();
        let target = 10.0 * PI + 6.0;
        assert!((c.internal_cost() - target).abs() <= 0.5, "{}", c.internal_cost());
        let big = build_sk_fractional(400, SkKind::OnePass).unwrap();
        assert!((big.internal_cost() - target).abs() < (c.internal_cost() - target).abs());
    }

    #[test]
    fn malformed_anchors() {
        assert!(build_sk_with_anchors(12, &[6]).is_err());
        assert!(build_sk_with_anchors(12, &[6, 7]).is_err());
        assert!(build_sk_with_anchors(12, &[0, 6]).is_err());
        assert!(build_sk_with_anchors(12, &[6, 30]).is_err());
        assert!(build_sk_with_anchors(12, &[5, 17]).is_ok());
    }

    fn min_st_cut(sol: &FractionalSolution, s: usize, t: usize) -> f64 {
        let n = sol.n;
        let mut cap = sol.dense();
        let mut flow = 0.0;
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in 0..n {
                    if prev[v] == usize::MAX && cap[u * n + v] > 1e-12 {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return flow;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                push = push.min(cap[prev[v] * n + v]);
                v = prev[v];
            }
            let mut v = t;
            while v != s {
                cap[prev[v] * n + v] -= push;
                cap[v * n + prev[v]] += push;
                v = prev[v];
            }
            flow += push;
        }
    }

    #[test]
    fn no_light_cut_splits_a_half_edge() {
        for kind in [SkKind::OnePass, SkKind::TwoPass] {
            let c = build_sk_fractional(12, kind).unwrap();
            for (e, w) in c.solution.iter() {
                if (w - 0.5).abs() < 1e-12 {
                    assert!(min_st_cut(&c.solution, e.u, e.v) >= 2.0 - 1e-9, "{e:?}");
                }
            }
        }
    }
}
