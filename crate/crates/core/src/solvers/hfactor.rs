use std::collections::HashMap;

use super::matching::min_matching;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::oracles::best_embedding;
use crate::structures::{HFactor, HGroup, Pattern};

pub const H_FACTOR_EXACT_MAX: usize = 30;
const STATE_BUDGET: usize = 2_000_000;

/// Minimum-length set of vertex-disjoint copies of `pattern`, covering
/// `floor(n/|H|)·|H|` points; the omitted points are chosen optimally in exact
/// mode. Returns the factor, its length and the exactness flag.
pub fn h_factor(ps: &PointSet, pattern: &Pattern) -> Result<(HFactor, f64, bool)> {
    let n = ps.len();
    let h = pattern.order;
    if n < h || h == 0 {
        return Err(Error::SizeOutOfRange { n, min: h.max(1), max: usize::MAX });
    }
    if h == 1 {
        let groups = (0..n).map(|v| HFactor::group_from_embedding(pattern, vec![v])).collect();
        return Ok((HFactor { pattern: pattern.clone(), groups }, 0.0, true));
    }
    if h == 2 && pattern.edges.len() == 1 {
        let (m, len) = min_matching(ps)?;
        let groups = m.edges.iter().map(|e| HFactor::group_from_embedding(pattern, vec![e.u, e.v])).collect();
        return Ok((HFactor { pattern: pattern.clone(), groups }, len, true));
    }
    if n <= H_FACTOR_EXACT_MAX {
        let mut s = Exact { ps, pattern, memo: HashMap::new(), groups: HashMap::new(), n, h };
        if let Some(total) = s.solve(0, (n % h) as u8) {
            let mut groups = Vec::new();
            let (mut mask, mut omit) = (0u32, (n % h) as u8);
            while mask.count_ones() as usize != n {
                let (_, choice) = s.memo[&(mask, omit)];
                if choice == 0 {
                    let v = (!mask).trailing_zeros();
                    mask |= 1 << v;
                    omit -= 1;
                } else {
                    groups.push(HFactor::group_from_embedding(pattern, s.groups[&choice].1.clone()));
                    mask |= choice;
                }
            }
            let f = HFactor { pattern: pattern.clone(), groups };
            let len = f.length(ps);
            debug_assert!((len - total).abs() < 1e-9);
            return Ok((f, len, true));
        }
    }
    let f = greedy(ps, pattern);
    let len = f.length(ps);
    Ok((f, len, false))
}

struct Exact<'a> {
    ps: &'a PointSet,
    pattern: &'a Pattern,
    memo: HashMap<(u32, u8), (f64, u32)>,
    groups: HashMap<u32, (f64, Vec<usize>)>,
    n: usize,
    h: usize,
}

impl Exact<'_> {
    /// Optimal cost for the vertices outside `mask`; `None` once the state
    /// budget is exhausted. The memo stores the chosen group mask, or 0 for
    /// omitting the lowest free vertex.
    fn solve(&mut self, mask: u32, omit: u8) -> Option<f64> {
        if mask.count_ones() as usize == self.n {
            return Some(0.0);
        }
        if let Some(&(c, _)) = self.memo.get(&(mask, omit)) {
            return Some(c);
        }
        if self.memo.len() >= STATE_BUDGET {
            return None;
        }
        let v = (!mask).trailing_zeros() as usize;
        let mut best = (f64::INFINITY, 0u32);
        if omit > 0 {
            best = (self.solve(mask | 1 << v, omit - 1)?, 0);
        }
        let free: Vec<usize> = (v + 1..self.n).filter(|&x| mask & (1 << x) == 0).collect();
        if free.len() + 1 >= self.h {
            let mut combos = Vec::new();
            combinations(&free, self.h - 1, &mut Vec::new(), &mut combos);
            for rest in combos {
                let mut g = 1u32 << v;
                rest.iter().for_each(|&x| g |= 1 << x);
                let gc = self.group_cost(g);
                if gc >= best.0 {
                    continue;
                }
                let c = gc + self.solve(mask | g, omit)?;
                if c < best.0 - 1e-12 {
                    best = (c, g);
                }
            }
        }
        self.memo.insert((mask, omit), best);
        Some(best.0)
    }

    fn group_cost(&mut self, g: u32) -> f64 {
        if let Some(x) = self.groups.get(&g) {
            return x.0;
        }
        let verts: Vec<usize> = (0..self.n).filter(|&x| g & (1 << x) != 0).collect();
        let (c, emb) = best_embedding(self.ps, self.pattern, &verts);
        self.groups.insert(g, (c, emb));
        c
    }
}

fn combinations(items: &[usize], k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    let need = k - cur.len();
    for i in 0..items.len() {
        if items.len() - i < need {
            break;
        }
        cur.push(items[i]);
        combinations(&items[i + 1..], k, cur, out);
        cur.pop();
    }
}

/// Sweeps points left to right; each free point takes the cheapest group
/// among its nearest free neighbors. Leftover points stay uncovered.
fn greedy(ps: &PointSet, pattern: &Pattern) -> HFactor {
    let n = ps.len();
    let h = pattern.order;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ps.point(a)[0].total_cmp(&ps.point(b)[0]).then(a.cmp(&b)));
    let mut used = vec![false; n];
    let mut left = n;
    let mut groups: Vec<HGroup> = Vec::new();
    for &v in &order {
        if used[v] || left < h {
            continue;
        }
        let mut near: Vec<usize> = (0..n).filter(|&x| x != v && !used[x]).collect();
        near.sort_by(|&a, &b| ps.dist(v, a).total_cmp(&ps.dist(v, b)).then(a.cmp(&b)));
        near.truncate(2 * h);
        let mut combos = Vec::new();
        combinations(&near, h - 1, &mut Vec::new(), &mut combos);
        let mut best: Option<(f64, Vec<usize>)> = None;
        for rest in combos {
            let mut verts = vec![v];
            verts.extend(rest);
            let (c, emb) = best_embedding(ps, pattern, &verts);
            if best.as_ref().is_none_or(|b| c < b.0) {
                best = Some((c, emb));
            }
        }
        let (_, emb) = best.expect("enough free points");
        for &x in &emb {
            used[x] = true;
        }
        left -= h;
        groups.push(HFactor::group_from_embedding(pattern, emb));
    }
    HFactor { pattern: pattern.clone(), groups }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_uniform;
    use crate::oracles::h_factor_oracle;

    #[test]
    fn k2_equals_matching() {
        let ps = generate_uniform(11, 2, 4).unwrap();
        let (f, len, exact) = h_factor(&ps, &Pattern::single_edge()).unwrap();
        assert!(exact);
        f.validate(11).unwrap();
        assert_eq!(len, min_matching(&ps).unwrap().1);
    }

    #[test]
    fn star_on_four_points_picks_best_center() {
        let ps = PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![-0.5, 0.8], vec![3.0, 3.0]]).unwrap();
        let (f, len, _) = h_factor(&ps, &Pattern::star(3)).unwrap();
        let best = (0..4)
            .map(|c| (0..4).filter(|&x| x != c).map(|x| ps.dist(c, x)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        assert!((len - best).abs() < 1e-12);
        assert_eq!(f.groups.len(), 1);
    }

    #[test]
    fn matches_oracle() {
        for seed in 0..20 {
            let ps = generate_uniform(9, 2, 900 + seed).unwrap();
            for p in [Pattern::triangle(), Pattern::path(3), Pattern::star(3), Pattern::path(4)] {
                let (f, len, exact) = h_factor(&ps, &p).unwrap();
                assert!(exact);
                f.validate(9).unwrap();
                let (_, o) = h_factor_oracle(&ps, &p).unwrap();
                assert!((len - o).abs() < 1e-9, "seed {seed} {}", p.name());
            }
        }
    }

    #[test]
    fn greedy_is_valid() {
        let ps = generate_uniform(50, 2, 1).unwrap();
        let (f, _, exact) = h_factor(&ps, &Pattern::triangle()).unwrap();
        assert!(!exact);
        f.validate(50).unwrap();
        assert_eq!(f.covered(), 48);
    }
}
