//! Brute-force exact solvers for tiny instances.
//!
//! These are the ground truth for the production solvers. Size caps are hard
//! errors so a test can never silently fall back to a heuristic. Where two
//! optimal structures tie within `1e-12`, enumeration oracles keep the one
//! with the lexicographically smallest sorted edge list.

use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};
use crate::heldkarp::{CutCertificate, FractionalSolution};
use crate::structures::{HFactor, Matching, Pattern, SpanningTree, Tour, TwoFactor};

const TIE_TOL: f64 = 1e-12;

fn size_check(n: usize, min: usize, max: usize) -> Result<()> {
    if n < min || n > max {
        Err(Error::SizeOutOfRange { n, min, max })
    } else {
        Ok(())
    }
}

/// True when `(la, ea)` should replace the incumbent `(lb, eb)`.
fn better(la: f64, ea: &[Edge], lb: f64, eb: &[Edge]) -> bool {
    if la < lb - TIE_TOL {
        true
    } else if la > lb + TIE_TOL {
        false
    } else {
        ea < eb
    }
}

fn sorted(mut e: Vec<Edge>) -> Vec<Edge> {
    e.sort();
    e
}

/// Optimal tour by the Held-Karp bitmask dynamic program, `3 <= n <= 18`.
pub fn tsp_oracle(ps: &PointSet) -> Result<(Tour, f64)> {
    let n = ps.len();
    size_check(n, 3, 18)?;
    let d = ps.distance_matrix();
    let m = n - 1;
    let full = 1usize << m;
    let mut dp = vec![f64::INFINITY; full * m];
    let mut parent = vec![u8::MAX; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = d[j + 1];
    }
    for mask in 1..full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * m + j];
            if !cur.is_finite() {
                continue;
            }
            for k in 0..m {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let nm = mask | (1 << k);
                let cand = cur + d[(j + 1) * n + k + 1];
                if cand < dp[nm * m + k] {
                    dp[nm * m + k] = cand;
                    parent[nm * m + k] = j as u8;
                }
            }
        }
    }
    let last_mask = full - 1;
    let mut best = (f64::INFINITY, 0);
    for j in 0..m {
        let c = dp[last_mask * m + j] + d[j + 1];
        if c < best.0 {
            best = (c, j);
        }
    }
    let mut order = Vec::with_capacity(n);
    let (mut mask, mut j) = (last_mask, best.1);
    loop {
        order.push(j + 1);
        let p = parent[mask * m + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.push(0);
    order.reverse();
    let tour = Tour::new(order).canonical();
    let len = tour.length(ps);
    Ok((tour, len))
}

/// Optimal tour by enumerating permutations, `3 <= n <= 10`.
pub fn tsp_enumerate(ps: &PointSet) -> Result<(Tour, f64)> {
    let n = ps.len();
    size_check(n, 3, 10)?;
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best: Option<(f64, Vec<Edge>, Tour)> = None;
    permute(&mut rest, 0, &mut |perm| {
        if perm[0] > perm[perm.len() - 1] {
            return;
        }
        let mut order = Vec::with_capacity(n);
        order.push(0);
        order.extend_from_slice(perm);
        let t = Tour::new(order);
        let len = t.length(ps);
        let replace = match &best {
            None => true,
            Some((bl, be, _)) => {
                len < bl - TIE_TOL || (len <= bl + TIE_TOL && &sorted(t.edges()) < be)
            }
        };
        if replace {
            best = Some((len, sorted(t.edges()), t));
        }
    });
    let (_, _, t) = best.expect("n >= 3 has a tour");
    let t = t.canonical();
    let len = t.length(ps);
    Ok((t, len))
}

fn permute(v: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Minimum perfect matching by enumeration, even `n <= 12`.
pub fn matching_oracle(ps: &PointSet) -> Result<(Matching, f64)> {
    let n = ps.len();
    size_check(n, 0, 12)?;
    if n % 2 == 1 {
        return Err(Error::InvalidInput(format!("perfect matching needs even n, got {n}")));
    }
    let mut best: Option<(f64, Vec<Edge>)> = None;
    let mut cur = Vec::with_capacity(n / 2);
    fn rec(ps: &PointSet, free: u32, cur: &mut Vec<Edge>, acc: f64, best: &mut Option<(f64, Vec<Edge>)>) {
        if free == 0 {
            let e = sorted(cur.clone());
            if best.as_ref().is_none_or(|(bl, be)| better(acc, &e, *bl, be)) {
                *best = Some((acc, e));
            }
            return;
        }
        let i = free.trailing_zeros() as usize;
        let rest = free & !(1 << i);
        let mut r = rest;
        while r != 0 {
            let j = r.trailing_zeros() as usize;
            r &= r - 1;
            cur.push(Edge::new(i, j));
            rec(ps, rest & !(1 << j), cur, acc + ps.dist(i, j), best);
            cur.pop();
        }
    }
    rec(ps, ((1u64 << n) - 1) as u32, &mut cur, 0.0, &mut best);
    let (_, edges) = best.expect("even n has a perfect matching");
    let m = Matching { edges };
    let len = m.length(ps);
    Ok((m, len))
}

/// Minimum 2-factor whose cycles all have length at least `max(g,3)`,
/// by dynamic programming over vertex subsets, `n <= 10`.
pub fn two_factor_oracle(ps: &PointSet, g: usize) -> Result<(TwoFactor, f64)> {
    let n = ps.len();
    size_check(n, 3, 10)?;
    let g = g.max(3);
    if g > n {
        return Err(Error::Infeasible(format!("no cycle partition of {n} points with girth {g}")));
    }
    let full = 1usize << n;
    // path[S][j]: shortest path from lowest(S) through all of S ending at j.
    let mut path = vec![f64::INFINITY; full * n];
    let mut par = vec![usize::MAX; full * n];
    for s in 0..n {
        for j in s + 1..n {
            path[((1 << s) | (1 << j)) * n + j] = ps.dist(s, j);
        }
    }
    let mut cyc = vec![f64::INFINITY; full];
    let mut cyc_end = vec![usize::MAX; full];
    for mask in 1..full {
        let cnt = mask.count_ones() as usize;
        if cnt < 2 {
            continue;
        }
        let s = mask.trailing_zeros() as usize;
        if cnt >= 3 {
            for j in s + 1..n {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let prev = mask & !(1 << j);
                let mut best = f64::INFINITY;
                let mut arg = usize::MAX;
                for i in s + 1..n {
                    if prev & (1 << i) == 0 {
                        continue;
                    }
                    let c = path[prev * n + i] + ps.dist(i, j);
                    if c < best {
                        best = c;
                        arg = i;
                    }
                }
                path[mask * n + j] = best;
                par[mask * n + j] = arg;
            }
            if cnt >= g {
                for j in s + 1..n {
                    if mask & (1 << j) != 0 {
                        let c = path[mask * n + j] + ps.dist(j, s);
                        if c < cyc[mask] {
                            cyc[mask] = c;
                            cyc_end[mask] = j;
                        }
                    }
                }
            }
        }
    }
    let mut part = vec![f64::INFINITY; full];
    let mut choice = vec![0usize; full];
    part[0] = 0.0;
    for mask in 1..full {
        let low = mask & mask.wrapping_neg();
        let rest = mask & !low;
        // Enumerate subsets C of `mask` containing the lowest vertex.
        let mut sub = rest;
        loop {
            let c = sub | low;
            if cyc[c].is_finite() && part[mask & !c].is_finite() {
                let v = cyc[c] + part[mask & !c];
                if v < part[mask] {
                    part[mask] = v;
                    choice[mask] = c;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    if !part[full - 1].is_finite() {
        return Err(Error::Infeasible(format!("no cycle partition with girth {g}")));
    }
    let mut cycles = Vec::new();
    let mut mask = full - 1;
    while mask != 0 {
        let c = choice[mask];
        let s = c.trailing_zeros() as usize;
        let mut order = Vec::new();
        let (mut m, mut j) = (c, cyc_end[c]);
        while j != usize::MAX && j != s {
            order.push(j);
            let p = par[m * n + j];
            m &= !(1 << j);
            j = if p == usize::MAX { s } else { p };
        }
        order.push(s);
        order.reverse();
        cycles.push(order);
        mask &= !c;
    }
    let f = TwoFactor { cycles };
    let len = f.length(ps);
    Ok((f, len))
}

/// Minimum spanning tree with maximum degree `k`, by enumerating all labeled
/// trees through Prüfer sequences, `n <= 8`.
pub fn mst_k_oracle(ps: &PointSet, k: usize) -> Result<(SpanningTree, f64)> {
    let n = ps.len();
    size_check(n, 1, 8)?;
    if k < 1 || (k < 2 && n > 2) {
        return Err(Error::Infeasible(format!("no spanning tree on {n} points with max degree {k}")));
    }
    if n <= 2 {
        let edges = if n == 2 { vec![Edge::new(0, 1)] } else { vec![] };
        let t = SpanningTree { edges };
        let len = t.length(ps);
        return Ok((t, len));
    }
    let len_seq = n - 2;
    let total = n.pow(len_seq as u32);
    let mut seq = vec![0usize; len_seq];
    let mut best: Option<(f64, Vec<Edge>)> = None;
    let mut deg = vec![0usize; n];
    for code in 0..total {
        let mut c = code;
        for s in seq.iter_mut() {
            *s = c % n;
            c /= n;
        }
        deg.iter_mut().for_each(|d| *d = 1);
        for &s in &seq {
            deg[s] += 1;
        }
        if deg.iter().any(|&d| d > k) {
            continue;
        }
        let edges = sorted(prufer_decode(&seq, n));
        let len: f64 = edges.iter().map(|e| ps.dist(e.u, e.v)).sum();
        if best.as_ref().is_none_or(|(bl, be)| better(len, &edges, *bl, be)) {
            best = Some((len, edges));
        }
    }
    let (_, edges) = best.expect("k >= 2 always admits a path");
    let t = SpanningTree { edges };
    let len = t.length(ps);
    Ok((t, len))
}

fn prufer_decode(seq: &[usize], n: usize) -> Vec<Edge> {
    let mut deg = vec![1usize; n];
    for &s in seq {
        deg[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&v| deg[v] == 1).expect("a leaf exists");
        edges.push(Edge::new(leaf, s));
        deg[leaf] -= 1;
        deg[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    edges.push(Edge::new(rest[0], rest[1]));
    edges
}

/// Cheapest embedding of `pattern` onto the vertex set `verts`; returns the
/// cost and `vertices` ordered so that `vertices[i]` hosts pattern vertex `i`.
pub fn best_embedding(ps: &PointSet, pattern: &Pattern, verts: &[usize]) -> (f64, Vec<usize>) {
    let mut perm = verts.to_vec();
    let mut best = (f64::INFINITY, Vec::new(), perm.clone());
    permute(&mut perm, 0, &mut |p| {
        let c: f64 = pattern.edges.iter().map(|&(a, b)| ps.dist(p[a], p[b])).sum();
        let e = sorted(pattern.edges.iter().map(|&(a, b)| Edge::new(p[a], p[b])).collect());
        if best.1.is_empty() || better(c, &e, best.0, &best.1) {
            best = (c, e, p.to_vec());
        }
    });
    (best.0, best.2)
}

/// Minimum H-factor by enumerating groupings and embeddings, `n <= 9`,
/// `|H| <= 4`. Covers `floor(n/|H|)·|H|` points.
pub fn h_factor_oracle(ps: &PointSet, pattern: &Pattern) -> Result<(HFactor, f64)> {
    let n = ps.len();
    size_check(n, 0, 9)?;
    let h = pattern.order;
    if h > 4 {
        return Err(Error::SizeOutOfRange { n: h, min: 1, max: 4 });
    }
    let omit = if h <= n { n % h } else { n };
    let full = 1usize << n;
    let mut group_cost = vec![f64::INFINITY; full];
    let mut group_emb: Vec<Vec<usize>> = vec![Vec::new(); full];
    for mask in 0..full {
        if mask.count_ones() as usize == h {
            let verts: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            let (c, emb) = best_embedding(ps, pattern, &verts);
            group_cost[mask] = c;
            group_emb[mask] = emb;
        }
    }
    // f[(mask, r)]: best cost to handle `mask` with `r` omissions left.
    let mut memo = vec![None::<(f64, usize)>; full * (omit + 1)];
    fn solve(
        mask: usize,
        r: usize,
        n: usize,
        h: usize,
        omit: usize,
        cost: &[f64],
        memo: &mut Vec<Option<(f64, usize)>>,
    ) -> f64 {
        if mask == 0 {
            return if r == 0 { 0.0 } else { f64::INFINITY };
        }
        if let Some((v, _)) = memo[mask * (omit + 1) + r] {
            return v;
        }
        let low = mask.trailing_zeros() as usize;
        let mut best = (f64::INFINITY, usize::MAX);
        if r > 0 {
            let v = solve(mask & !(1 << low), r - 1, n, h, omit, cost, memo);
            if v < best.0 {
                best = (v, 0);
            }
        }
        let rest = mask & !(1 << low);
        let mut sub = rest;
        loop {
            if (sub.count_ones() as usize) + 1 == h {
                let g = sub | (1 << low);
                let v = cost[g] + solve(mask & !g, r, n, h, omit, cost, memo);
                if v < best.0 {
                    best = (v, g);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        memo[mask * (omit + 1) + r] = Some(best);
        best.0
    }
    let total = solve(full - 1, omit, n, h, omit, &group_cost, &mut memo);
    if !total.is_finite() {
        return Err(Error::Infeasible("no H-factor".into()));
    }
    let mut groups = Vec::new();
    let (mut mask, mut r) = (full - 1, omit);
    while mask != 0 {
        let (_, g) = memo[mask * (omit + 1) + r].expect("memoized");
        if g == 0 {
            mask &= !(1 << mask.trailing_zeros());
            r -= 1;
        } else {
            groups.push(HFactor::group_from_embedding(pattern, group_emb[g].clone()));
            mask &= !g;
        }
    }
    let f = HFactor { pattern: pattern.clone(), groups };
    let len = f.length(ps);
    Ok((f, len))
}

/// Global minimum cut by enumerating subsets, `n <= 10`. The returned subset
/// always contains vertex 0.
pub fn min_cut_oracle(weights: &FractionalSolution, n: usize) -> Result<CutCertificate> {
    size_check(n, 2, 10)?;
    let mut best: Option<CutCertificate> = None;
    let mut inside = vec![false; n];
    for mask in 0..(1usize << (n - 1)) {
        let s = (mask << 1) | 1;
        if s == (1 << n) - 1 {
            continue;
        }
        for (v, flag) in inside.iter_mut().enumerate() {
            *flag = s & (1 << v) != 0;
        }
        let w = weights.crossing_weight(&inside);
        if best.as_ref().is_none_or(|b| w < b.crossing_weight - TIE_TOL) {
            best = Some(CutCertificate { subset: (0..n).filter(|&v| inside[v]).collect(), crossing_weight: w });
        }
    }
    Ok(best.expect("n >= 2 has a cut"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_uniform;

    fn pts(v: &[[f64; 2]]) -> PointSet {
        PointSet::new(2, v.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    fn square() -> PointSet {
        pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    fn line4() -> PointSet {
        pts(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
    }

    fn triangle() -> PointSet {
        pts(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]])
    }

    #[test]
    fn tsp_small_cases() {
        assert!((tsp_oracle(&triangle()).unwrap().1 - 3.0).abs() < 1e-12);
        let (t, l) = tsp_oracle(&square()).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
        t.validate(4).unwrap();
        assert!((tsp_oracle(&line4()).unwrap().1 - 6.0).abs() < 1e-12);
        assert!((tsp_enumerate(&line4()).unwrap().1 - 6.0).abs() < 1e-12);
        assert!(tsp_oracle(&pts(&[[0.0, 0.0], [1.0, 0.0]])).is_err());
        assert!(tsp_enumerate(&generate_uniform(11, 2, 1).unwrap()).is_err());
    }

    #[test]
    fn tsp_dp_equals_enumeration() {
        for seed in 0..30 {
            let ps = generate_uniform(3 + (seed as usize % 6), 2, seed).unwrap();
            let (ta, la) = tsp_oracle(&ps).unwrap();
            let (tb, lb) = tsp_enumerate(&ps).unwrap();
            assert_eq!(ta, tb);
            assert_eq!(la, lb);
        }
    }

    #[test]
    fn matching_small_cases() {
        let two = pts(&[[0.0, 0.0], [3.0, 4.0]]);
        assert_eq!(matching_oracle(&two).unwrap().1, 5.0);
        assert!((matching_oracle(&square()).unwrap().1 - 2.0).abs() < 1e-12);
        let (m, l) = matching_oracle(&line4()).unwrap();
        assert!((l - 2.0).abs() < 1e-12);
        assert_eq!(m.edges, vec![Edge::new(0, 1), Edge::new(2, 3)]);
        assert!(matching_oracle(&triangle()).is_err());
    }

    #[test]
    fn two_factor_small_cases() {
        assert!((two_factor_oracle(&triangle(), 3).unwrap().1 - 3.0).abs() < 1e-12);
        let (f, l) = two_factor_oracle(&square(), 3).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
        assert_eq!(f.cycles.len(), 1);
        let h = 3f64.sqrt() / 2.0;
        let two = pts(&[[0.0, 0.0], [1.0, 0.0], [0.5, h], [100.0, 0.0], [101.0, 0.0], [100.5, h]]);
        let (f, l) = two_factor_oracle(&two, 3).unwrap();
        assert!((l - 6.0).abs() < 1e-9);
        f.validate(6, 3).unwrap();
        assert!(two_factor_oracle(&square(), 5).is_err());
    }

    #[test]
    fn mst_k_small_cases() {
        let (t, l) = mst_k_oracle(&line4(), 2).unwrap();
        assert!((l - 3.0).abs() < 1e-12);
        t.validate(4, Some(2)).unwrap();
        let star = pts(&[[0.0, 0.0], [1.0, 0.0], [-0.5, 0.8660254037844386], [-0.5, -0.8660254037844386]]);
        assert!((mst_k_oracle(&star, 3).unwrap().1 - 3.0).abs() < 1e-9);
        assert!((mst_k_oracle(&square(), 2).unwrap().1 - 3.0).abs() < 1e-12);
        assert!(mst_k_oracle(&generate_uniform(9, 2, 0).unwrap(), 3).is_err());
    }

    #[test]
    fn h_factor_small_cases() {
        let ps = generate_uniform(8, 2, 3).unwrap();
        let (_, mm) = matching_oracle(&ps).unwrap();
        let (f, hf) = h_factor_oracle(&ps, &Pattern::single_edge()).unwrap();
        f.validate(8).unwrap();
        assert!((mm - hf).abs() < 1e-12);
        assert!((h_factor_oracle(&triangle(), &Pattern::triangle()).unwrap().1 - 3.0).abs() < 1e-12);
        let line3 = pts(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!((h_factor_oracle(&line3, &Pattern::path(3)).unwrap().1 - 2.0).abs() < 1e-12);
        let (f, _) = h_factor_oracle(&generate_uniform(7, 2, 1).unwrap(), &Pattern::triangle()).unwrap();
        assert_eq!(f.covered(), 6);
        f.validate(7).unwrap();
    }

    #[test]
    fn min_cut_small_cases() {
        let tour = FractionalSolution::from_tour(&Tour::new(vec![0, 1, 2, 3, 4]));
        assert!((min_cut_oracle(&tour, 5).unwrap().crossing_weight - 2.0).abs() < 1e-12);
        let mut two = FractionalSolution::new(6);
        for (a, b) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] {
            two.set(Edge::new(a, b), 1.0);
        }
        let c = min_cut_oracle(&two, 6).unwrap();
        assert_eq!(c.crossing_weight, 0.0);
    }
}
