//! Local geometric moves: shortcutting, four-point repair, cycle merging and
//! isolated-cluster detection.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{dist, PointSet};
use crate::structures::{Dsu, Tour, TwoFactor};

/// Saving of replacing the path `p-q-r-s` by the single edge `p-s`.
pub fn shortcut_saving(p: &[f64], q: &[f64], r: &[f64], s: &[f64]) -> f64 {
    dist(p, q) + dist(q, r) + dist(r, s) - dist(p, s)
}

/// Angle at `x` between the segments `x-y` and `x-z`.
pub fn angle_at(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let (a, b) = (dist(x, y), dist(x, z));
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let dot: f64 = x.iter().zip(y).zip(z).map(|((xi, yi), zi)| (yi - xi) * (zi - xi)).sum();
    (dot / (a * b)).clamp(-1.0, 1.0).acos()
}

/// A pairing of four points given by argument positions, with its length.
#[derive(Debug, Clone, PartialEq)]
pub struct FourPairing {
    pub pairs: [(usize, usize); 2],
    pub length: f64,
    /// Angle at the center subtended by the first pair.
    pub angle: f64,
}

/// Re-pairs the far endpoints `[p1, s1, p2, s2]` of two paths passing near
/// `center`. The pair subtending the smallest angle at `center` is matched,
/// and the remaining two points form the other pair.
///
/// Fails when a point is closer than `big_delta` to `center`, or when no pair
/// subtends an angle of at most a right angle (possible only for `d >= 3`).
pub fn repair_four(points: [&[f64]; 4], center: &[f64], big_delta: f64) -> Result<FourPairing> {
    for (i, p) in points.iter().enumerate() {
        if p.len() != center.len() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        let r = dist(p, center);
        if r < big_delta {
            return Err(Error::Hypothesis(format!("point {i} at distance {r} < {big_delta} from center")));
        }
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..4 {
        for j in i + 1..4 {
            let a = angle_at(center, points[i], points[j]);
            if best.is_none_or(|b| a < b.0) {
                best = Some((a, i, j));
            }
        }
    }
    let (angle, i, j) = best.expect("four points");
    if angle > std::f64::consts::FRAC_PI_2 {
        return Err(Error::Hypothesis(format!("smallest angle {angle} exceeds a right angle")));
    }
    let rest: Vec<usize> = (0..4).filter(|&x| x != i && x != j).collect();
    let length = dist(points[i], points[j]) + dist(points[rest[0]], points[rest[1]]);
    Ok(FourPairing { pairs: [(i, j), (rest[0], rest[1])], length, angle })
}

/// Upper bound on the repaired length: radial lengths plus `4δ - Δ/2`.
pub fn four_point_bound(points: [&[f64]; 4], center: &[f64], big_delta: f64, small_delta: f64) -> f64 {
    points.iter().map(|p| dist(p, center)).sum::<f64>() + 4.0 * small_delta - big_delta / 2.0
}

/// Merges the cycles through `x` and `y` by swapping edges `(x,x')`,
/// `(y,y')` for `(x,y)`, `(x',y')`, where `x'` follows `x` and `y'` is the
/// neighbor of `y` giving the smaller increase. Returns the new factor and
/// the length increase.
pub fn merge_cycles(ps: &PointSet, f: &TwoFactor, x: usize, y: usize) -> Result<(TwoFactor, f64)> {
    let n = ps.len();
    let find = |v: usize| -> Result<(usize, usize)> {
        for (ci, c) in f.cycles.iter().enumerate() {
            if let Some(p) = c.iter().position(|&u| u == v) {
                return Ok((ci, p));
            }
        }
        Err(Error::IndexOutOfRange { index: v, n })
    };
    let (cx, px) = find(x)?;
    let (cy, py) = find(y)?;
    if cx == cy {
        return Err(Error::InvalidInput(format!("vertices {x} and {y} lie on the same cycle")));
    }
    let a = &f.cycles[cx];
    let b = &f.cycles[cy];
    let xs = a[(px + 1) % a.len()];
    let next = b[(py + 1) % b.len()];
    let prev = b[(py + b.len() - 1) % b.len()];
    let gain = |yn: usize| ps.dist(x, y) + ps.dist(xs, yn) - ps.dist(x, xs) - ps.dist(y, yn);
    let (g_next, g_prev) = (gain(next), gain(prev));
    let mut merged = Vec::with_capacity(a.len() + b.len());
    for k in 1..=a.len() {
        merged.push(a[(px + k) % a.len()]);
    }
    // The path from y to y' avoiding the edge (y,y').
    let increase = if g_next <= g_prev {
        for k in 0..b.len() {
            merged.push(b[(py + b.len() - k) % b.len()]);
        }
        g_next
    } else {
        for k in 0..b.len() {
            merged.push(b[(py + k) % b.len()]);
        }
        g_prev
    };
    let mut cycles: Vec<Vec<usize>> =
        f.cycles.iter().enumerate().filter(|&(i, _)| i != cx && i != cy).map(|(_, c)| c.clone()).collect();
    cycles.push(merged);
    Ok((TwoFactor { cycles }, increase))
}

/// Merges cycles greedily, always joining the closest pair of vertices on
/// distinct cycles, until a single tour remains. Returns the tour and the
/// length increase of each merge.
pub fn patch_to_tour(ps: &PointSet, f: &TwoFactor) -> Result<(Tour, Vec<f64>)> {
    let n = ps.len();
    f.validate(n, 0)?;
    let mut cycle_of = vec![0usize; n];
    for (ci, c) in f.cycles.iter().enumerate() {
        for &v in c {
            cycle_of[v] = ci;
        }
    }
    // Prim with zero-length edges inside cycles: its positive edges, in
    // ascending order, are exactly the greedy merge sequence.
    let mut links: Vec<(f64, usize, usize)> = Vec::with_capacity(f.cycles.len().saturating_sub(1));
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = if cycle_of[v] == cycle_of[cur] { 0.0 } else { ps.dist(cur, v) };
            if d < best[v] {
                best[v] = d;
                from[v] = cur;
            }
            if next == usize::MAX || best[v] < best[next] {
                next = v;
            }
        }
        in_tree[next] = true;
        if cycle_of[next] != cycle_of[from[next]] {
            links.push((best[next], from[next], next));
        }
        cur = next;
    }
    links.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut factor = f.clone();
    let mut costs = Vec::with_capacity(links.len());
    for (_, u, v) in links {
        let (next, inc) = merge_cycles(ps, &factor, u, v)?;
        factor = next;
        costs.push(inc);
    }
    debug_assert_eq!(factor.cycles.len(), 1);
    Ok((Tour::new(factor.cycles.pop().unwrap_or_default()), costs))
}

/// Groups of exactly `m` points with diameter at most `2·eps` whose every
/// outside point is farther than `big_d` away. Groups are the connected
/// components of the "within `big_d`" graph, ordered by smallest member.
pub fn find_isolated_clusters(ps: &PointSet, m: usize, eps: f64, big_d: f64) -> Result<Vec<Vec<usize>>> {
    if m == 0 || !(eps > 0.0 && eps < big_d) {
        return Err(Error::InvalidInput(format!("need m >= 1 and 0 < eps < D, got m={m}, eps={eps}, D={big_d}")));
    }
    let n = ps.len();
    let dim = ps.dim();
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c / big_d).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for v in 0..n {
        grid.entry(cell(ps.point(v))).or_default().push(v);
    }
    let mut dsu = Dsu::new(n);
    let mut offset = vec![-1i64; dim];
    for v in 0..n {
        let base = cell(ps.point(v));
        offset.iter_mut().for_each(|o| *o = -1);
        loop {
            let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            if let Some(bucket) = grid.get(&key) {
                for &u in bucket {
                    if u > v && ps.dist(u, v) <= big_d {
                        dsu.union(u, v);
                    }
                }
            }
            let mut i = 0;
            while i < dim && offset[i] == 1 {
                offset[i] = -1;
                i += 1;
            }
            if i == dim {
                break;
            }
            offset[i] += 1;
        }
    }
    let mut comps: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..n {
        comps.entry(dsu.find(v)).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = comps
        .into_values()
        .filter(|c| c.len() == m)
        .filter(|c| c.iter().all(|&a| c.iter().all(|&b| ps.dist(a, b) <= 2.0 * eps)))
        .collect();
    out.sort();
    Ok(out)
}
