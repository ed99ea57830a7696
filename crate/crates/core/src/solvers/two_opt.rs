use crate::error::Result;
use crate::geometry::PointSet;
use crate::structures::Tour;

const IMPROVE_TOL: f64 = 1e-12;
const FULL_NEIGHBORHOOD_MAX: usize = 500;
const NEIGHBORS: usize = 16;

/// 2-opt local optimum reached from `t` by first-improvement segment
/// reversals. Instances above 500 points only try pairs from 16-nearest
/// neighbor lists.
pub fn tour_2opt(ps: &PointSet, t: &Tour) -> Result<Tour> {
    let n = ps.len();
    t.validate(n)?;
    let mut order = t.order.clone();
    if n < 4 {
        return Ok(Tour::new(order));
    }
    if n <= FULL_NEIGHBORHOOD_MAX {
        full(ps, &mut order);
    } else {
        with_neighbors(ps, &mut order);
    }
    Ok(Tour::new(order))
}

fn full(ps: &PointSet, t: &mut [usize]) {
    let n = t.len();
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n - 2 {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b, c, d) = (t[i], t[i + 1], t[j], t[(j + 1) % n]);
                let delta = ps.dist(a, c) + ps.dist(b, d) - ps.dist(a, b) - ps.dist(c, d);
                if delta < -IMPROVE_TOL {
                    t[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
    }
}

fn with_neighbors(ps: &PointSet, t: &mut [usize]) {
    let n = t.len();
    let nbrs = ps.nearest_neighbors(NEIGHBORS);
    let mut pos = vec![0usize; n];
    for (i, &v) in t.iter().enumerate() {
        pos[v] = i;
    }
    let mut improved = true;
    while improved {
        improved = false;
        for a in 0..n {
            for dir in [1, n - 1] {
                let b = t[(pos[a] + dir) % n];
                let dab = ps.dist(a, b);
                for &c in &nbrs[a] {
                    let dac = ps.dist(a, c);
                    if dac >= dab {
                        break;
                    }
                    let d = t[(pos[c] + dir) % n];
                    if c == b || d == a {
                        continue;
                    }
                    let delta = dac + ps.dist(b, d) - dab - ps.dist(c, d);
                    if delta < -IMPROVE_TOL {
                        // Edges (a,b),(c,d) leave; for the predecessor move they read
                        // (d,c),(b,a) in tour order.
                        let (x, y) = if dir == 1 { (pos[a], pos[c]) } else { (pos[d], pos[b]) };
                        reverse(t, &mut pos, x, y);
                        improved = true;
                        break;
                    }
                }
            }
        }
    }
}

/// Replaces edges `(t[x], t[x+1])` and `(t[y], t[y+1])` by reversing the path
/// between them, choosing the shorter of the two equivalent segments.
fn reverse(t: &mut [usize], pos: &mut [usize], x: usize, y: usize) {
    let n = t.len();
    let (mut i, mut j) = ((x + 1) % n, y);
    let inner = (j + n - i) % n + 1;
    if 2 * inner > n {
        i = (y + 1) % n;
        j = x;
    }
    let len = ((j + n - i) % n + 1) / 2;
    for _ in 0..len {
        t.swap(i, j);
        pos[t[i]] = i;
        pos[t[j]] = j;
        i = (i + 1) % n;
        j = (j + n - 1) % n;
    }
}
