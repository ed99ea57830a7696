//! Point sets, edges and Euclidean lengths.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for length comparisons throughout the crate.
pub const LENGTH_TOL: f64 = 1e-9;

/// Mixes a master seed with a trial counter into an independent stream seed.
///
/// SplitMix64 finalizer applied to the master seed and the counter, so that
/// trial `t` of seed `s` does not depend on which other trials were run.
pub fn derive_seed(master: u64, trial: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(trial.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// An undirected edge between two distinct vertices, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    /// Builds the normalized edge `{a, b}`. Panics on a loop.
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "edge endpoints must differ");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn try_new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidInput(format!("loop edge at vertex {a}")));
        }
        Ok(Edge::new(a, b))
    }

    pub fn contains(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint that is not `x`.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// A finite set of points in `R^d`, addressed by index `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    seed: Option<u64>,
}

impl PointSet {
    /// Builds a point set from explicit coordinates.
    ///
    /// Rejects non-finite coordinates, ragged rows and duplicate points.
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("point {i} has a non-finite coordinate")));
            }
            coords.extend_from_slice(p);
        }
        let ps = PointSet { dim, coords, seed: None };
        if let Some((i, j)) = ps.first_duplicate() {
            return Err(Error::InvalidInput(format!("points {i} and {j} coincide")));
        }
        Ok(ps)
    }

    /// Like [`PointSet::new`] but allows coincident points. Used by tests of
    /// degenerate geometry.
    pub fn with_duplicates(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || points.iter().any(|p| p.len() != dim || p.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidInput("malformed coordinates".into()));
        }
        Ok(PointSet { dim, coords: points.concat(), seed: None })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Euclidean distance between points `i` and `j` (unchecked indices).
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        dist(self.point(i), self.point(j))
    }

    /// Length of `e`, checking that both endpoints exist.
    pub fn edge_length(&self, e: Edge) -> Result<f64> {
        let n = self.len();
        for x in [e.u, e.v] {
            if x >= n {
                return Err(Error::IndexOutOfRange { index: x, n });
            }
        }
        Ok(self.dist(e.u, e.v))
    }

    /// Total length of an edge multiset; multiplicities count.
    pub fn structure_length<'a, I>(&self, edges: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'a Edge>,
    {
        edges.into_iter().map(|&e| self.edge_length(e)).sum()
    }

    /// Every coordinate multiplied by `a > 0`.
    pub fn scale(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor must be positive, got {a}")));
        }
        Ok(PointSet { dim: self.dim, coords: self.coords.iter().map(|c| c * a).collect(), seed: self.seed })
    }

    /// Restriction to the given vertex indices, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            coords.extend_from_slice(self.point(i));
        }
        PointSet { dim: self.dim, coords, seed: None }
    }

    /// Dense row-major distance matrix.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.dist(i, j);
                m[i * n + j] = d;
                m[j * n + i] = d;
            }
        }
        m
    }

    /// Indices of the `k` nearest other points of every vertex, nearest first.
    pub fn nearest_neighbors(&self, k: usize) -> Vec<Vec<usize>> {
        let n = self.len();
        let k = k.min(n.saturating_sub(1));
        (0..n)
            .map(|i| {
                let mut cand: Vec<(f64, usize)> =
                    (0..n).filter(|&j| j != i).map(|j| (self.dist(i, j), j)).collect();
                if k < cand.len() {
                    cand.select_nth_unstable_by(k, |a, b| a.partial_cmp(b).unwrap());
                    cand.truncate(k);
                }
                cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
                cand.into_iter().map(|(_, j)| j).collect()
            })
            .collect()
    }

    fn first_duplicate(&self) -> Option<(usize, usize)> {
        let mut seen = std::collections::HashMap::with_capacity(self.len());
        for (i, p) in self.points().enumerate() {
            let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
            if let Some(&j) = seen.get(&key) {
                return Some((j, i));
            }
            seen.insert(key, i);
        }
        None
    }
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `n` points drawn uniformly from `[0,1)^d` with a seeded ChaCha stream.
///
/// Exact duplicates are redrawn from the same stream, so the output is still
/// a pure function of `(n, d, seed)`.
pub fn generate_uniform(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(n * d);
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(n);
    let mut p = vec![0.0; d];
    while coords.len() < n * d {
        for c in p.iter_mut() {
            *c = rng.gen::<f64>();
        }
        if seen.insert(p.iter().map(|c| c.to_bits()).collect()) {
            coords.extend_from_slice(&p);
        }
    }
    Ok(PointSet { dim: d, coords, seed: Some(seed) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[[f64; 2]]) -> PointSet {
        PointSet::new(2, v.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn generate_empty_and_range() {
        let ps = generate_uniform(0, 2, 7).unwrap();
        assert!(ps.is_empty());
        assert_eq!(ps.dim(), 2);
        let ps = generate_uniform(1000, 2, 42).unwrap();
        assert_eq!(ps.len(), 1000);
        assert!(ps.points().flatten().all(|&c| (0.0..1.0).contains(&c)));
    }

    #[test]
    fn generate_is_deterministic() {
        let a = generate_uniform(50, 3, 9).unwrap();
        let b = generate_uniform(50, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_uniform(50, 3, 10).unwrap());
    }

    #[test]
    fn edge_lengths() {
        let ps = pts(&[[0.0, 0.0], [3.0, 4.0]]);
        assert_eq!(ps.edge_length(Edge::new(0, 1)).unwrap(), 5.0);
        assert_eq!(ps.edge_length(Edge::new(1, 0)).unwrap(), ps.edge_length(Edge::new(0, 1)).unwrap());
        assert!(matches!(ps.edge_length(Edge::new(0, 2)), Err(Error::IndexOutOfRange { index: 2, n: 2 })));
        let dup = PointSet::with_duplicates(2, vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(dup.edge_length(Edge::new(0, 1)).unwrap(), 0.0);
    }

    #[test]
    fn structure_lengths() {
        let s3 = 3f64.sqrt() / 2.0;
        let tri = pts(&[[0.0, 0.0], [1.0, 0.0], [0.5, s3]]);
        assert_eq!(tri.structure_length(&[]).unwrap(), 0.0);
        let tour = [Edge::new(0, 1), Edge::new(1, 2), Edge::new(2, 0)];
        assert!((tri.structure_length(&tour).unwrap() - 3.0).abs() < 1e-12);
        let seg = pts(&[[0.0, 0.0], [2.0, 0.0]]);
        assert_eq!(seg.structure_length(&[Edge::new(0, 1), Edge::new(0, 1)]).unwrap(), 4.0);
        let big = tri.scale(2.0).unwrap();
        assert!((big.structure_length(&tour).unwrap() - 6.0).abs() < 1e-12);
        assert_eq!(tri.scale(1.0).unwrap(), tri);
        assert!(tri.scale(0.0).is_err());
    }

    #[test]
    fn rejects_duplicates_and_nan() {
        assert!(PointSet::new(2, vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(PointSet::new(2, vec![vec![f64::NAN, 0.0]]).is_err());
        assert!(PointSet::new(2, vec![vec![0.0]]).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let s: HashSet<u64> = (0..1000).map(|t| derive_seed(5, t)).collect();
        assert_eq!(s.len(), 1000);
        assert_eq!(derive_seed(5, 3), derive_seed(5, 3));
    }

    #[test]
    fn nearest_neighbors_sorted() {
        let ps = pts(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [7.0, 0.0]]);
        assert_eq!(ps.nearest_neighbors(2)[0], vec![1, 2]);
        assert_eq!(ps.nearest_neighbors(10)[3], vec![2, 1, 0]);
    }
}
