use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};
use crate::io::F17;
use crate::structures::Tour;

/// Weights in `[0,1]` on vertex pairs; a candidate Held-Karp point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FractionalSolution {
    pub n: usize,
    weights: BTreeMap<Edge, f64>,
}

/// A vertex subset together with the weight crossing it.
#[derive(Debug, Clone, PartialEq)]
pub struct CutCertificate {
    pub subset: Vec<usize>,
    pub crossing_weight: f64,
}

impl FractionalSolution {
    pub fn new(n: usize) -> Self {
        FractionalSolution { n, weights: BTreeMap::new() }
    }

    /// Unit weights on the tour edges.
    pub fn from_tour(t: &Tour) -> Self {
        let mut s = Self::new(t.len());
        for e in t.edges() {
            s.add(e, 1.0);
        }
        s
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (Edge, f64)>) -> Result<Self> {
        let mut s = Self::new(n);
        for (e, w) in edges {
            if e.v >= n {
                return Err(Error::IndexOutOfRange { index: e.v, n });
            }
            if !w.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite weight on ({},{})", e.u, e.v)));
            }
            s.add(e, w);
        }
        Ok(s)
    }

    pub fn get(&self, e: Edge) -> f64 {
        self.weights.get(&e).copied().unwrap_or(0.0)
    }

    /// Sets the weight of `e`; zero removes it from the support.
    pub fn set(&mut self, e: Edge, w: f64) {
        if w == 0.0 {
            self.weights.remove(&e);
        } else {
            self.weights.insert(e, w);
        }
    }

    pub fn add(&mut self, e: Edge, w: f64) {
        let cur = self.get(e);
        self.set(e, cur + w);
    }

    /// Support edges with their weights, in edge order.
    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        self.weights.iter().map(|(&e, &w)| (e, w))
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn degree_weights(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (e, w) in self.iter() {
            d[e.u] += w;
            d[e.v] += w;
        }
        d
    }

    pub fn cost(&self, ps: &PointSet) -> f64 {
        self.iter().map(|(e, w)| w * ps.dist(e.u, e.v)).sum()
    }

    /// Weight of pairs with exactly one endpoint in `inside`.
    pub fn crossing_weight(&self, inside: &[bool]) -> f64 {
        self.iter().filter(|(e, _)| inside[e.u] != inside[e.v]).map(|(_, w)| w).sum()
    }

    pub fn is_integral(&self, tol: f64) -> bool {
        self.iter().all(|(_, w)| (w - w.round()).abs() <= tol)
    }

    /// Dense symmetric weight matrix.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (e, w) in self.iter() {
            m[e.u * n + e.v] += w;
            m[e.v * n + e.u] += w;
        }
        m
    }

    /// Copy with vertex `i` renamed to `offset + i` on `new_n` vertices.
    pub fn relabeled(&self, offset: usize, new_n: usize) -> Self {
        let mut s = Self::new(new_n);
        for (e, w) in self.iter() {
            s.set(Edge::new(e.u + offset, e.v + offset), w);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FracOut { n: self.n, edges: EdgeRows(self) }).expect("fractional solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FracIn = serde_json::from_str(text)?;
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (u, v, w) in raw.edges {
            edges.push((Edge::try_new(u, v)?, w));
        }
        Self::from_edges(raw.n, edges)
    }
}

#[derive(Serialize)]
struct FracOut<'a> {
    n: usize,
    edges: EdgeRows<'a>,
}

struct EdgeRows<'a>(&'a FractionalSolution);

impl Serialize for EdgeRows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.support_len()))?;
        for (e, w) in self.0.iter() {
            seq.serialize_element(&(e.u, e.v, F17(w)))?;
        }
        seq.end()
    }
}

#[derive(Deserialize)]
struct FracIn {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}
