//! Integral edge structures produced by the solvers, each with a check routine.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};

fn check_index(x: usize, n: usize) -> Result<()> {
    if x >= n {
        Err(Error::IndexOutOfRange { index: x, n })
    } else {
        Ok(())
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Closed edge list of a vertex cycle.
pub fn cycle_edges(cycle: &[usize]) -> Vec<Edge> {
    let k = cycle.len();
    (0..k).map(|i| Edge::new(cycle[i], cycle[(i + 1) % k])).collect()
}

/// Length of a closed cycle through `cycle` in the given order.
pub fn cycle_length(ps: &PointSet, cycle: &[usize]) -> f64 {
    let k = cycle.len();
    if k < 2 {
        return 0.0;
    }
    (0..k).map(|i| ps.dist(cycle[i], cycle[(i + 1) % k])).sum()
}

/// A Hamiltonian cycle given by its visiting order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
}

impl Tour {
    pub fn new(order: Vec<usize>) -> Self {
        Tour { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn edges(&self) -> Vec<Edge> {
        cycle_edges(&self.order)
    }

    pub fn length(&self, ps: &PointSet) -> f64 {
        cycle_length(ps, &self.order)
    }

    /// Rotated to start at vertex 0 and oriented so the second vertex is
    /// smaller than the last. Two tours with the same edge set have the same
    /// canonical form.
    pub fn canonical(&self) -> Tour {
        let n = self.order.len();
        if n < 3 {
            return self.clone();
        }
        let start = self.order.iter().position(|&v| v == 0).unwrap_or(0);
        let mut order: Vec<usize> = (0..n).map(|i| self.order[(start + i) % n]).collect();
        if order[1] > order[n - 1] {
            order[1..].reverse();
        }
        Tour { order }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.order.len() != n {
            return Err(invalid(format!("tour visits {} vertices, expected {n}", self.order.len())));
        }
        let mut seen = vec![false; n];
        for &v in &self.order {
            check_index(v, n)?;
            if std::mem::replace(&mut seen[v], true) {
                return Err(invalid(format!("tour visits vertex {v} twice")));
            }
        }
        Ok(())
    }
}

/// A spanning tree as an edge set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningTree {
    pub edges: Vec<Edge>,
}

impl SpanningTree {
    pub fn degrees(&self, n: usize) -> Vec<usize> {
        let mut deg = vec![0; n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn max_degree(&self, n: usize) -> usize {
        self.degrees(n).into_iter().max().unwrap_or(0)
    }

    pub fn length(&self, ps: &PointSet) -> f64 {
        self.edges.iter().map(|e| ps.dist(e.u, e.v)).sum()
    }

    /// Connected, acyclic, spanning; optionally degree-bounded.
    pub fn validate(&self, n: usize, max_degree: Option<usize>) -> Result<()> {
        if n == 0 {
            return if self.edges.is_empty() { Ok(()) } else { Err(invalid("edges on empty vertex set")) };
        }
        if self.edges.len() != n - 1 {
            return Err(invalid(format!("tree has {} edges, expected {}", self.edges.len(), n - 1)));
        }
        let mut dsu = Dsu::new(n);
        for e in &self.edges {
            check_index(e.v, n)?;
            if !dsu.union(e.u, e.v) {
                return Err(invalid(format!("edge ({},{}) closes a cycle", e.u, e.v)));
            }
        }
        if let Some(k) = max_degree {
            if let Some((v, d)) = self.degrees(n).into_iter().enumerate().find(|&(_, d)| d > k) {
                return Err(Error::DegreeViolation { vertex: v, degree: d });
            }
        }
        Ok(())
    }
}

/// A matching of cardinality `floor(n/2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub edges: Vec<Edge>,
}

impl Matching {
    pub fn length(&self, ps: &PointSet) -> f64 {
        self.edges.iter().map(|e| ps.dist(e.u, e.v)).sum()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.edges.len() != n / 2 {
            return Err(invalid(format!("matching has {} edges, expected {}", self.edges.len(), n / 2)));
        }
        let mut used = vec![false; n];
        for e in &self.edges {
            check_index(e.v, n)?;
            for x in [e.u, e.v] {
                if std::mem::replace(&mut used[x], true) {
                    return Err(invalid(format!("vertex {x} matched twice")));
                }
            }
        }
        Ok(())
    }
}

/// Vertex-disjoint cycles covering every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoFactor {
    pub cycles: Vec<Vec<usize>>,
}

impl TwoFactor {
    pub fn edges(&self) -> Vec<Edge> {
        self.cycles.iter().flat_map(|c| cycle_edges(c)).collect()
    }

    pub fn length(&self, ps: &PointSet) -> f64 {
        self.cycles.iter().map(|c| cycle_length(ps, c)).sum()
    }

    pub fn shortest_cycle_len(&self) -> usize {
        self.cycles.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Disjoint cycles, each of length at least `max(girth, 3)`, covering `0..n`.
    pub fn validate(&self, n: usize, girth: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for c in &self.cycles {
            if c.len() < girth.max(3) {
                return Err(invalid(format!("cycle of length {} below girth {}", c.len(), girth.max(3))));
            }
            for &v in c {
                check_index(v, n)?;
                if std::mem::replace(&mut seen[v], true) {
                    return Err(invalid(format!("vertex {v} lies on two cycles")));
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("vertex {v} not covered")));
        }
        Ok(())
    }

    /// Rebuilds cycles from an edge list where every vertex has degree 2.
    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self> {
        let mut adj = vec![Vec::with_capacity(2); n];
        for e in edges {
            check_index(e.v, n)?;
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        if let Some((v, a)) = adj.iter().enumerate().find(|(_, a)| a.len() != 2) {
            return Err(Error::DegreeViolation { vertex: v, degree: a.len() });
        }
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut cyc = vec![s];
            seen[s] = true;
            let (mut prev, mut cur) = (s, adj[s][0]);
            while cur != s {
                seen[cur] = true;
                cyc.push(cur);
                let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
                prev = cur;
                cur = next;
            }
            cycles.push(cyc);
        }
        Ok(TwoFactor { cycles })
    }
}

/// A 2-matching: every vertex has exactly two edge slots, doubled edges allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoMatching {
    pub edges: Vec<Edge>,
}

impl TwoMatching {
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut deg = vec![0usize; n];
        for e in &self.edges {
            check_index(e.v, n)?;
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        match deg.iter().position(|&d| d != 2) {
            Some(v) => Err(Error::DegreeViolation { vertex: v, degree: deg[v] }),
            None => Ok(()),
        }
    }
}

/// The template graph `H` of an H-factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub order: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Pattern {
    pub fn new(order: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if order == 0 {
            return Err(invalid("pattern must have at least one vertex"));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in &edges {
            if a >= order || b >= order || a == b {
                return Err(invalid(format!("bad pattern edge ({a},{b})")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(invalid(format!("repeated pattern edge ({a},{b})")));
            }
        }
        Ok(Pattern { order, edges })
    }

    pub fn single_edge() -> Self {
        Pattern { order: 2, edges: vec![(0, 1)] }
    }

    pub fn triangle() -> Self {
        Pattern { order: 3, edges: vec![(0, 1), (1, 2), (2, 0)] }
    }

    /// Path on `k` vertices.
    pub fn path(k: usize) -> Self {
        Pattern { order: k, edges: (1..k).map(|i| (i - 1, i)).collect() }
    }

    /// Star with one center (vertex 0) and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Pattern { order: leaves + 1, edges: (1..=leaves).map(|i| (0, i)).collect() }
    }

    /// Parses `k2`, `triangle`, `pathK` or `starK`.
    pub fn parse_name(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "k2" | "edge" => return Ok(Self::single_edge()),
            "triangle" | "k3" => return Ok(Self::triangle()),
            _ => {}
        }
        if let Some(k) = lower.strip_prefix("path") {
            let k: usize = k.parse().map_err(|_| invalid(format!("bad pattern {name}")))?;
            if k >= 2 {
                return Ok(Self::path(k));
            }
        }
        if let Some(k) = lower.strip_prefix("star") {
            let k: usize = k.parse().map_err(|_| invalid(format!("bad pattern {name}")))?;
            if k >= 1 {
                return Ok(Self::star(k));
            }
        }
        Err(invalid(format!("unknown pattern {name}")))
    }

    pub fn name(&self) -> String {
        if *self == Self::single_edge() {
            "k2".into()
        } else if *self == Self::triangle() {
            "triangle".into()
        } else if *self == Self::path(self.order) {
            format!("path{}", self.order)
        } else if self.order > 1 && *self == Self::star(self.order - 1) {
            format!("star{}", self.order - 1)
        } else {
            format!("h{}:{:?}", self.order, self.edges)
        }
    }
}

/// One copy of `H`: `vertices[i]` is the image of pattern vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HGroup {
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
}

/// Vertex-disjoint copies of a pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HFactor {
    pub pattern: Pattern,
    pub groups: Vec<HGroup>,
}

impl HFactor {
    pub fn group_from_embedding(pattern: &Pattern, vertices: Vec<usize>) -> HGroup {
        let edges = pattern.edges.iter().map(|&(a, b)| Edge::new(vertices[a], vertices[b])).collect();
        HGroup { vertices, edges }
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.groups.iter().flat_map(|g| g.edges.iter().copied()).collect()
    }

    pub fn length(&self, ps: &PointSet) -> f64 {
        self.edges().iter().map(|e| ps.dist(e.u, e.v)).sum()
    }

    pub fn covered(&self) -> usize {
        self.groups.iter().map(|g| g.vertices.len()).sum()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let h = self.pattern.order;
        let mut seen = vec![false; n];
        for g in &self.groups {
            if g.vertices.len() != h {
                return Err(invalid("group size differs from pattern order"));
            }
            for &v in &g.vertices {
                check_index(v, n)?;
                if std::mem::replace(&mut seen[v], true) {
                    return Err(invalid(format!("vertex {v} in two groups")));
                }
            }
            let want: BTreeSet<Edge> =
                self.pattern.edges.iter().map(|&(a, b)| Edge::new(g.vertices[a], g.vertices[b])).collect();
            let got: BTreeSet<Edge> = g.edges.iter().copied().collect();
            if want != got || got.len() != g.edges.len() {
                return Err(invalid("group edges are not the pattern image"));
            }
        }
        if n >= h && self.covered() + h < n + 1 {
            return Err(invalid(format!("covers {} of {n} points", self.covered())));
        }
        Ok(())
    }
}

/// Required inclusions `I` and exclusions `O`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    pub include: BTreeSet<Edge>,
    pub exclude: BTreeSet<Edge>,
}

impl Constraints {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.include.is_empty() && self.exclude.is_empty()
    }

    /// `I ∩ O = ∅`, indices in range and no vertex with three forced edges.
    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(e) = self.include.intersection(&self.exclude).next() {
            return Err(Error::Infeasible(format!("edge ({},{}) both included and excluded", e.u, e.v)));
        }
        let mut deg = vec![0usize; n];
        for e in self.include.iter().chain(&self.exclude) {
            check_index(e.v, n)?;
        }
        for e in &self.include {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        match deg.iter().position(|&d| d > 2) {
            Some(v) => Err(Error::DegreeViolation { vertex: v, degree: deg[v] }),
            None => Ok(()),
        }
    }

    /// Length of the shortest cycle formed by the forced edges, if any.
    pub fn forced_cycle_len(&self, n: usize) -> Option<usize> {
        let mut dsu = Dsu::new(n);
        let mut size = vec![1usize; n];
        let mut best: Option<usize> = None;
        for e in &self.include {
            let (a, b) = (dsu.find(e.u), dsu.find(e.v));
            if a == b {
                let s = size[a];
                best = Some(best.map_or(s, |x: usize| x.min(s)));
            } else {
                dsu.union(a, b);
                let r = dsu.find(a);
                size[r] = size[a] + size[b];
            }
        }
        best
    }

    pub fn with_include(&self, e: Edge) -> Self {
        let mut c = self.clone();
        c.include.insert(e);
        c
    }

    pub fn with_exclude(&self, e: Edge) -> Self {
        let mut c = self.clone();
        c.exclude.insert(e);
        c
    }
}

/// Union-find with path halving.
#[derive(Debug, Clone)]
pub struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
