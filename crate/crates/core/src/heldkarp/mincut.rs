use std::fmt;

use super::{CutCertificate, FractionalSolution};
use crate::error::{Error, Result};
use crate::geometry::Edge;
use crate::structures::Dsu;

pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Global minimum cut of the weighted support graph.
///
/// A disconnected support yields one of its components with weight zero.
pub fn stoer_wagner(sol: &FractionalSolution) -> Result<CutCertificate> {
    let n = sol.n;
    if n < 2 {
        return Err(Error::SizeOutOfRange { n, min: 2, max: usize::MAX });
    }
    if let Some(comp) = first_component(sol) {
        let mut inside = vec![false; n];
        comp.iter().for_each(|&v| inside[v] = true);
        let w = sol.crossing_weight(&inside);
        return Ok(CutCertificate { subset: comp, crossing_weight: w });
    }
    let mut w = sol.dense();
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    let mut best_set = Vec::new();
    let mut key = vec![0.0; n];
    let mut added = vec![false; n];
    while alive.len() > 1 {
        for &v in &alive {
            key[v] = 0.0;
            added[v] = false;
        }
        let mut prev = alive[0];
        let mut last = alive[0];
        for step in 0..alive.len() {
            let mut sel = usize::MAX;
            for &v in &alive {
                if !added[v] && (sel == usize::MAX || key[v] > key[sel]) {
                    sel = v;
                }
            }
            added[sel] = true;
            if step == alive.len() - 1 {
                if key[sel] < best {
                    best = key[sel];
                    best_set = members[sel].clone();
                }
                prev = last;
                last = sel;
            } else {
                prev = last;
                last = sel;
                for &v in &alive {
                    if !added[v] {
                        key[v] += w[sel * n + v];
                    }
                }
            }
        }
        // Merge `last` into `prev`.
        let moved = std::mem::take(&mut members[last]);
        members[prev].extend(moved);
        for &v in &alive {
            w[prev * n + v] += w[last * n + v];
            w[v * n + prev] = w[prev * n + v];
        }
        w[prev * n + prev] = 0.0;
        alive.retain(|&v| v != last);
    }
    best_set.sort_unstable();
    let mut inside = vec![false; n];
    best_set.iter().for_each(|&v| inside[v] = true);
    let crossing = sol.crossing_weight(&inside);
    Ok(CutCertificate { subset: best_set, crossing_weight: crossing })
}

/// The component of vertex 0 when the support is disconnected.
fn first_component(sol: &FractionalSolution) -> Option<Vec<usize>> {
    let n = sol.n;
    let mut dsu = Dsu::new(n);
    for (e, w) in sol.iter() {
        if w > 0.0 {
            dsu.union(e.u, e.v);
        }
    }
    let r = dsu.find(0);
    let comp: Vec<usize> = (0..n).filter(|&v| dsu.find(v) == r).collect();
    (comp.len() < n).then_some(comp)
}

/// Connected components of the support, in order of smallest vertex.
pub fn support_components(sol: &FractionalSolution) -> Vec<Vec<usize>> {
    let n = sol.n;
    let mut dsu = Dsu::new(n);
    for (e, w) in sol.iter() {
        if w > 0.0 {
            dsu.union(e.u, e.v);
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = dsu.find(v);
        if index[r] == usize::MAX {
            index[r] = comps.len();
            comps.push(Vec::new());
        }
        comps[index[r]].push(v);
    }
    comps
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    WeightOutOfRange { edge: Edge, weight: f64 },
    Degree { vertex: usize, weight: f64 },
    Cut(CutCertificate),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WeightOutOfRange { edge, weight } => {
                write!(f, "edge ({},{}) has weight {weight} outside [0,1]", edge.u, edge.v)
            }
            Violation::Degree { vertex, weight } => write!(f, "vertex {vertex} has degree weight {weight}"),
            Violation::Cut(c) => write!(f, "cut {:?} has crossing weight {}", c.subset, c.crossing_weight),
        }
    }
}

/// Checks bounds, degree-2 equalities and all cut constraints.
pub fn hk_feasible(sol: &FractionalSolution) -> std::result::Result<(), Violation> {
    for (e, w) in sol.iter() {
        if !(-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&w) {
            return Err(Violation::WeightOutOfRange { edge: e, weight: w });
        }
    }
    for (v, &d) in sol.degree_weights().iter().enumerate() {
        if (d - 2.0).abs() > FEASIBILITY_TOL {
            return Err(Violation::Degree { vertex: v, weight: d });
        }
    }
    if sol.n < 2 {
        return Ok(());
    }
    let cut = stoer_wagner(sol).expect("n >= 2");
    if cut.crossing_weight < 2.0 - FEASIBILITY_TOL {
        return Err(Violation::Cut(cut));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::derive_seed;
    use crate::oracles::min_cut_oracle;
    use crate::structures::Tour;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triangles_with_bridge() -> FractionalSolution {
        let mut s = FractionalSolution::new(6);
        for (a, b) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)] {
            s.set(Edge::new(a, b), 1.0);
        }
        s
    }

    #[test]
    fn bridge_and_cycle() {
        let c = stoer_wagner(&triangles_with_bridge()).unwrap();
        assert_eq!(c.crossing_weight, 1.0);
        let t = FractionalSolution::from_tour(&Tour::new(vec![0, 3, 1, 4, 2]));
        assert_eq!(stoer_wagner(&t).unwrap().crossing_weight, 2.0);
    }

    #[test]
    fn disjoint_cycles_are_infeasible() {
        let mut s = FractionalSolution::new(6);
        for (a, b) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] {
            s.set(Edge::new(a, b), 1.0);
        }
        match hk_feasible(&s) {
            Err(Violation::Cut(c)) => {
                assert_eq!(c.crossing_weight, 0.0);
                assert_eq!(c.subset, vec![0, 1, 2]);
            }
            other => panic!("{other:?}"),
        }
        assert!(hk_feasible(&FractionalSolution::from_tour(&Tour::new(vec![2, 0, 1, 3]))).is_ok());
    }

    #[test]
    fn degree_violation_reported() {
        let mut s = triangles_with_bridge();
        s.set(Edge::new(2, 3), 0.0);
        s.set(Edge::new(0, 1), 0.5);
        assert!(matches!(hk_feasible(&s), Err(Violation::Degree { vertex: 0, .. })));
    }

    #[test]
    fn matches_oracle_on_random_weights() {
        for t in 0..60 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(11, t));
            let n = 8;
            let mut s = FractionalSolution::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.5) {
                        s.set(Edge::new(u, v), rng.gen_range(0.0..1.0));
                    }
                }
            }
            let a = stoer_wagner(&s).unwrap();
            let b = min_cut_oracle(&s, n).unwrap();
            assert!((a.crossing_weight - b.crossing_weight).abs() < 1e-12, "trial {t}");
        }
    }
}
