use super::lp::{RowSense, Simplex};
use super::mincut::{stoer_wagner, support_components};
use super::FractionalSolution;
use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};
use crate::structures::Constraints;

/// Largest instance handled with the complete edge set.
pub const HK_MAX_N: usize = 300;
/// Cuts lighter than `2 - CUT_TOL` are added to the LP.
pub const CUT_TOL: f64 = 1e-7;
const MAX_ROUNDS: usize = 1000;
const SUPPORT_EPS: f64 = 1e-10;

fn pair_index(n: usize, u: usize, v: usize) -> usize {
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

/// Held-Karp lower bound under inclusion/exclusion constraints, computed with
/// subtour cutting planes. Returns the LP value and its optimal point.
pub fn hk_value(ps: &PointSet, c: &Constraints) -> Result<(f64, FractionalSolution)> {
    let n = ps.len();
    if !(3..=HK_MAX_N).contains(&n) {
        return Err(Error::SizeOutOfRange { n, min: 3, max: HK_MAX_N });
    }
    c.validate(n)?;
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    let mut cost = Vec::with_capacity(pairs.capacity());
    let mut bounds = Vec::with_capacity(pairs.capacity());
    for u in 0..n {
        for v in u + 1..n {
            let e = Edge::new(u, v);
            pairs.push(e);
            cost.push(ps.dist(u, v));
            bounds.push(if c.include.contains(&e) {
                (1.0, 1.0)
            } else if c.exclude.contains(&e) {
                (0.0, 0.0)
            } else {
                (0.0, 1.0)
            });
        }
    }
    let mut lp = Simplex::new(cost, bounds)?;
    for v in 0..n {
        let row: Vec<(usize, f64)> =
            (0..n).filter(|&u| u != v).map(|u| (pair_index(n, u.min(v), u.max(v)), 1.0)).collect();
        lp.add_row(&row, RowSense::Eq, 2.0)?;
    }
    let mut last_bound = f64::NEG_INFINITY;
    for _ in 0..MAX_ROUNDS {
        let res = match lp.solve() {
            Ok(r) => r,
            Err(Error::IterationLimit { .. }) => return Err(Error::IterationLimit { last_bound }),
            Err(e) => return Err(e),
        };
        last_bound = res.value;
        let mut sol = FractionalSolution::new(n);
        for (k, &e) in pairs.iter().enumerate() {
            let x = res.x[k].clamp(0.0, 1.0);
            if x > SUPPORT_EPS {
                sol.set(e, x);
            }
        }
        let comps = support_components(&sol);
        let cuts: Vec<Vec<usize>> = if comps.len() > 1 {
            comps
        } else {
            let cut = stoer_wagner(&sol)?;
            if cut.crossing_weight >= 2.0 - CUT_TOL {
                return Ok((sol.cost(ps), sol));
            }
            vec![cut.subset]
        };
        for set in cuts {
            let mut inside = vec![false; n];
            set.iter().for_each(|&v| inside[v] = true);
            let row: Vec<(usize, f64)> =
                (0..pairs.len()).filter(|&k| inside[pairs[k].u] != inside[pairs[k].v]).map(|k| (k, 1.0)).collect();
            lp.add_row(&row, RowSense::Ge, 2.0)?;
        }
    }
    Err(Error::IterationLimit { last_bound })
}
