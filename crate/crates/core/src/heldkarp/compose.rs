use super::mincut::hk_feasible;
use super::FractionalSolution;
use crate::error::{Error, Result};
use crate::geometry::{Edge, PointSet};

const UNIT_TOL: f64 = 1e-9;

fn require_feasible(sol: &FractionalSolution, what: &str) -> Result<()> {
    hk_feasible(sol).map_err(|v| Error::Hypothesis(format!("{what} is not feasible: {v}")))
}

fn scaled(sol: &FractionalSolution, factor: f64, new_n: usize) -> FractionalSolution {
    let mut out = FractionalSolution::new(new_n);
    for (e, w) in sol.iter() {
        out.set(e, w * factor);
    }
    out
}

/// Adds vertices `n` and `n+1` joined by a unit edge, each joined to every old
/// vertex with weight `1/n`; old weights shrink by `1 - 1/n`.
pub fn hk_extend_edge_pair(sol: &FractionalSolution) -> Result<FractionalSolution> {
    require_feasible(sol, "input")?;
    let n = sol.n;
    if n < 3 {
        return Err(Error::SizeOutOfRange { n, min: 3, max: usize::MAX });
    }
    let nf = n as f64;
    let mut out = scaled(sol, 1.0 - 1.0 / nf, n + 2);
    out.set(Edge::new(n, n + 1), 1.0);
    for v in 0..n {
        out.set(Edge::new(v, n), 1.0 / nf);
        out.set(Edge::new(v, n + 1), 1.0 / nf);
    }
    Ok(out)
}

/// Adds `k < n/2` pairwise non-adjacent vertices, each joined to every old
/// vertex with weight `2/n`; old weights shrink by `1 - k/n`.
pub fn hk_extend_independent(sol: &FractionalSolution, k: usize) -> Result<FractionalSolution> {
    let n = sol.n;
    if 2 * k >= n {
        return Err(Error::Hypothesis(format!("k = {k} must be below n/2 = {}", n as f64 / 2.0)));
    }
    require_feasible(sol, "input")?;
    let nf = n as f64;
    let mut out = scaled(sol, 1.0 - k as f64 / nf, n + k);
    for y in n..n + k {
        for v in 0..n {
            out.set(Edge::new(v, y), 2.0 / nf);
        }
    }
    Ok(out)
}

/// Appends positions for vertices created by the extension operations.
pub fn extend_points(ps: &PointSet, extra: Vec<Vec<f64>>) -> Result<PointSet> {
    let mut pts: Vec<Vec<f64>> = ps.points().map(|p| p.to_vec()).collect();
    pts.extend(extra);
    PointSet::with_duplicates(ps.dim(), pts)
}

/// Chains feasible solutions into one on the disjoint union. Block `i`
/// names `[x1, x2, x3, x4]`: the unit edge `x1x2` is cut for every block but
/// the first, `x3x4` for every block but the last, and `x3`/`x4` of block `i`
/// are joined to `x1`/`x2` of block `i+1` with unit weight.
pub fn hk_patch(sols: &[FractionalSolution], interfaces: &[[usize; 4]]) -> Result<FractionalSolution> {
    if sols.is_empty() {
        return Err(Error::InvalidInput("no solutions to patch".into()));
    }
    if sols.len() != interfaces.len() {
        return Err(Error::InvalidInput("one interface per solution required".into()));
    }
    let s = sols.len();
    let total: usize = sols.iter().map(|x| x.n).sum();
    let mut offsets = Vec::with_capacity(s);
    let mut acc = 0;
    for sol in sols {
        offsets.push(acc);
        acc += sol.n;
    }
    let mut out = FractionalSolution::new(total);
    for (i, (sol, x)) in sols.iter().zip(interfaces).enumerate() {
        require_feasible(sol, &format!("block {i}"))?;
        if let Some(&bad) = x.iter().find(|&&v| v >= sol.n) {
            return Err(Error::IndexOutOfRange { index: bad, n: sol.n });
        }
        let mut cut = Vec::new();
        if i > 0 {
            cut.push((x[0], x[1]));
        }
        if i + 1 < s {
            cut.push((x[2], x[3]));
        }
        let mut cut_edges = Vec::new();
        for (a, b) in cut {
            let e = Edge::try_new(a, b)?;
            let w = sol.get(e);
            if (w - 1.0).abs() > UNIT_TOL {
                return Err(Error::Hypothesis(format!("block {i}: edge ({a},{b}) has weight {w}, not 1")));
            }
            if cut_edges.contains(&e) {
                return Err(Error::Hypothesis(format!("block {i}: designated edges coincide")));
            }
            cut_edges.push(e);
        }
        for (e, w) in sol.iter() {
            if !cut_edges.contains(&e) {
                out.set(Edge::new(e.u + offsets[i], e.v + offsets[i]), w);
            }
        }
    }
    for i in 0..s - 1 {
        let (a, b) = (&interfaces[i], &interfaces[i + 1]);
        out.add(Edge::new(offsets[i] + a[2], offsets[i + 1] + b[0]), 1.0);
        out.add(Edge::new(offsets[i] + a[3], offsets[i + 1] + b[1]), 1.0);
    }
    Ok(out)
}
