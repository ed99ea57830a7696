//! Branch and bound for the TSP with pluggable lower bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{derive_seed, generate_uniform, Edge, PointSet};
use crate::heldkarp::{hk_value, FractionalSolution};
use crate::io::{fmt17, ser_f17};
use crate::localmoves::patch_to_tour;
use crate::oracles::tsp_oracle;
use crate::solvers::{cycle_children, tour_2opt, two_factor, two_factor_girth};
use crate::structures::{Constraints, Tour, TwoFactor};

pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;
pub const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    TwoFactor,
    Girth(usize),
    HeldKarp,
}

impl BoundKind {
    /// Parses `tf`, `tfg:G` or `hk`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tf" => Ok(BoundKind::TwoFactor),
            "hk" => Ok(BoundKind::HeldKarp),
            _ => match s.strip_prefix("tfg:").map(str::parse::<usize>) {
                Some(Ok(g)) if g >= 3 => Ok(BoundKind::Girth(g)),
                _ => Err(Error::InvalidInput(format!("unknown bound {s:?}; expected tf, tfg:G (G >= 3) or hk"))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            BoundKind::TwoFactor => "tf".into(),
            BoundKind::Girth(g) => format!("tfg:{g}"),
            BoundKind::HeldKarp => "hk".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncumbentKind {
    Oracle,
    Patch2Opt,
}

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub bound: BoundKind,
    pub incumbent: IncumbentKind,
    pub initial: Option<Tour>,
    pub budget: usize,
}

impl BnbOptions {
    pub fn new(bound: BoundKind) -> Self {
        BnbOptions { bound, incumbent: IncumbentKind::Patch2Opt, initial: None, budget: DEFAULT_NODE_BUDGET }
    }
}

/// Search tree counters.
///
/// A node is expanded when its relaxation is examined for branching; the
/// root always is. A leaf is an expanded node that produced no open
/// children. Pruned nodes are those discarded for a bound at or above the
/// incumbent, or for infeasible constraints.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BnbStats {
    pub nodes_expanded: usize,
    pub leaves: usize,
    pub pruned_nodes: usize,
    pub max_depth: usize,
    pub bound_calls: usize,
    #[serde(serialize_with = "ser_f17")]
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct BnbResult {
    pub tour: Tour,
    pub length: f64,
    pub stats: BnbStats,
    pub optimal: bool,
}

enum Relaxed {
    Factor(TwoFactor),
    Fractional(FractionalSolution),
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    c: Constraints,
    sol: Relaxed,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound).then(self.depth.cmp(&o.depth)).then(o.seq.cmp(&self.seq))
    }
}

/// Lower bound under `c`, or `None` when no tour satisfies `c`.
fn evaluate(ps: &PointSet, bound: BoundKind, c: &Constraints) -> Result<Option<(f64, Relaxed)>> {
    let n = ps.len();
    if c.validate(n).is_err() || c.forced_cycle_len(n).is_some_and(|l| l < n) {
        return Ok(None);
    }
    let res = match bound {
        BoundKind::TwoFactor => two_factor(ps, c).map(|(f, l)| (l, Relaxed::Factor(f))),
        BoundKind::Girth(g) => two_factor_girth(ps, g.min(n), c).map(|(f, l)| (l, Relaxed::Factor(f))),
        BoundKind::HeldKarp => hk_value(ps, c).map(|(v, x)| (v, Relaxed::Fractional(x))),
    };
    match res {
        Ok(r) => Ok(Some(r)),
        Err(Error::Infeasible(_) | Error::DegreeViolation { .. } | Error::LpInfeasible) => Ok(None),
        Err(e) => Err(e),
    }
}

fn patched(ps: &PointSet, f: &TwoFactor) -> Result<Tour> {
    let (t, _) = patch_to_tour(ps, f)?;
    tour_2opt(ps, &t)
}

/// The tour encoded by an integral solution, if it is one.
fn integral_tour(n: usize, x: &FractionalSolution) -> Option<Tour> {
    if !x.is_integral(1e-9) {
        return None;
    }
    let edges: Vec<Edge> = x.iter().filter(|(_, w)| *w > 0.5).map(|(e, _)| e).collect();
    let f = TwoFactor::from_edges(n, &edges).ok()?;
    (f.cycles.len() == 1).then(|| Tour::new(f.cycles[0].clone()))
}

/// Edge of weight closest to one half; ties go to the smaller edge.
fn most_fractional(x: &FractionalSolution) -> Option<Edge> {
    x.iter()
        .filter(|(_, w)| *w > 1e-9 && *w < 1.0 - 1e-9)
        .min_by(|a, b| (a.1 - 0.5).abs().total_cmp(&(b.1 - 0.5).abs()).then(a.0.cmp(&b.0)))
        .map(|(e, _)| e)
}

/// Exact TSP by best-first branch and bound. When the node budget runs out
/// the best tour found is returned with `optimal == false`.
pub fn solve_bnb(ps: &PointSet, opts: &BnbOptions) -> Result<BnbResult> {
    let start = Instant::now();
    let n = ps.len();
    if n < 4 {
        return Err(Error::SizeOutOfRange { n, min: 4, max: usize::MAX });
    }
    let mut stats = BnbStats::default();
    let mut best: Option<(Tour, f64)> = None;
    let offer = |best: &mut Option<(Tour, f64)>, t: Tour| {
        let l = t.length(ps);
        if best.as_ref().is_none_or(|b| l < b.1) {
            *best = Some((t, l));
        }
    };
    if let Some(t) = &opts.initial {
        t.validate(n)?;
        offer(&mut best, t.clone());
    }
    if opts.incumbent == IncumbentKind::Oracle {
        offer(&mut best, tsp_oracle(ps)?.0);
    }
    stats.bound_calls += 1;
    let root = evaluate(ps, opts.bound, &Constraints::none())?
        .ok_or_else(|| Error::Infeasible("root relaxation infeasible".into()))?;
    match &root.1 {
        Relaxed::Factor(f) => offer(&mut best, patched(ps, f)?),
        Relaxed::Fractional(_) => {
            let (f, _) = two_factor(ps, &Constraints::none())?;
            offer(&mut best, patched(ps, &f)?);
        }
    }
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    heap.push(Node { bound: root.0, depth: 0, seq, c: Constraints::none(), sol: root.1 });
    let mut optimal = true;
    while let Some(node) = heap.pop() {
        let ub = best.as_ref().map_or(f64::INFINITY, |b| b.1);
        if node.bound >= ub - PRUNE_TOL {
            // The open list is ordered by bound, so everything left is pruned too.
            if node.depth == 0 {
                stats.nodes_expanded += 1;
                stats.leaves += 1;
            }
            stats.pruned_nodes += 1 + heap.len();
            break;
        }
        if stats.nodes_expanded >= opts.budget {
            optimal = false;
            break;
        }
        stats.nodes_expanded += 1;
        stats.max_depth = stats.max_depth.max(node.depth);
        let children = match &node.sol {
            Relaxed::Factor(f) => {
                if f.cycles.len() == 1 {
                    offer(&mut best, Tour::new(f.cycles[0].clone()));
                    stats.leaves += 1;
                    continue;
                }
                offer(&mut best, patched(ps, f)?);
                let cycle = f.cycles.iter().min_by_key(|c| c.len()).expect("non-empty factor");
                cycle_children(&node.c, cycle, n, n)
            }
            Relaxed::Fractional(x) => {
                if let Some(t) = integral_tour(n, x) {
                    offer(&mut best, t);
                    stats.leaves += 1;
                    continue;
                }
                match most_fractional(x) {
                    Some(e) => vec![node.c.with_include(e), node.c.with_exclude(e)],
                    None => return Err(Error::InvalidInput("integral relaxation without a tour".into())),
                }
            }
        };
        let mut pushed = 0;
        for c in children {
            stats.bound_calls += 1;
            let ub = best.as_ref().map_or(f64::INFINITY, |b| b.1);
            match evaluate(ps, opts.bound, &c)? {
                Some((b, sol)) if b < ub - PRUNE_TOL => {
                    seq += 1;
                    pushed += 1;
                    heap.push(Node { bound: b, depth: node.depth + 1, seq, c, sol });
                }
                _ => stats.pruned_nodes += 1,
            }
        }
        if pushed == 0 {
            stats.leaves += 1;
        }
    }
    stats.wall_time = start.elapsed().as_secs_f64();
    let (tour, length) = best.ok_or_else(|| Error::Infeasible("no tour found".into()))?;
    Ok(BnbResult { tour, length, stats, optimal })
}

/// One instance of the growth experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub trial: usize,
    pub nodes: usize,
    pub leaves: usize,
    pub pruned: usize,
    pub optimal: bool,
    #[serde(rename = "wallTime", serialize_with = "ser_f17")]
    pub wall_time: f64,
}

/// Node-count quartiles for one instance size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSummary {
    pub n: usize,
    pub trials: usize,
    #[serde(serialize_with = "ser_f17")]
    pub q1: f64,
    #[serde(serialize_with = "ser_f17")]
    pub median: f64,
    #[serde(serialize_with = "ser_f17")]
    pub q3: f64,
    pub exhausted: usize,
}

/// Runs `trials` random uniform instances in the unit square for each size,
/// in parallel; trial `t` at size `n` uses `derive_seed(seed, n·2^32 + t)`.
pub fn growth_experiment(
    n_list: &[usize],
    trials: usize,
    bound: BoundKind,
    seed: u64,
    budget: usize,
) -> Result<Vec<GrowthRow>> {
    let jobs: Vec<(usize, usize)> = n_list.iter().flat_map(|&n| (0..trials).map(move |t| (n, t))).collect();
    jobs.par_iter()
        .map(|&(n, t)| {
            let ps = generate_uniform(n, 2, derive_seed(seed, ((n as u64) << 32) | t as u64))?;
            let opts = BnbOptions { budget, ..BnbOptions::new(bound) };
            let r = solve_bnb(&ps, &opts)?;
            Ok(GrowthRow {
                n,
                trial: t,
                nodes: r.stats.nodes_expanded,
                leaves: r.stats.leaves,
                pruned: r.stats.pruned_nodes,
                optimal: r.optimal,
                wall_time: r.stats.wall_time,
            })
        })
        .collect()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize_growth(rows: &[GrowthRow]) -> Vec<GrowthSummary> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let sel: Vec<&GrowthRow> = rows.iter().filter(|r| r.n == n).collect();
            let mut v: Vec<f64> = sel.iter().map(|r| r.nodes as f64).collect();
            v.sort_by(f64::total_cmp);
            GrowthSummary {
                n,
                trials: sel.len(),
                q1: quantile(&v, 0.25),
                median: quantile(&v, 0.5),
                q3: quantile(&v, 0.75),
                exhausted: sel.iter().filter(|r| !r.optimal).count(),
            }
        })
        .collect()
}

/// CSV with header `n,trial,nodes,leaves,pruned,optimal,wallTime`.
pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut s = String::from("n,trial,nodes,leaves,pruned,optimal,wallTime\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.n, r.trial, r.nodes, r.leaves, r.pruned, r.optimal, fmt17(r.wall_time));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every Hamiltonian cycle on `0..n` once, starting at 0.
    fn all_tours(n: usize) -> Vec<Tour> {
        fn rec(path: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Tour>) {
            let n = used.len();
            if path.len() == n {
                if path[1] < path[n - 1] {
                    out.push(Tour::new(path.clone()));
                }
                return;
            }
            for v in 1..n {
                if !used[v] {
                    used[v] = true;
                    path.push(v);
                    rec(path, used, out);
                    path.pop();
                    used[v] = false;
                }
            }
        }
        let mut used = vec![false; n];
        used[0] = true;
        let mut out = Vec::new();
        rec(&mut vec![0], &mut used, &mut out);
        out
    }

    #[test]
    fn parse_bounds() {
        assert_eq!(BoundKind::parse("tf").unwrap(), BoundKind::TwoFactor);
        assert_eq!(BoundKind::parse("tfg:5").unwrap(), BoundKind::Girth(5));
        assert_eq!(BoundKind::parse("hk").unwrap(), BoundKind::HeldKarp);
        assert!(BoundKind::parse("tfg:2").is_err());
        assert!(BoundKind::parse("lp").is_err());
        assert_eq!(BoundKind::Girth(4).name(), "tfg:4");
    }

    #[test]
    fn matches_oracle_with_each_bound() {
        for seed in 0..8 {
            let ps = generate_uniform(10, 2, 7000 + seed).unwrap();
            let (_, opt) = tsp_oracle(&ps).unwrap();
            for bound in [BoundKind::TwoFactor, BoundKind::Girth(4), BoundKind::HeldKarp] {
                let r = solve_bnb(&ps, &BnbOptions::new(bound)).unwrap();
                assert!(r.optimal);
                r.tour.validate(10).unwrap();
                assert!((r.length - opt).abs() < 1e-9, "seed {seed} {bound:?}");
                assert!((r.tour.length(&ps) - r.length).abs() < 1e-12);
                assert!(r.stats.leaves <= r.stats.nodes_expanded + 1);
            }
        }
    }

    #[test]
    fn optimal_incumbent_closes_root() {
        let ps = PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let opts = BnbOptions { incumbent: IncumbentKind::Oracle, ..BnbOptions::new(BoundKind::TwoFactor) };
        let r = solve_bnb(&ps, &opts).unwrap();
        assert_eq!(r.stats.nodes_expanded, 1);
        assert!((r.length - 4.0).abs() < 1e-12);
    }

    #[test]
    fn children_cover_parent_tours() {
        for seed in 0..6 {
            let n = 8;
            let ps = generate_uniform(n, 2, 50 + seed).unwrap();
            let (f, _) = two_factor(&ps, &Constraints::none()).unwrap();
            if f.cycles.len() == 1 {
                continue;
            }
            let cycle = f.cycles.iter().min_by_key(|c| c.len()).unwrap();
            let children = cycle_children(&Constraints::none(), cycle, n, n);
            let tours = all_tours(n);
            let admits = |c: &Constraints, t: &Tour| {
                let e = t.edges();
                c.include.iter().all(|x| e.contains(x)) && c.exclude.iter().all(|x| !e.contains(x))
            };
            for t in &tours {
                let k = children.iter().filter(|c| admits(c, t)).count();
                assert_eq!(k, 1, "every tour lies in exactly one child");
            }
        }
    }

    #[test]
    fn bounds_are_valid_below_nodes() {
        let n = 8;
        let ps = generate_uniform(n, 2, 99).unwrap();
        let tours = all_tours(n);
        let mut c = Constraints::none();
        for step in 0..3 {
            for bound in [BoundKind::TwoFactor, BoundKind::HeldKarp] {
                if let Some((b, _)) = evaluate(&ps, bound, &c).unwrap() {
                    for t in &tours {
                        let e = t.edges();
                        if c.include.iter().all(|x| e.contains(x)) && c.exclude.iter().all(|x| !e.contains(x)) {
                            assert!(b <= t.length(&ps) + 1e-9, "step {step} {bound:?}");
                        }
                    }
                }
            }
            c = if step % 2 == 0 { c.with_exclude(Edge::new(step, step + 1)) } else { c.with_include(Edge::new(0, 5)) };
        }
    }

    #[test]
    fn better_incumbent_expands_no_more() {
        let ps = generate_uniform(13, 2, 4242).unwrap();
        let plain = solve_bnb(&ps, &BnbOptions::new(BoundKind::TwoFactor)).unwrap();
        let opts = BnbOptions { initial: Some(plain.tour.clone()), ..BnbOptions::new(BoundKind::TwoFactor) };
        let seeded = solve_bnb(&ps, &opts).unwrap();
        assert!(seeded.stats.nodes_expanded <= plain.stats.nodes_expanded);
        assert!((seeded.length - plain.length).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let ps = generate_uniform(14, 2, 3).unwrap();
        let opts = BnbOptions { budget: 1, ..BnbOptions::new(BoundKind::TwoFactor) };
        let r = solve_bnb(&ps, &opts).unwrap();
        r.tour.validate(14).unwrap();
        let full = solve_bnb(&ps, &BnbOptions::new(BoundKind::TwoFactor)).unwrap();
        if full.stats.nodes_expanded > 1 {
            assert!(!r.optimal);
        }
    }

    #[test]
    fn growth_rows_and_summary() {
        let rows = growth_experiment(&[8, 10], 3, BoundKind::TwoFactor, 1, 10_000).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.nodes >= 1 && r.optimal));
        let again = growth_experiment(&[8, 10], 3, BoundKind::TwoFactor, 1, 10_000).unwrap();
        let nodes = |v: &[GrowthRow]| v.iter().map(|r| r.nodes).collect::<Vec<_>>();
        assert_eq!(nodes(&rows), nodes(&again));
        let s = summarize_growth(&rows);
        assert_eq!(s.len(), 2);
        assert!(s[0].q1 <= s[0].median && s[0].median <= s[0].q3);
        let csv = growth_csv(&rows);
        assert!(csv.starts_with("n,trial,nodes,leaves,pruned,optimal,wallTime\n"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[5.0], 0.25), 5.0);
        assert!(quantile(&[], 0.5).is_nan());
    }
}
