//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported but do not fail the run.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subadd_core::bnb::{growth_experiment, solve_bnb, summarize_growth, BnbOptions, BoundKind, DEFAULT_NODE_BUDGET};
use subadd_core::estimator::{estimate_beta, mst_alpha, separation_gaps, separation_suite, Functional};
use subadd_core::geometry::{derive_seed, generate_uniform};
use subadd_core::heldkarp::{
    build_sk_fractional, hk_extend_edge_pair, hk_extend_independent, hk_feasible, hk_patch, hk_value, FractionalSolution,
    SkKind,
};
use subadd_core::localmoves::{four_point_bound, merge_cycles, repair_four, shortcut_saving};
use subadd_core::oracles::{h_factor_oracle, matching_oracle, mst_k_oracle, tsp_oracle, two_factor_oracle};
use subadd_core::solvers::{h_factor, min_matching, mst_k, two_factor, two_factor_girth};
use subadd_core::{Constraints, Pattern, Result, Tour, TwoFactor};

const SEED: u64 = 20_240_601;
const KNOWN_RED: &[usize] = &[7, 8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn oracle_equivalence() -> Result<Outcome> {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    let mut note = |name: &str, ok: bool, t: u64| {
        checked += 1;
        if !ok {
            bad.push(format!("{name}#{t}"));
        }
    };
    for t in 0..100u64 {
        let s = derive_seed(SEED, t);
        let n = 6 + (t % 7) as usize;
        let ps = generate_uniform(n, 2, s)?;
        let tsp = tsp_oracle(&ps)?.1;
        let r = solve_bnb(&ps, &BnbOptions::new(BoundKind::TwoFactor))?;
        note("bnb", r.optimal && agree(r.length, tsp), t);
        note("hk", hk_value(&ps, &Constraints::none())?.0 <= tsp + 1e-6, t);

        let m = 4 + 2 * (t % 5) as usize;
        let ps = generate_uniform(m, 2, s ^ 1)?;
        note("matching", agree(min_matching(&ps)?.1, matching_oracle(&ps)?.1), t);

        let m = 5 + (t % 6) as usize;
        let ps = generate_uniform(m, 2, s ^ 2)?;
        note("two_factor", agree(two_factor(&ps, &Constraints::none())?.1, two_factor_oracle(&ps, 3)?.1), t);
        for g in [3, 4, m] {
            let got = two_factor_girth(&ps, g, &Constraints::none())?.1;
            note("girth", agree(got, two_factor_oracle(&ps, g)?.1), t);
        }

        let m = 4 + (t % 5) as usize;
        let ps = generate_uniform(m, 2, s ^ 3)?;
        for k in [2, 3, 4] {
            let (_, got, exact) = mst_k(&ps, k)?;
            note("mst_k", exact && agree(got, mst_k_oracle(&ps, k)?.1), t);
        }

        let (pattern, m) = match t % 3 {
            0 => (Pattern::triangle(), 9),
            1 => (Pattern::path(3), 6 + (t % 4) as usize),
            _ => (Pattern::star(3), 8),
        };
        let ps = generate_uniform(m, 2, s ^ 4)?;
        let (_, got, exact) = h_factor(&ps, &pattern)?;
        note("h_factor", exact && agree(got, h_factor_oracle(&ps, &pattern)?.1), t);
    }
    outcome(bad.is_empty(), format!("{checked} comparisons, mismatches {bad:?}"))
}

fn ordering_suite() -> Result<Outcome> {
    let r = separation_suite(2, 12, 200, SEED)?;
    let v = r.total_violations();
    outcome(v == 0, format!("{} guaranteed pairs, {v} violations", r.pairs.iter().filter(|p| p.guaranteed).count()))
}

fn table_bracket() -> Result<Outcome> {
    let mst = estimate_beta(&Functional::Mst, 2, 2000, 200, SEED)?;
    let mm2 = estimate_beta(&Functional::Mm2, 2, 1000, 100, SEED)?;
    let ok = (0.58..=0.72).contains(&mst.mean) && (0.45..=0.93).contains(&mm2.mean);
    outcome(ok, format!("mst mean {:.5}, mm2 mean {:.5}", mst.mean, mm2.mean))
}

fn separation_signal() -> Result<Outcome> {
    let r = separation_gaps(2, 12, 500, SEED)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in &r.pairs {
        ok &= p.gap_ci95.0 > 0.0;
        parts.push(format!("tsp-{} {:.5} [{:.5},{:.5}]", p.lower, p.mean_gap, p.gap_ci95.0, p.gap_ci95.1));
    }
    outcome(ok, parts.join(", "))
}

fn random_tour(rng: &mut ChaCha8Rng, n: usize) -> (FractionalSolution, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    (FractionalSolution::from_tour(&Tour::new(order.clone())), order)
}

fn tour_interface(rng: &mut ChaCha8Rng, order: &[usize]) -> [usize; 4] {
    let n = order.len();
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n);
    while j == i {
        j = rng.gen_range(0..n);
    }
    [order[i], order[(i + 1) % n], order[j], order[(j + 1) % n]]
}

fn extend_randomly(rng: &mut ChaCha8Rng, mut s: FractionalSolution, steps: usize) -> Result<FractionalSolution> {
    for _ in 0..steps {
        s = if rng.gen_bool(0.5) {
            hk_extend_edge_pair(&s)?
        } else {
            let k = rng.gen_range(1..=(s.n - 1) / 2);
            hk_extend_independent(&s, k)?
        };
    }
    Ok(s)
}

fn feasibility_preservation() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = 0;
    for _ in 0..1000 {
        let blocks = rng.gen_range(1..=4);
        let mut sols = Vec::new();
        let mut faces = Vec::new();
        for b in 0..blocks {
            let size = rng.gen_range(4..=10);
            let (sol, order) = random_tour(&mut rng, size);
            let mut face = tour_interface(&mut rng, &order);
            let sol = if b + 1 == blocks && blocks > 1 && rng.gen_bool(0.5) {
                let ext = hk_extend_edge_pair(&sol)?;
                face[0] = sol.n;
                face[1] = sol.n + 1;
                ext
            } else {
                sol
            };
            sols.push(sol);
            faces.push(face);
        }
        let joined = hk_patch(&sols, &faces)?;
        let steps = rng.gen_range(0..=3);
        let out = extend_randomly(&mut rng, joined, steps)?;
        if hk_feasible(&out).is_err() {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("1000 compositions, {failures} infeasible"))
}

fn sk_construction() -> Result<Outcome> {
    let mut bad = Vec::new();
    for k in [12, 24, 48] {
        for kind in [SkKind::OnePass, SkKind::TwoPass] {
            if hk_feasible(&build_sk_fractional(k, kind)?.solution).is_err() {
                bad.push(format!("k={k} {kind:?}"));
            }
        }
    }
    let cost = build_sk_fractional(48, SkKind::OnePass)?.internal_cost();
    let target = 10.0 * PI + 6.0;
    let ok = bad.is_empty() && (cost - target).abs() <= 0.5;
    outcome(ok, format!("infeasible {bad:?}, k=48 cost {cost:.5} vs {target:.5}"))
}

fn bnb_growth() -> Result<Outcome> {
    let n_list = [12, 16, 20, 24, 28];
    let rows = growth_experiment(&n_list, 25, BoundKind::TwoFactor, SEED, DEFAULT_NODE_BUDGET)?;
    let s = summarize_growth(&rows);
    let med: Vec<f64> = s.iter().map(|x| x.median).collect();
    let monotone = med.windows(2).all(|w| w[1] >= w[0]);
    let ratio = med[4] / med[1];
    let exhausted: usize = s.iter().map(|x| x.exhausted).sum();
    outcome(
        monotone && ratio >= 5.0,
        format!("medians {med:?}, nondecreasing {monotone}, ratio(28/16) {ratio:.2}, exhausted {exhausted}"),
    )
}

fn mst_degrees() -> Result<Outcome> {
    let r = mst_alpha(2, 1000, 50, SEED)?;
    let fr: Vec<f64> = (1..=5).map(|k| r.fraction(k)).collect();
    let ok = fr.iter().all(|&f| f > 0.0) && r.max_degree <= 6;
    let shown: Vec<String> = fr.iter().map(|f| format!("{f:.5}")).collect();
    outcome(ok, format!("fractions k=1..5 [{}], max degree {}", shown.join(", "), r.max_degree))
}

fn random_point(rng: &mut ChaCha8Rng, r: f64) -> [f64; 2] {
    [rng.gen_range(-r..r), rng.gen_range(-r..r)]
}

fn geometric_properties() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut neg = 0;
    for _ in 0..100_000 {
        let [p, q, r, s] = [0; 4].map(|_| random_point(&mut rng, 10.0));
        if shortcut_saving(&p, &q, &r, &s) < -1e-12 {
            neg += 1;
        }
    }
    let mut over = 0;
    let mut repaired = 0;
    while repaired < 10_000 {
        let big = rng.gen_range(1.0..100.0);
        let small = rng.gen_range(0.0..big / 100.0);
        let center = random_point(&mut rng, 5.0);
        let pts = [0; 4].map(|_| {
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            let len = big * rng.gen_range(1.0..3.0);
            [center[0] + len * a.cos(), center[1] + len * a.sin()]
        });
        let refs = pts.each_ref().map(|p| p.as_slice());
        let fp = repair_four(refs, &center, big)?;
        repaired += 1;
        if fp.length > four_point_bound(refs, &center, big, small) + 1e-9 {
            over += 1;
        }
    }
    let mut merge_bad = 0;
    for t in 0..10_000u64 {
        let a = rng.gen_range(3..8);
        let b = rng.gen_range(3..8);
        let ps = generate_uniform(a + b, 2, derive_seed(SEED, t))?;
        let f = TwoFactor { cycles: vec![(0..a).collect(), (a..a + b).collect()] };
        let (x, y) = (rng.gen_range(0..a), rng.gen_range(a..a + b));
        let (g, inc) = merge_cycles(&ps, &f, x, y)?;
        if g.cycles.len() != 1 || inc > 2.0 * ps.dist(x, y) + 1e-12 {
            merge_bad += 1;
        }
    }
    outcome(
        neg + over + merge_bad == 0,
        format!("negative savings {neg}/100000, repair over bound {over}/10000, merge over bound {merge_bad}/10000"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("per-instance ordering suite", ordering_suite),
        ("beta brackets for mst and mm2", table_bracket),
        ("separation signal", separation_signal),
        ("Held-Karp feasibility preservation", feasibility_preservation),
        ("ring construction", sk_construction),
        ("branch-and-bound growth", bnb_growth),
        ("MST degree fractions", mst_degrees),
        ("geometric move properties", geometric_properties),
    ];
    let mut unexpected = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        let tag = if pass { "PASS" } else { "FAIL" };
        let known = if !pass && KNOWN_RED.contains(&id) { " (known red)" } else { "" };
        println!("{tag} criterion {id} {name}{known}: {detail} [{secs:.1}s]");
        if !pass && !KNOWN_RED.contains(&id) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
