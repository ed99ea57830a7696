//! Monte-Carlo estimates of `L(X_n) / n^((d-1)/d)` on uniform random points,
//! per-instance ordering checks between functionals, and MST degree
//! fractions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{derive_seed, generate_uniform, PointSet};
use crate::heldkarp::{hk_value, HK_MAX_N};
use crate::io::ser_f17;
use crate::localmoves::patch_to_tour;
use crate::oracles::tsp_oracle;
use crate::solvers::{h_factor, min_matching, mst, mst_degree_histogram, mst_k, tour_2opt, two_factor, two_factor_girth};
use crate::structures::{Constraints, Pattern};

pub const BOOTSTRAP_RESAMPLES: usize = 2000;
/// Largest instance solved exactly for the TSP.
pub const TSP_EXACT_MAX: usize = 18;
/// Stream index reserved for bootstrap resampling.
const BOOTSTRAP_STREAM: u64 = u64::MAX;
const ORDER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Functional {
    Tsp,
    Mst,
    MstK(usize),
    Mm2,
    Tf,
    TfG(usize),
    Hk,
    Hf(Pattern),
}

impl Functional {
    /// Parses `tsp`, `mst`, `mst_k:K`, `mm2`, `tf`, `tf_g:G`, `hk` or `hf:H`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown functional {s:?}"));
        let num = |x: &str| x.parse::<usize>().map_err(|_| bad());
        match s {
            "tsp" => Ok(Functional::Tsp),
            "mst" => Ok(Functional::Mst),
            "mm2" => Ok(Functional::Mm2),
            "tf" => Ok(Functional::Tf),
            "hk" => Ok(Functional::Hk),
            _ => {
                if let Some(k) = s.strip_prefix("mst_k:") {
                    let k = num(k)?;
                    if k < 2 {
                        return Err(bad());
                    }
                    Ok(Functional::MstK(k))
                } else if let Some(g) = s.strip_prefix("tf_g:") {
                    let g = num(g)?;
                    if g < 3 {
                        return Err(bad());
                    }
                    Ok(Functional::TfG(g))
                } else if let Some(h) = s.strip_prefix("hf:") {
                    Ok(Functional::Hf(Pattern::parse_name(h)?))
                } else {
                    Err(bad())
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Functional::Tsp => "tsp".into(),
            Functional::Mst => "mst".into(),
            Functional::MstK(k) => format!("mst_k:{k}"),
            Functional::Mm2 => "mm2".into(),
            Functional::Tf => "tf".into(),
            Functional::TfG(g) => format!("tf_g:{g}"),
            Functional::Hk => "hk".into(),
            Functional::Hf(p) => format!("hf:{}", p.name()),
        }
    }

    /// Value of the functional on `ps` and whether it was computed exactly.
    pub fn evaluate(&self, ps: &PointSet) -> Result<(f64, bool)> {
        let n = ps.len();
        match self {
            Functional::Tsp if n <= TSP_EXACT_MAX => Ok((tsp_oracle(ps)?.1, true)),
            Functional::Tsp => Ok((tsp_upper(ps)?, false)),
            Functional::Mst => Ok((mst(ps).1, true)),
            Functional::MstK(k) => mst_k(ps, *k).map(|(_, l, exact)| (l, exact)),
            Functional::Mm2 => Ok((2.0 * min_matching(ps)?.1, true)),
            Functional::Tf => Ok((two_factor(ps, &Constraints::none())?.1, true)),
            Functional::TfG(g) => Ok((two_factor_girth(ps, (*g).min(n), &Constraints::none())?.1, true)),
            Functional::Hk => Ok((hk_value(ps, &Constraints::none())?.0, true)),
            Functional::Hf(p) => h_factor(ps, p).map(|(_, l, exact)| (l, exact)),
        }
    }
}

impl Serialize for Functional {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Tour length from the minimum 2-factor, greedily patched and 2-opted.
pub fn tsp_upper(ps: &PointSet) -> Result<f64> {
    let (f, _) = two_factor(ps, &Constraints::none())?;
    let (t, _) = patch_to_tour(ps, &f)?;
    Ok(tour_2opt(ps, &t)?.length(ps))
}

fn ser_interval<S: Serializer>(v: &(f64, f64), s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::io::ser_f17_vec(&[v.0, v.1], s)
}

fn ser_opt_interval<S: Serializer>(v: &Option<(f64, f64)>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_interval(x, s),
        None => s.serialize_none(),
    }
}

fn ser_opt_f17<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_f17(x, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BetaEstimate {
    pub functional: Functional,
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    #[serde(serialize_with = "ser_f17")]
    pub mean: f64,
    #[serde(serialize_with = "ser_interval")]
    pub ci95: (f64, f64),
    pub exact_mode: bool,
    /// Held-Karp lower estimate reported next to a heuristic TSP upper value.
    #[serde(serialize_with = "ser_opt_f17")]
    pub lower_mean: Option<f64>,
    #[serde(serialize_with = "ser_opt_interval")]
    pub lower_ci95: Option<(f64, f64)>,
}

/// Mean and percentile-bootstrap 95% interval; the interval always contains
/// the mean.
pub fn bootstrap_ci(values: &[f64], seed: u64) -> (f64, (f64, f64)) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, (f64::NAN, f64::NAN));
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, BOOTSTRAP_STREAM));
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..k).map(|_| values[rng.gen_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let lo = crate::bnb::quantile(&means, 0.025).min(mean);
    let hi = crate::bnb::quantile(&means, 0.975).max(mean);
    (mean, (lo, hi))
}

fn normalizer(n: usize, d: usize) -> f64 {
    (n as f64).powf((d as f64 - 1.0) / d as f64)
}

pub fn estimate_beta(f: &Functional, d: usize, n: usize, trials: usize, seed: u64) -> Result<BetaEstimate> {
    estimate_beta_scaled(f, d, n, trials, seed, 1.0)
}

/// As [`estimate_beta`], with every instance scaled by `scale` and each
/// length divided by it afterwards.
pub fn estimate_beta_scaled(
    f: &Functional,
    d: usize,
    n: usize,
    trials: usize,
    seed: u64,
    scale: f64,
) -> Result<BetaEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial required".into()));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    if *f == Functional::Hk && n > HK_MAX_N {
        return Err(Error::SizeOutOfRange { n, min: 3, max: HK_MAX_N });
    }
    let norm = normalizer(n, d);
    let heuristic_tsp = *f == Functional::Tsp && n > TSP_EXACT_MAX;
    let with_lower = heuristic_tsp && n <= HK_MAX_N;
    let per: Vec<(f64, bool, Option<f64>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ps = generate_uniform(n, d, derive_seed(seed, t))?;
            let ps = if scale == 1.0 { ps } else { ps.scale(scale)? };
            let (v, exact) = f.evaluate(&ps)?;
            let lower = if with_lower { Some(hk_value(&ps, &Constraints::none())?.0 / scale / norm) } else { None };
            Ok((v / scale / norm, exact, lower))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = per.iter().map(|p| p.0).collect();
    let (mean, ci95) = bootstrap_ci(&values, seed);
    let (lower_mean, lower_ci95) = if with_lower {
        let lows: Vec<f64> = per.iter().map(|p| p.2.expect("lower computed")).collect();
        let (m, ci) = bootstrap_ci(&lows, derive_seed(seed, 1));
        (Some(m), Some(ci))
    } else {
        (None, None)
    };
    Ok(BetaEstimate {
        functional: f.clone(),
        d,
        n,
        trials,
        mean,
        ci95,
        exact_mode: per.iter().all(|p| p.1),
        lower_mean,
        lower_ci95,
    })
}

/// Least-squares fit of `mean = a + b·n^(-1/d)`; returns `(a, b)`. The
/// intercept is a heuristic extrapolation to `n → ∞`.
pub fn finite_size_fit(points: &[(usize, f64)], d: usize) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("need at least two sizes to fit".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).powf(-1.0 / d as f64)).collect();
    let k = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("sizes must differ".into()));
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Gap `upper - lower` between two functionals across the instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SeparationPair {
    pub lower: String,
    pub upper: String,
    #[serde(serialize_with = "ser_f17")]
    pub mean_gap: f64,
    #[serde(serialize_with = "ser_interval")]
    pub gap_ci95: (f64, f64),
    /// Instances with `upper < lower - 1e-6` (or `|upper - lower| > 1e-6`
    /// for equalities).
    pub per_instance_violations: usize,
    /// Whether the ordering is guaranteed on every instance.
    pub guaranteed: bool,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub pairs: Vec<SeparationPair>,
}

impl SeparationReport {
    pub fn pair(&self, lower: &str, upper: &str) -> Option<&SeparationPair> {
        self.pairs.iter().find(|p| p.lower == lower && p.upper == upper)
    }

    pub fn total_violations(&self) -> usize {
        self.pairs.iter().filter(|p| p.guaranteed).map(|p| p.per_instance_violations).sum()
    }
}

/// All functionals compared by the separation suite, keyed by name.
fn suite_values(ps: &PointSet) -> Result<BTreeMap<String, f64>> {
    let n = ps.len();
    let mut v = BTreeMap::new();
    v.insert("tsp".to_string(), tsp_oracle(ps)?.1);
    v.insert("tf_g:3".to_string(), two_factor(ps, &Constraints::none())?.1);
    for g in 4..=n {
        v.insert(format!("tf_g:{g}"), two_factor_girth(ps, g, &Constraints::none())?.1);
    }
    v.insert("mst".to_string(), mst(ps).1);
    for k in 2..=5 {
        let (_, l, exact) = mst_k(ps, k)?;
        if !exact {
            return Err(Error::SizeOutOfRange { n, min: 3, max: crate::solvers::MST_K_EXACT_MAX });
        }
        v.insert(format!("mst_k:{k}"), l);
    }
    v.insert("mm2".to_string(), 2.0 * min_matching(ps)?.1);
    v.insert("hk".to_string(), hk_value(ps, &Constraints::none())?.0);
    Ok(v)
}

/// Pairs `(lower, upper, guaranteed, equality)` compared by the suite.
fn suite_pairs(n: usize) -> Vec<(String, String, bool, bool)> {
    let mut p = Vec::new();
    for g in 3..n {
        p.push((format!("tf_g:{g}"), format!("tf_g:{}", g + 1), true, false));
    }
    p.push((format!("tf_g:{n}"), "tsp".into(), true, true));
    p.push(("mst".into(), "mst_k:5".into(), true, false));
    for k in (2..5).rev() {
        p.push((format!("mst_k:{}", k + 1), format!("mst_k:{k}"), true, false));
    }
    p.push(("mst_k:2".into(), "tsp".into(), true, false));
    p.push(("mm2".into(), "tsp".into(), true, false));
    p.push(("hk".into(), "tsp".into(), true, false));
    p.push(("tf_g:3".into(), "tsp".into(), true, false));
    p.push(("mst".into(), "tsp".into(), true, false));
    for (a, b) in [("mst", "tf_g:3"), ("mm2", "tf_g:3"), ("mm2", "mst"), ("tf_g:3", "hk")] {
        p.push((a.into(), b.into(), false, false));
    }
    p
}

/// Per-instance ordering checks and mean gaps over `trials` random
/// instances, each solved exactly.
pub fn separation_suite(d: usize, n: usize, trials: usize, seed: u64) -> Result<SeparationReport> {
    if !(4..=TSP_EXACT_MAX).contains(&n) {
        return Err(Error::SizeOutOfRange { n, min: 4, max: TSP_EXACT_MAX });
    }
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial required".into()));
    }
    let per: Vec<BTreeMap<String, f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| suite_values(&generate_uniform(n, d, derive_seed(seed, t))?))
        .collect::<Result<_>>()?;
    let pairs = suite_pairs(n)
        .into_iter()
        .enumerate()
        .map(|(i, (lo, up, guaranteed, equality))| {
            let gaps: Vec<f64> = per.iter().map(|v| v[&up] - v[&lo]).collect();
            let per_instance_violations = gaps
                .iter()
                .filter(|&&g| if equality { g.abs() > ORDER_TOL } else { g < -ORDER_TOL })
                .count();
            let (mean_gap, gap_ci95) = bootstrap_ci(&gaps, derive_seed(seed, i as u64));
            SeparationPair { lower: lo, upper: up, mean_gap, gap_ci95, per_instance_violations, guaranteed, equality }
        })
        .collect();
    Ok(SeparationReport { d, n, trials, pairs })
}

/// Only the pairs needed for the gap signal: `tsp - tf_g:3` and
/// `tsp - mm2`. Much cheaper than the full suite.
pub fn separation_gaps(d: usize, n: usize, trials: usize, seed: u64) -> Result<SeparationReport> {
    if !(4..=TSP_EXACT_MAX).contains(&n) || trials == 0 {
        return Err(Error::SizeOutOfRange { n, min: 4, max: TSP_EXACT_MAX });
    }
    let per: Vec<(f64, f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ps = generate_uniform(n, d, derive_seed(seed, t))?;
            Ok((tsp_oracle(&ps)?.1, two_factor(&ps, &Constraints::none())?.1, 2.0 * min_matching(&ps)?.1))
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for (i, (name, pick)) in [("tf_g:3", 1usize), ("mm2", 2)].into_iter().enumerate() {
        let gaps: Vec<f64> = per.iter().map(|v| v.0 - if pick == 1 { v.1 } else { v.2 }).collect();
        let (mean_gap, gap_ci95) = bootstrap_ci(&gaps, derive_seed(seed, i as u64));
        pairs.push(SeparationPair {
            lower: name.into(),
            upper: "tsp".into(),
            mean_gap,
            gap_ci95,
            per_instance_violations: gaps.iter().filter(|&&g| g < -ORDER_TOL).count(),
            guaranteed: true,
            equality: false,
        });
    }
    Ok(SeparationReport { d, n, trials, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaRow {
    pub k: usize,
    #[serde(serialize_with = "ser_f17")]
    pub mean: f64,
    #[serde(serialize_with = "ser_interval")]
    pub ci95: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlphaReport {
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    pub rows: Vec<AlphaRow>,
    pub max_degree: usize,
}

impl AlphaReport {
    pub fn fraction(&self, k: usize) -> f64 {
        self.rows.iter().find(|r| r.k == k).map_or(0.0, |r| r.mean)
    }

    /// CSV with header `k,mean,ciLow,ciHigh`.
    pub fn to_csv(&self) -> String {
        use crate::io::fmt17;
        let mut s = String::from("k,mean,ciLow,ciHigh\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.k, fmt17(r.mean), fmt17(r.ci95.0), fmt17(r.ci95.1)));
        }
        s
    }
}

/// Fraction of MST vertices of each degree, averaged over trials.
pub fn mst_alpha(d: usize, n: usize, trials: usize, seed: u64) -> Result<AlphaReport> {
    if n < 2 || trials == 0 {
        return Err(Error::InvalidInput("need n >= 2 and at least one trial".into()));
    }
    let hists: Vec<BTreeMap<usize, usize>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ps = generate_uniform(n, d, derive_seed(seed, t))?;
            Ok(mst_degree_histogram(&mst(&ps).0, n))
        })
        .collect::<Result<_>>()?;
    let max_degree = hists.iter().filter_map(|h| h.keys().next_back().copied()).max().unwrap_or(0);
    let rows = (1..=max_degree)
        .map(|k| {
            let fr: Vec<f64> = hists.iter().map(|h| *h.get(&k).unwrap_or(&0) as f64 / n as f64).collect();
            let (mean, ci95) = bootstrap_ci(&fr, derive_seed(seed, k as u64));
            AlphaRow { k, mean, ci95 }
        })
        .collect();
    Ok(AlphaReport { d, n, trials, rows, max_degree })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names_roundtrip() {
        for s in ["tsp", "mst", "mst_k:3", "mm2", "tf", "tf_g:5", "hk", "hf:triangle", "hf:path4"] {
            assert_eq!(Functional::parse(s).unwrap().name(), s);
        }
        for s in ["mst_k:1", "tf_g:2", "hf:blob", "steiner"] {
            assert!(Functional::parse(s).is_err());
        }
    }

    #[test]
    fn bootstrap_contains_mean_and_is_deterministic() {
        let v: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let (m, ci) = bootstrap_ci(&v, 4);
        assert!(ci.0 <= m && m <= ci.1);
        assert_eq!(bootstrap_ci(&v, 4), (m, ci));
        let (m1, ci1) = bootstrap_ci(&[2.5], 1);
        assert_eq!((m1, ci1), (2.5, (2.5, 2.5)));
    }

    #[test]
    fn tsp_estimate_is_deterministic() {
        let a = estimate_beta(&Functional::Tsp, 2, 10, 20, 5).unwrap();
        let b = estimate_beta(&Functional::Tsp, 2, 10, 20, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.exact_mode);
        assert!(a.ci95.0 <= a.mean && a.mean <= a.ci95.1);
    }

    #[test]
    fn heuristic_tsp_reports_lower_companion() {
        let e = estimate_beta(&Functional::Tsp, 2, 30, 3, 2).unwrap();
        assert!(!e.exact_mode);
        assert!(e.lower_mean.unwrap() <= e.mean + 1e-9);
    }

    #[test]
    fn scale_invariance() {
        for f in [Functional::Mst, Functional::Tf, Functional::Mm2] {
            let a = estimate_beta(&f, 2, 40, 4, 9).unwrap();
            let b = estimate_beta_scaled(&f, 2, 40, 4, 9, 3.5).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-9, "{f:?}");
        }
    }

    #[test]
    fn hk_size_cap() {
        assert!(matches!(
            estimate_beta(&Functional::Hk, 2, HK_MAX_N + 1, 1, 0),
            Err(Error::SizeOutOfRange { .. })
        ));
    }

    #[test]
    fn small_suite_has_no_violations() {
        let r = separation_suite(2, 8, 6, 3).unwrap();
        assert_eq!(r.total_violations(), 0);
        assert!(r.pair("tf_g:8", "tsp").unwrap().mean_gap.abs() < 1e-9);
        for p in &r.pairs {
            assert!(p.gap_ci95.0 <= p.mean_gap && p.mean_gap <= p.gap_ci95.1);
        }
    }

    #[test]
    fn gaps_match_full_suite() {
        let full = separation_suite(2, 8, 5, 1).unwrap();
        let quick = separation_gaps(2, 8, 5, 1).unwrap();
        for lo in ["tf_g:3", "mm2"] {
            let a = full.pair(lo, "tsp").unwrap().mean_gap;
            let b = quick.pair(lo, "tsp").unwrap().mean_gap;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_fractions_sum_to_one() {
        let r = mst_alpha(2, 200, 4, 1).unwrap();
        let total: f64 = r.rows.iter().map(|x| x.mean).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(r.max_degree <= 6);
        assert!(r.fraction(1) > 0.0);
        assert!(r.to_csv().starts_with("k,mean,ciLow,ciHigh\n"));
    }

    #[test]
    fn fit_recovers_line() {
        let pts: Vec<(usize, f64)> = [100usize, 400, 1600].iter().map(|&n| (n, 0.7 + 0.3 / (n as f64).sqrt())).collect();
        let (a, b) = finite_size_fit(&pts, 2).unwrap();
        assert!((a - 0.7).abs() < 1e-12 && (b - 0.3).abs() < 1e-12);
        assert!(finite_size_fit(&pts[..1], 2).is_err());
    }
}
