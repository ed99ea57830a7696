use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use subadd_core::bnb::{
    growth_csv, growth_experiment, solve_bnb, summarize_growth, BnbOptions, BnbStats, BoundKind, GrowthRow, GrowthSummary,
    IncumbentKind,
};
use subadd_core::estimator::{estimate_beta, mst_alpha, separation_suite, Functional};
use subadd_core::geometry::{generate_uniform, Edge, PointSet};
use subadd_core::heldkarp::{hk_feasible, hk_value, FractionalSolution, Violation};
use subadd_core::io::{fmt17, point_set_to_json, read_point_set, write_text, F17};
use subadd_core::oracles;
use subadd_core::solvers;
use subadd_core::structures::{Constraints, Pattern};
use subadd_core::Error;

#[derive(Parser)]
#[command(name = "subadd", version, about = "Euclidean functionals on random point sets")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for multi-trial commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform random points in the unit cube.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one functional on a point file.
    Solve {
        #[arg(long)]
        functional: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        g: Option<usize>,
        /// Pattern name (k2, triangle, pathK, starK) or a JSON file.
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force reference solvers for small inputs.
    Oracle {
        #[arg(long)]
        functional: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        g: Option<usize>,
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Held-Karp bound with optional forced and forbidden edges.
    Hk {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        include: Option<PathBuf>,
        #[arg(long)]
        exclude: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a fractional solution against the Held-Karp constraints.
    HkCheck {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Estimate L/n^((d-1)/d) over random instances.
    Beta {
        #[arg(long)]
        functional: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-instance ordering checks and mean gaps between functionals.
    Separate {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fraction of MST vertices of each degree.
    Alpha {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact TSP by branch and bound.
    Bnb {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "tf")]
        bound: String,
        #[arg(long, value_enum, default_value_t = Incumbent::Patch2opt)]
        incumbent: Incumbent,
        #[arg(long, default_value_t = subadd_core::bnb::DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Node counts of branch and bound across instance sizes.
    BnbGrowth {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        #[arg(long, default_value = "tf")]
        bound: String,
        #[arg(long, default_value_t = subadd_core::bnb::DEFAULT_NODE_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Incumbent {
    Oracle,
    Patch2opt,
}

/// Exit code and message of a failed command.
struct Failure {
    code: u8,
    body: Value,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_)
            | Error::DegreeViolation { .. }
            | Error::BudgetExhausted { .. }
            | Error::IterationLimit { .. }
            | Error::LpInfeasible
            | Error::Hypothesis(_) => 2,
            _ => 1,
        };
        Failure { code, body: json!({ "error": e.to_string() }) }
    }
}

type CmdResult = Result<(), Failure>;

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Solved {
    functional: String,
    length: F17,
    exact: bool,
    edges: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    order: Option<Vec<usize>>,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
enum ViolationOut {
    Weight { edge: [usize; 2], weight: F17 },
    Degree { vertex: usize, weight: F17 },
    #[serde(rename_all = "camelCase")]
    Cut { subset: Vec<usize>, crossing_weight: F17 },
}

#[derive(Serialize)]
struct BnbOut {
    bound: String,
    length: F17,
    optimal: bool,
    order: Vec<usize>,
    stats: BnbStats,
}

#[derive(Serialize)]
struct GrowthOut<'a> {
    rows: &'a [GrowthRow],
    summary: Vec<GrowthSummary>,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Error> {
    Ok(serde_json::to_string(v)?)
}

fn read_pattern(arg: &str) -> Result<Pattern, Error> {
    if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg)?;
        let p: Pattern = serde_json::from_str(&text)?;
        return Pattern::new(p.order, p.edges);
    }
    Pattern::parse_name(arg)
}

fn need<T>(v: Option<T>, flag: &str, functional: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::InvalidInput(format!("--{flag} is required for {functional}")))
}

fn read_edges(path: &Path) -> Result<Vec<Edge>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let rows: Vec<(usize, usize)> = serde_json::from_str(&text)?;
    rows.into_iter().map(|(u, v)| Edge::try_new(u, v)).collect()
}

fn solved(functional: &str, edges: Vec<Edge>, length: f64, exact: bool) -> Solved {
    Solved {
        functional: functional.to_string(),
        length: F17(length),
        exact,
        edges: edges.iter().map(|e| [e.u, e.v]).collect(),
        order: None,
    }
}

fn cmd_solve(ps: &PointSet, functional: &str, k: Option<usize>, g: Option<usize>, pattern: Option<String>) -> Result<Solved, Failure> {
    let none = Constraints::none();
    let v = match functional {
        "mst" => {
            let (t, l) = solvers::mst(ps);
            solved(functional, t.edges, l, true)
        }
        "mst_k" => {
            let (t, l, exact) = solvers::mst_k(ps, need(k, "k", functional)?)?;
            solved(functional, t.edges, l, exact)
        }
        "mm" => {
            let (m, l) = solvers::min_matching(ps)?;
            solved(functional, m.edges, l, true)
        }
        "tf" => {
            let (f, l) = solvers::two_factor(ps, &none)?;
            solved(functional, f.edges(), l, true)
        }
        "tf_g" => {
            let (f, l) = solvers::two_factor_girth(ps, need(g, "g", functional)?, &none)?;
            solved(functional, f.edges(), l, true)
        }
        "hf" => {
            let p = read_pattern(&need(pattern, "pattern", functional)?)?;
            let (f, l, exact) = solvers::h_factor(ps, &p)?;
            solved(functional, f.edges(), l, exact)
        }
        "tsp" => {
            let r = solve_bnb(ps, &BnbOptions::new(BoundKind::TwoFactor))?;
            if !r.optimal {
                return Err(Error::BudgetExhausted { budget: subadd_core::bnb::DEFAULT_NODE_BUDGET, best_bound: r.length }.into());
            }
            Solved { order: Some(r.tour.order.clone()), ..solved(functional, r.tour.edges(), r.length, true) }
        }
        _ => return Err(Error::InvalidInput(format!("unknown functional {functional:?}")).into()),
    };
    Ok(v)
}

fn cmd_oracle(ps: &PointSet, functional: &str, k: Option<usize>, g: Option<usize>, pattern: Option<String>) -> Result<Solved, Failure> {
    let v = match functional {
        "tsp" => {
            let (t, l) = oracles::tsp_oracle(ps)?;
            Solved { order: Some(t.order.clone()), ..solved(functional, t.edges(), l, true) }
        }
        "mm" => {
            let (m, l) = oracles::matching_oracle(ps)?;
            solved(functional, m.edges, l, true)
        }
        "tf" | "tf_g" => {
            let g = if functional == "tf" { 3 } else { need(g, "g", functional)? };
            let (f, l) = oracles::two_factor_oracle(ps, g)?;
            solved(functional, f.edges(), l, true)
        }
        "mst_k" => {
            let (t, l) = oracles::mst_k_oracle(ps, need(k, "k", functional)?)?;
            solved(functional, t.edges, l, true)
        }
        "hf" => {
            let p = read_pattern(&need(pattern, "pattern", functional)?)?;
            let (f, l) = oracles::h_factor_oracle(ps, &p)?;
            solved(functional, f.edges(), l, true)
        }
        _ => return Err(Error::InvalidInput(format!("no oracle for {functional:?}")).into()),
    };
    Ok(v)
}

fn violation_out(v: &Violation) -> ViolationOut {
    match v {
        Violation::WeightOutOfRange { edge, weight } => ViolationOut::Weight { edge: [edge.u, edge.v], weight: F17(*weight) },
        Violation::Degree { vertex, weight } => ViolationOut::Degree { vertex: *vertex, weight: F17(*weight) },
        Violation::Cut(c) => ViolationOut::Cut { subset: c.subset.clone(), crossing_weight: F17(c.crossing_weight) },
    }
}

fn run(cli: Cli) -> CmdResult {
    let seed = cli.seed;
    match cli.cmd {
        Command::Gen { n, d, out } => {
            let ps = generate_uniform(n, d, seed)?;
            emit(&out, &point_set_to_json(&ps))?;
        }
        Command::Solve { functional, input, k, g, pattern, out } => {
            let ps = read_point_set(&input)?;
            let v = cmd_solve(&ps, &functional, k, g, pattern)?;
            if out.is_some() {
                println!("{}", fmt17(v.length.0));
            }
            emit(&out, &to_json(&v)?)?;
        }
        Command::Oracle { functional, input, k, g, pattern, out } => {
            let ps = read_point_set(&input)?;
            emit(&out, &to_json(&cmd_oracle(&ps, &functional, k, g, pattern)?)?)?;
        }
        Command::Hk { input, include, exclude, out } => {
            let ps = read_point_set(&input)?;
            let mut c = Constraints::none();
            if let Some(p) = include {
                c.include.extend(read_edges(&p)?);
            }
            if let Some(p) = exclude {
                c.exclude.extend(read_edges(&p)?);
            }
            let (value, sol) = hk_value(&ps, &c)?;
            if out.is_some() {
                println!("{}", fmt17(value));
            }
            emit(&out, &sol.to_json())?;
        }
        Command::HkCheck { input } => {
            let text = std::fs::read_to_string(&input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let sol = FractionalSolution::from_json(&text)?;
            match hk_feasible(&sol) {
                Ok(()) => println!("{}", json!({ "feasible": true })),
                Err(v) => {
                    return Err(Failure { code: 2, body: serde_json::to_value(violation_out(&v)).map(|v| json!({ "feasible": false, "violation": v })).map_err(Error::from)? })
                }
            }
        }
        Command::Beta { functional, d, n, trials, out } => {
            let f = Functional::parse(&functional)?;
            let est = estimate_beta(&f, d, n, trials, seed)?;
            let text = match cli.format {
                Format::Json => to_json(&est)?,
                Format::Csv => format!(
                    "functional,d,n,trials,mean,ciLow,ciHigh,exactMode\n{},{},{},{},{},{},{},{}",
                    est.functional.name(),
                    d,
                    n,
                    trials,
                    fmt17(est.mean),
                    fmt17(est.ci95.0),
                    fmt17(est.ci95.1),
                    est.exact_mode
                ),
            };
            emit(&out, &text)?;
        }
        Command::Separate { d, n, trials, out } => {
            let rep = separation_suite(d, n, trials, seed)?;
            let text = match cli.format {
                Format::Json => to_json(&rep)?,
                Format::Csv => {
                    let mut s = String::from("lower,upper,meanGap,gapLow,gapHigh,violations,guaranteed\n");
                    for p in &rep.pairs {
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            p.lower,
                            p.upper,
                            fmt17(p.mean_gap),
                            fmt17(p.gap_ci95.0),
                            fmt17(p.gap_ci95.1),
                            p.per_instance_violations,
                            p.guaranteed
                        ));
                    }
                    s
                }
            };
            emit(&out, text.trim_end())?;
        }
        Command::Alpha { d, n, trials, out } => {
            let rep = mst_alpha(d, n, trials, seed)?;
            let text = match cli.format {
                Format::Json => to_json(&rep)?,
                Format::Csv => rep.to_csv(),
            };
            emit(&out, text.trim_end())?;
        }
        Command::Bnb { input, bound, incumbent, budget, out } => {
            let ps = read_point_set(&input)?;
            let incumbent = match incumbent {
                Incumbent::Oracle => IncumbentKind::Oracle,
                Incumbent::Patch2opt => IncumbentKind::Patch2Opt,
            };
            let opts = BnbOptions { incumbent, budget, ..BnbOptions::new(BoundKind::parse(&bound)?) };
            let r = solve_bnb(&ps, &opts)?;
            let v = BnbOut {
                bound: opts.bound.name(),
                length: F17(r.length),
                optimal: r.optimal,
                order: r.tour.order.clone(),
                stats: r.stats.clone(),
            };
            emit(&out, &to_json(&v)?)?;
            if !r.optimal {
                return Err(Error::BudgetExhausted { budget, best_bound: r.length }.into());
            }
        }
        Command::BnbGrowth { n, trials, bound, budget, out } => {
            let rows = growth_experiment(&n, trials, BoundKind::parse(&bound)?, seed, budget)?;
            let text = match cli.format {
                Format::Csv => growth_csv(&rows),
                Format::Json => {
                    to_json(&GrowthOut { rows: &rows, summary: summarize_growth(&rows) })?
                }
            };
            emit(&out, text.trim_end())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("{}", json!({ "error": e.to_string() }));
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}
