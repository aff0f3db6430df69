use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::driver::{solve, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{discretize, load_graph, Graph};
use crate::oracle::{BMatching, Matched};
use crate::seed::derive;
use crate::sketch::{build_deferred, build_streaming_sparsifier, refine_deferred, RoundLedger, SparsifierParams};
use crate::verify::{brute_force_bmatching, exact_lp_values, BruteCaps, LpCaps};

#[derive(Parser, Debug)]
#[command(name = "dpmatch", version, about = "Approximate maximum-weight b-matching over simulated sketching rounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Edge list, one "i j w" per line.
    #[arg(long)]
    input: PathBuf,
    /// Capacities, one "i b_i" per line; absent vertices get 1.
    #[arg(long)]
    b: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compact single-line JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the solver and print its report.
    Solve {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1.0 / 16.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Audit every oracle output; any violation exits with status 1.
        #[arg(long = "assert")]
        assert_mode: bool,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long)]
        space_mult: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build a cut sparsifier of the weighted edge list.
    Sparsify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0.25)]
        xi: f64,
        /// Promise ratio of the deferred variant.
        #[arg(long, default_value_t = 2.0)]
        chi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample against the input weights as promises, then reveal `--values`.
        #[arg(long)]
        deferred: bool,
        /// Revealed values, one per edge in input order (deferred mode).
        #[arg(long)]
        values: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check a matching for feasibility and compare it to the optimum.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        /// A solve report or a bare [[i, j, mult], ...] array.
        #[arg(long)]
        matching: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Print graph statistics and exact reference values when small enough.
    Stats {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1.0 / 16.0)]
        epsilon: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Failure classes mapped to exit codes.
enum Fail {
    Usage(String),
    Contract(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_)
            | Error::Parse { .. }
            | Error::SelfLoop(_)
            | Error::DuplicateEdge(..)
            | Error::NonPositiveWeight { .. }
            | Error::BadCapacity(_)
            | Error::EmptyGraph
            | Error::InvalidParameter(_)
            | Error::Json(_) => Fail::Usage(e.to_string()),
            other => Fail::Contract(other.to_string()),
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn load(args: &GraphArgs) -> std::result::Result<Graph, Fail> {
    let edges = read(&args.input)?;
    let caps = args.b.as_deref().map(read).transpose()?;
    Ok(load_graph(&edges, caps.as_deref())?)
}

fn emit<T: Serialize>(value: &T, out: &OutArgs) -> std::result::Result<(), Fail> {
    let text = if out.json { serde_json::to_string(value) } else { serde_json::to_string_pretty(value) }
        .map_err(|e| Fail::Contract(e.to_string()))?;
    match &out.out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| Fail::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Parses a matching from a report object or a bare triple array.
fn parse_matching(text: &str) -> Result<Vec<(usize, usize, u32)>> {
    let v: Value = serde_json::from_str(text)?;
    let list = match &v {
        Value::Object(map) => map.get("matching").cloned().unwrap_or(Value::Null),
        other => other.clone(),
    };
    Ok(serde_json::from_value(list)?)
}

fn run_verify(g: &Graph, triples: &[(usize, usize, u32)]) -> Result<Value> {
    let mut m = BMatching::default();
    let mut unknown = Vec::new();
    for &(i, j, t) in triples {
        let found = g.edges.iter().position(|e| (e.i, e.j) == (i.min(j), i.max(j)) || (e.i, e.j) == (i, j) || (e.j, e.i) == (i, j));
        match found {
            Some(e) if i < g.n && j < g.n => {
                m.edges.push(Matched { edge: e, i, j, mult: t });
                m.weight += g.edges[e].w * t as f64;
            }
            _ => unknown.push((i, j)),
        }
    }
    let degree_feasible = unknown.is_empty() && m.degree_feasible(&g.b);
    let optimum = brute_force_bmatching(g, BruteCaps::default()).ok().map(|r| r.value);
    Ok(json!({
        "feasible": degree_feasible,
        "unknown_edges": unknown,
        "weight": m.weight,
        "optimum": optimum,
        "ratio": optimum.map(|o| if o > 0.0 { m.weight / o } else { 1.0 }),
    }))
}

fn run_stats(g: &Graph, epsilon: f64) -> Result<Value> {
    let lg = discretize(g, epsilon)?;
    let brute = brute_force_bmatching(g, BruteCaps::default()).ok().map(|r| r.value);
    let lp = exact_lp_values(g, epsilon, LpCaps::default()).ok();
    Ok(json!({
        "n": g.n,
        "m": g.edges.len(),
        "total_b": g.total_b(),
        "max_weight": lg.wstar,
        "retained_edges": lg.edges.len(),
        "dropped_edges": lg.dropped.len(),
        "levels": lg.levels.len(),
        "max_level": lg.max_level,
        "optimum": brute,
        "lp": lp,
    }))
}

fn dispatch(cli: Cli) -> std::result::Result<(), Fail> {
    match cli.command {
        Command::Solve { graph, epsilon, p, seed, assert_mode, max_rounds, space_mult, out } => {
            let g = load(&graph)?;
            let mut cfg = SolverConfig { epsilon, p, seed, assert_mode, max_rounds, ..SolverConfig::default() };
            if let Some(s) = space_mult {
                cfg.space_mult = s;
            }
            let report = solve(&g, &cfg)?;
            emit(&report, &out)?;
            if assert_mode && report.violations() > 0 {
                let failures = report.diagnostics.audit.as_ref().map(|a| a.failures.join("; ")).unwrap_or_default();
                return Err(Fail::Contract(format!("{} contract violations: {failures}", report.violations())));
            }
            Ok(())
        }
        Command::Sparsify { graph, xi, chi, seed, deferred, values, out } => {
            let g = load(&graph)?;
            if !(xi > 0.0 && xi < 1.0) {
                return Err(Fail::Usage(format!("xi {xi} outside (0, 1)")));
            }
            let params = SparsifierParams::new(xi);
            let weighted: Vec<_> = g.edges.iter().map(|e| (e.i, e.j, e.w)).collect();
            let mut ledger = RoundLedger::new();
            ledger.begin_round("sparsify");
            let (h, stored) = if deferred {
                let ends: Vec<_> = g.edges.iter().map(|e| (e.i, e.j)).collect();
                let promise: Vec<_> = g.edges.iter().map(|e| e.w).collect();
                let lo = promise.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = promise.iter().cloned().fold(0.0, f64::max);
                let lambda0 = (1.0 / lo).max(hi).max(1.0);
                let d = build_deferred(g.n, &ends, &promise, chi, lambda0, &params, seed)?;
                let revealed: Vec<f64> = match &values {
                    Some(p) => read(p)?
                        .split_whitespace()
                        .map(|t| t.parse::<f64>().map_err(|_| Fail::Usage(format!("bad value {t:?}"))))
                        .collect::<std::result::Result<_, _>>()?,
                    None => promise.clone(),
                };
                (refine_deferred(&d, &revealed)?, d.stored_count())
            } else {
                let h = build_streaming_sparsifier(g.n, &weighted, &params, derive(seed, &[]));
                let s = h.edges.len();
                (h, s)
            };
            ledger.record_space(stored);
            let edges: Vec<_> = h.edges.iter().map(|e| (e.i, e.j, e.value)).collect();
            emit(
                &json!({
                    "edges": edges,
                    "stats": { "edges_stored": stored, "rounds": ledger.rounds, "peak_space": ledger.peak_space },
                }),
                &out,
            )
        }
        Command::Verify { graph, matching, out } => {
            let g = load(&graph)?;
            let triples = parse_matching(&read(&matching)?)?;
            let report = run_verify(&g, &triples)?;
            emit(&report, &out)?;
            if report["feasible"] != json!(true) {
                return Err(Fail::Contract("matching is infeasible".into()));
            }
            Ok(())
        }
        Command::Stats { graph, epsilon, out } => {
            let g = load(&graph)?;
            emit(&run_stats(&g, epsilon)?, &out)
        }
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Fail::Contract(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
