//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain binary
//! so the lines always reach the terminal.

use std::time::Instant;

use dpmatch::driver::{solve, SolveReport, SolverConfig};
use dpmatch::graph::{discretize, Graph, LeveledGraph};
use dpmatch::oddset::{gomory_hu, max_flow};
use dpmatch::oracle::{
    edge_rhs, initial_solution, lambda_of, MaximalParams, MicroAudit, MicroOracle, MicroOutcome, PackRows,
    SparseSystem,
};
use dpmatch::pst::{solve_covering, CoverResponse, CoveringOracle, CoveringOutcome, CoveringParams};
use dpmatch::seed::{derive, rng};
use dpmatch::sketch::{
    build_deferred, build_streaming_sparsifier, refine_deferred, RoundLedger, SparsifierParams,
};
use dpmatch::verify::{brute_force_bmatching, enumerate_cuts_check, exact_lp_values, BruteCaps, LpCaps};
use rand::seq::SliceRandom;
use rand::Rng;

const EPS: f64 = 1.0 / 16.0;
const SUITE_SEED: u64 = 0x5EED_2024;

/// 100 graphs: n in [6, 12], at most 40 edges, weights U[1, 100], b in {1, 2}.
fn suite() -> Vec<Graph> {
    (0..100)
        .map(|s| {
            let mut r = rng(SUITE_SEED, &[s]);
            let n = r.gen_range(6..=12usize);
            let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            pairs.shuffle(&mut r);
            let m = r.gen_range(n..=pairs.len().min(40));
            let edges: Vec<_> = pairs[..m].iter().map(|&(i, j)| (i, j, r.gen_range(1..=100u32) as f64)).collect();
            let b = (0..n).map(|_| r.gen_range(1..=2u32)).collect();
            Graph::new(n, &edges, b).unwrap()
        })
        .collect()
}

fn config(seed: u64, assert_mode: bool) -> SolverConfig {
    SolverConfig { seed, assert_mode, ..SolverConfig::default() }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn approximation(graphs: &[Graph], reports: &[SolveReport], elapsed: f64) -> Outcome {
    let mut worst = f64::INFINITY;
    let mut bad = 0;
    for (g, r) in graphs.iter().zip(reports) {
        let opt = brute_force_bmatching(g, BruteCaps::default()).unwrap().value;
        let ratio = r.weight / opt;
        worst = worst.min(ratio);
        let feasible = feasible(g, r);
        if !feasible || r.weight < (1.0 - 14.0 * EPS) * opt * (1.0 - 1e-12) {
            bad += 1;
        }
    }
    outcome(
        bad == 0 && elapsed < 300.0,
        format!("{bad} instances below 1-14eps, worst ratio {worst:.4}, solve time {elapsed:.1}s"),
    )
}

fn feasible(g: &Graph, r: &SolveReport) -> bool {
    let mut deg = vec![0u64; g.n];
    let mut w = 0.0;
    for &(i, j, t) in &r.matching {
        let Some(e) = g.edges.iter().find(|e| (e.i, e.j) == (i, j)) else { return false };
        deg[i] += t as u64;
        deg[j] += t as u64;
        w += e.w * t as f64;
    }
    deg.iter().zip(&g.b).all(|(&d, &c)| d <= c as u64) && (w - r.weight).abs() <= 1e-9 * w.max(1.0)
}

fn triangle() -> Outcome {
    let g = Graph::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 10.0 * EPS)], vec![1; 3]).unwrap();
    let v = exact_lp_values(&g, EPS, LpCaps::default()).unwrap();
    let r = solve(&g, &config(7, true)).unwrap();
    let pass = (v.beta_bipartite - (1.0 + 5.0 * EPS)).abs() <= 1e-9
        && (v.beta_star - 1.0).abs() <= 1e-12
        && r.weight == 1.0
        && r.violations() == 0;
    outcome(pass, format!("beta_bipartite {}, beta_star {}, solver weight {}", v.beta_bipartite, v.beta_star, r.weight))
}

fn complete(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn sparsifiers() -> Outcome {
    let mut plain = (0, 0);
    let mut deferred = (0, 0);
    for n in 5..=10 {
        let ends = complete(n);
        for &xi in &[0.25, 0.3] {
            let params = SparsifierParams::new(xi);
            for seed in 0..100u64 {
                let mut r = rng(seed, &[n as u64, 17]);
                let w: Vec<f64> = ends.iter().map(|_| r.gen_range(1.0..100.0)).collect();
                let edges: Vec<_> = ends.iter().zip(&w).map(|(&(i, j), &v)| (i, j, v)).collect();
                let h = build_streaming_sparsifier(n, &edges, &params, seed);
                plain.1 += 1;
                plain.0 += enumerate_cuts_check(&h, n, &edges, xi).unwrap() as usize;

                // Adversarial reveal: the promise is off by the full factor chi = 2,
                // upward on edges touching vertex 0 and downward elsewhere.
                let chi = 2.0;
                let d = build_deferred(n, &ends, &w, chi, 100.0, &params, seed).unwrap();
                let truth: Vec<f64> =
                    ends.iter().zip(&w).map(|(&(i, _), &v)| if i == 0 { v * chi } else { v / chi }).collect();
                let h = refine_deferred(&d, &truth).unwrap();
                let true_edges: Vec<_> = ends.iter().zip(&truth).map(|(&(i, j), &v)| (i, j, v)).collect();
                deferred.1 += 1;
                deferred.0 += enumerate_cuts_check(&h, n, &true_edges, xi).unwrap() as usize;
            }
        }
    }
    let rate = |p: (usize, usize)| p.0 as f64 / p.1 as f64;
    outcome(
        rate(plain) >= 0.99 && rate(deferred) >= 0.99,
        format!("streaming {}/{} trials, deferred {}/{} trials", plain.0, plain.1, deferred.0, deferred.1),
    )
}

/// Covering rows A (M x N) over the box {x >= 0, sum x <= 1}; the oracle puts
/// all mass on the best column.
struct SimplexOracle {
    a: Vec<Vec<f64>>,
}

impl CoveringOracle for SimplexOracle {
    type Point = Vec<f64>;
    fn query(&mut self, u: &[f64]) -> dpmatch::Result<CoverResponse<Vec<f64>>> {
        let cols = self.a[0].len();
        let score = |j: usize| self.a.iter().zip(u).map(|(row, w)| row[j] * w).sum::<f64>();
        let best = (0..cols).fold(0, |b, j| if score(j) > score(b) { j } else { b });
        let mut x = vec![0.0; cols];
        x[best] = 1.0;
        let activity = self.a.iter().map(|row| row[best]).collect();
        Ok(CoverResponse::Point { x, activity })
    }
}

fn covering() -> Outcome {
    let mut ok = 0;
    let mut worst_drift = 0.0f64;
    let mut max_steps = 0;
    for t in 0..10u64 {
        let mut r = rng(SUITE_SEED, &[4, t]);
        let (rows, cols) = (r.gen_range(3..=6usize), r.gen_range(2..=5usize));
        let a: Vec<Vec<f64>> = (0..rows).map(|_| (0..cols).map(|_| r.gen_range(0.5..1.5)).collect()).collect();
        // c = A x* for an interior point of the simplex, so the system is feasible.
        let mut xs: Vec<f64> = (0..cols).map(|_| r.gen_range(0.1..1.0)).collect();
        let total: f64 = xs.iter().sum();
        xs.iter_mut().for_each(|v| *v /= total);
        let c: Vec<f64> = a.iter().map(|row| row.iter().zip(&xs).map(|(p, q)| p * q).sum()).collect();
        let rho = a.iter().zip(&c).map(|(row, &cl)| row.iter().cloned().fold(0.0, f64::max) / cl).fold(0.0, f64::max);
        let x0: Vec<f64> = xs.iter().map(|v| v * 0.01).collect();
        let act0: Vec<f64> = c.iter().map(|v| v * 0.01).collect();
        let params = CoveringParams::new(EPS, 0.99, rho);
        let budget = params.budget(rows);
        match solve_covering(&c, x0, act0, params, &mut SimplexOracle { a }).unwrap() {
            CoveringOutcome::Feasible { summary, .. } => {
                worst_drift = worst_drift.max(summary.max_drift);
                max_steps = max_steps.max(summary.steps);
                if summary.lambda >= 1.0 - 3.0 * EPS && summary.steps <= budget && summary.max_drift <= EPS * (1.0 + 1e-9) {
                    ok += 1;
                }
            }
            CoveringOutcome::Infeasible { .. } => {}
        }
    }
    outcome(ok == 10, format!("{ok}/10 reached the target; max steps {max_steps}, worst log-drift {worst_drift:.5}"))
}

/// Audited micro-oracle calls at budgets low enough to reach the odd-set and
/// certificate branches, which full solves seldom visit.
fn oracle_sweep(lg: &LeveledGraph, seed: u64, audit: &mut MicroAudit) {
    let rows = PackRows::new(lg);
    let mut r = rng(seed, &[5]);
    let us: Vec<(usize, f64)> = (0..lg.edges.len()).map(|e| (e, r.gen_range(0.5..2.0))).collect();
    let sys = SparseSystem::new(lg, &rows, &us).unwrap();
    let top = lg.level_weight(lg.max_level);
    for zeta_kind in 0..2 {
        let zeta: Vec<f64> =
            (0..rows.len()).map(|_| if zeta_kind == 0 { 0.0 } else { r.gen_range(0.0..1.0) }).collect();
        let zq = sys.zq(&zeta).max(1e-12);
        for &bf in &[0.3, 0.6, 1.0, 1.5, 2.5, 4.0, 8.0] {
            for &rf in &[EPS / 16.0, 0.25, 0.6, 12.0 / 13.0] {
                let mut m = MicroOracle::new(&sys, &zeta, bf * top, EPS).unwrap();
                m.audit = Some(std::mem::replace(audit, MicroAudit::new(audit.max_n)));
                let varrho = if zeta_kind == 0 { rf } else { rf * sys.uc / zq };
                match m.run(varrho) {
                    Ok(MicroOutcome::DualStep { .. }) | Ok(MicroOutcome::PrimalCert(_)) => {}
                    Err(e) => {
                        let a = m.audit.as_mut().unwrap();
                        a.dual_failures += 1;
                        a.failures.push(format!("oracle error: {e}"));
                    }
                }
                *audit = m.audit.take().unwrap();
            }
        }
    }
}

fn oracle_contract(graphs: &[Graph], assert_reports: &[SolveReport]) -> (Outcome, MicroAudit) {
    let mut solve_violations = 0;
    let (mut steps, mut certs) = (0, 0);
    for r in assert_reports {
        let a = r.diagnostics.audit.as_ref().expect("assert mode records an audit");
        solve_violations += a.violations();
        steps += a.dual_steps;
        certs += a.certs;
    }
    let mut sweep = MicroAudit::new(10);
    for (s, g) in graphs.iter().enumerate() {
        oracle_sweep(&discretize(g, EPS).unwrap(), s as u64, &mut sweep);
    }
    let pass = solve_violations == 0 && sweep.violations() == 0 && sweep.certs > 0;
    let mut detail = format!(
        "solves: {steps} steps, {certs} certificates, {solve_violations} violations; sweep: {} steps, {} certificates, {} violations",
        sweep.dual_steps,
        sweep.certs,
        sweep.violations()
    );
    if let Some(f) = sweep.failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    (outcome(pass, detail), sweep)
}

fn initial_point(graphs: &[Graph], reports: &[SolveReport]) -> Outcome {
    let (mut checked, mut bad) = (0, 0);
    let mut detail = String::new();
    for (g, r) in graphs.iter().zip(reports) {
        if g.n > 10 {
            continue;
        }
        checked += 1;
        let lg = discretize(g, EPS).unwrap();
        let v = exact_lp_values(g, EPS, LpCaps { max_n: 10, max_n_layered: 0 }).unwrap();
        let beta_b = v.beta_bipartite_rescaled;
        let mut ledger = RoundLedger::new();
        let cfg = &r.config_echo;
        let mp = MaximalParams { c: cfg.c_maximal, ..MaximalParams::new(cfg.p) };
        let (x0, beta0) = initial_solution(&lg, &mp, derive(cfg.seed, &[1]), &mut ledger).unwrap();
        let lam = lambda_of(&x0, &lg).unwrap();
        let rows_ok = x0.edge_activity(&lg).iter().zip(edge_rhs(&lg)).all(|(a, c)| *a >= EPS / 256.0 * c * (1.0 - 1e-12));
        let lo = beta_b * EPS * EPS / 2048.0;
        let ok = beta0 == r.diagnostics.beta0 && lo <= beta0 * (1.0 + 1e-12) && beta0 <= beta_b / 4.0 * (1.0 + 1e-12) && rows_ok;
        if !ok {
            bad += 1;
            if detail.is_empty() {
                detail = format!("; first failure beta0 {beta0} vs [{lo}, {}], lambda {lam}", beta_b / 4.0);
            }
        }
    }
    outcome(bad == 0 && checked > 0, format!("{checked} instances with n <= 10, {bad} failures{detail}"))
}

fn resources(graphs: &[Graph], reports: &[SolveReport]) -> Outcome {
    let cap = 8 * (2.0f64 / EPS).ceil() as usize;
    let mut bad = 0;
    let (mut max_rounds, mut worst_space) = (0, 0.0f64);
    for (g, r) in graphs.iter().zip(reports) {
        let limit = r.config_echo.space_mult * (g.n as f64).powf(1.5) * ((g.total_b() + 2) as f64).log2();
        max_rounds = max_rounds.max(r.rounds);
        worst_space = worst_space.max(r.peak_space as f64 / limit);
        if r.rounds > cap || r.peak_space as f64 > limit {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("max rounds {max_rounds} (cap {cap}), peak space at most {:.0}% of limit", 100.0 * worst_space))
}

fn odd_sets(graphs: &[Graph], sweep: &MicroAudit, assert_reports: &[SolveReport]) -> Outcome {
    let mut families = sweep.families;
    let mut failures = sweep.family_failures;
    for r in assert_reports {
        let a = r.diagnostics.audit.as_ref().unwrap();
        families += a.families;
        failures += a.family_failures;
    }
    // Cut trees against direct max-flow on every pair.
    let (mut pairs, mut mismatches) = (0, 0);
    for (s, g) in graphs.iter().enumerate().filter(|(_, g)| g.n + 1 <= 10) {
        let size = g.n + 1;
        let mut cap = vec![vec![0i64; size]; size];
        for e in &g.edges {
            cap[e.i][e.j] = e.w as i64;
            cap[e.j][e.i] = e.w as i64;
        }
        let mut r = rng(SUITE_SEED, &[8, s as u64]);
        for i in 0..g.n {
            let c = r.gen_range(0..60i64);
            cap[i][g.n] = c;
            cap[g.n][i] = c;
        }
        let tree = gomory_hu(&cap);
        for a in 0..size {
            for c in a + 1..size {
                pairs += 1;
                if tree.min_cut(a, c) != max_flow(&cap, a, c).0 {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        failures == 0 && families > 0 && mismatches == 0 && pairs > 0,
        format!(
            "{families} families audited, {failures} failures, worst sparse slack {:.3e}; {pairs} cut-tree pairs, {mismatches} mismatches",
            sweep.worst_sparse_slack
        ),
    )
}

fn determinism(graphs: &[Graph], reports: &[SolveReport]) -> Outcome {
    let mut differ = 0;
    for (s, (g, r)) in graphs.iter().zip(reports).enumerate() {
        let again = solve(g, &config(s as u64, false)).unwrap();
        if serde_json::to_string(&again).unwrap() != serde_json::to_string(r).unwrap() {
            differ += 1;
        }
    }
    outcome(differ == 0, format!("{differ} of {} reports differ on repeat", graphs.len()))
}

fn main() {
    // Honor the libtest filter convention: skip when filtered out by name.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let graphs = suite();
    let start = Instant::now();
    let reports: Vec<SolveReport> = graphs.iter().enumerate().map(|(s, g)| solve(g, &config(s as u64, false)).unwrap()).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let assert_reports: Vec<SolveReport> =
        graphs.iter().enumerate().map(|(s, g)| solve(g, &config(s as u64, true)).unwrap()).collect();

    let (c5, sweep) = oracle_contract(&graphs, &assert_reports);
    let results = vec![
        ("end-to-end approximation", approximation(&graphs, &reports, elapsed)),
        ("triangle relaxation gap", triangle()),
        ("sparsifier fidelity", sparsifiers()),
        ("covering engine", covering()),
        ("micro oracle contract", c5),
        ("initial solution bounds", initial_point(&graphs, &reports)),
        ("rounds and space", resources(&graphs, &reports)),
        ("odd-set separation", odd_sets(&graphs, &sweep, &assert_reports)),
        ("determinism", determinism(&graphs, &reports)),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        println!("criterion {} [{}] {}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
        failed += !o.pass as usize;
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
