use std::collections::{BTreeMap, BTreeSet};

use super::config::SolverConfig;
use super::report::{Diagnostics, SolveReport, Termination};
use crate::error::{Error, Result};
use crate::graph::{discretize, Graph, LeveledGraph};
use crate::oracle::{
    edge_rhs, extract_integral, initial_solution, offline_bmatching, BMatching, DualIterate, MaximalParams,
    MicroAudit, MicroOracle, MicroOutcome, PackRows, PrimalCert, SparseSystem,
};
use crate::pst::{
    lagrangian_search, CoveringParams, LagrangeOutcome, MicroReply, Mixable, MwuState, PackingParams, PackingState,
};
use crate::seed::derive;
use crate::sketch::{build_deferred, refine_deferred, verify_switch, DeferredSketch, RoundLedger, SparsifierParams};

/// Multipliers below this are stored at this value; sketches accept
/// promises down to its reciprocal range.
const FLOOR: f64 = 1e-280;

/// Packing accuracy: inner points must reach z.Ax <= (1 + delta/2) z.d = 13/12 z.d.
const DELTA: f64 = 1.0 / 6.0;

enum Inner {
    Point(DualIterate),
    Cert(PrimalCert),
    Exhausted,
}

struct Ctx<'a> {
    rows: &'a PackRows,
    d: Vec<f64>,
    cfg: &'a SolverConfig,
    audit: Option<MicroAudit>,
    diag: Diagnostics,
}

fn max_ratio(act: &[f64], d: &[f64]) -> f64 {
    act.iter().zip(d).map(|(a, d)| a / d).fold(0.0, f64::max)
}

fn normalize(v: &mut [f64]) {
    let top = v.iter().cloned().fold(0.0, f64::max);
    if top > 0.0 {
        v.iter_mut().for_each(|x| *x /= top);
    }
}

impl Ctx<'_> {
    /// Lagrangian search over the micro oracle for fixed sparsifier and row multipliers.
    fn search(&mut self, sys: &SparseSystem, zeta: &[f64], beta: f64) -> Result<LagrangeOutcome<DualIterate, PrimalCert>> {
        let eps = self.cfg.epsilon;
        let mut micro = MicroOracle::new(sys, zeta, beta, eps)?;
        micro.audit = self.audit.take();
        let out = lagrangian_search(sys.uc, sys.zq(zeta), eps, |rho| {
            Ok(match micro.run(rho)? {
                MicroOutcome::DualStep { x, .. } => {
                    let (cover, pack) = sys.lag_terms(&x, zeta);
                    MicroReply::Step { x, cover, pack }
                }
                MicroOutcome::PrimalCert(c) => MicroReply::Cert(c),
            })
        });
        self.audit = micro.audit.take();
        let s = &mut self.diag.micro;
        s.zero += micro.stats.zero;
        s.vertex += micro.stats.vertex;
        s.odd_set += micro.stats.odd_set;
        s.cert += micro.stats.cert;
        self.diag.lagrangian_calls += micro.stats.zero + micro.stats.vertex + micro.stats.odd_set + micro.stats.cert;
        out
    }

    /// Packing MWU over the row system, each step answered by a Lagrangian search.
    fn inner_solve(&mut self, sys: &SparseSystem, beta: f64) -> Result<Inner> {
        let mut zeta0: Vec<f64> = self.d.iter().map(|d| 1.0 / d).collect();
        normalize(&mut zeta0);
        let mut x = match self.search(sys, &zeta0, beta)? {
            LagrangeOutcome::PrimalCert(c) => return Ok(Inner::Cert(c)),
            LagrangeOutcome::Inner { x, .. } => x,
        };
        let act = x.row_activity(self.rows);
        let start = max_ratio(&act, &self.d);
        if start <= 1.0 + 6.0 * DELTA {
            return Ok(Inner::Point(x));
        }
        let eps = self.cfg.epsilon;
        let params = PackingParams {
            delta: DELTA,
            delta0: start.max(1.0) * (1.0 + 1e-9),
            rho: (24.0 / eps + 24.0 / (eps * eps)) / 3.0,
            c_alpha: self.cfg.c_alpha,
            c_t: self.cfg.c_t,
            adaptive_width: self.cfg.adaptive_width,
            max_failures: 0,
        };
        let mut ps = PackingState::new(act, self.d.clone(), params)?;
        let mut steps = 0;
        while !ps.done() {
            if steps >= self.cfg.inner_step_cap {
                self.diag.packing_exhausted += 1;
                return Ok(Inner::Exhausted);
            }
            let z = ps.normalized_multipliers();
            match self.search(sys, &z, beta)? {
                LagrangeOutcome::PrimalCert(c) => return Ok(Inner::Cert(c)),
                LagrangeOutcome::Inner { x: xt, .. } => {
                    let sigma = ps.step(&xt.row_activity(self.rows))?;
                    x.mix(&xt, sigma);
                    steps += 1;
                    self.diag.packing_steps += 1;
                }
            }
        }
        Ok(Inner::Point(x))
    }
}

/// Candidate integral solutions, compared by input weight.
#[derive(Default)]
struct Best {
    matching: Option<BMatching>,
    weight: f64,
}

impl Best {
    fn offer(&mut self, lg: &LeveledGraph, m: BMatching) {
        let w: f64 = m.edges.iter().map(|x| lg.original_weight(x.edge) * x.mult as f64).sum();
        if self.matching.is_none() || w > self.weight {
            self.weight = w;
            self.matching = Some(m);
        }
    }
}

/// Maximum b-matching over a stored edge set, in level weights (for the
/// budget update) and in input weights (as a candidate answer).
fn harvest(lg: &LeveledGraph, stored: &[usize], threshold: usize) -> Result<(BMatching, BMatching)> {
    let map = |m: &mut BMatching| m.edges.iter_mut().for_each(|x| x.edge = stored[x.edge]);
    let scaled: Vec<_> = stored.iter().map(|&e| (lg.edges[e].i, lg.edges[e].j, lg.edge_weight(e))).collect();
    let orig: Vec<_> = stored.iter().map(|&e| (lg.edges[e].i, lg.edges[e].j, lg.original_weight(e))).collect();
    let mut a = offline_bmatching(&scaled, &lg.base.b, threshold)?;
    let mut b = offline_bmatching(&orig, &lg.base.b, threshold)?;
    map(&mut a);
    map(&mut b);
    Ok((a, b))
}

pub fn solve(g: &Graph, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let eps = cfg.epsilon;
    let lg = discretize(g, eps)?;
    if lg.edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = lg.n();
    let m = lg.edges.len();
    let rows = PackRows::new(&lg);
    let mut ledger = RoundLedger::new();
    let mp = MaximalParams { c: cfg.c_maximal, ..MaximalParams::new(cfg.p) };
    let (mut x, beta0) = initial_solution(&lg, &mp, derive(cfg.seed, &[1]), &mut ledger)?;
    let mut cp = CoveringParams::new(eps, 1.0 - eps / 256.0, 6.0);
    cp.c_alpha = cfg.c_alpha;
    cp.c_t = cfg.c_t;
    cp.adaptive_width = cfg.adaptive_width;
    let mut state = MwuState::new(x.edge_activity(&lg), edge_rhs(&lg), cp)?;

    let mut ctx = Ctx {
        rows: &rows,
        d: rows.rhs(&lg),
        cfg,
        audit: cfg.assert_mode.then(|| MicroAudit::new(cfg.audit_max_n)),
        diag: Diagnostics {
            beta0,
            init_rounds: ledger.rounds,
            space_limit: cfg.space_limit(n, g.total_b()),
            round_cap: cfg.round_cap(),
            ..Diagnostics::default()
        },
    };
    let sp = SparsifierParams { xi: eps / 16.0, c_k: cfg.c_k };
    let chi = cfg.drift_bound(n);
    let batch = cfg.batch(n);
    let mut beta = beta0;
    let mut best = Best::default();
    let mut last_harvest: Option<(Vec<usize>, BMatching)> = None;
    let (mut lambda_trace, mut beta_trace) = (Vec::new(), Vec::new());
    let mut round = 0u64;

    while !state.done() && ledger.rounds < cfg.round_cap() {
        round += 1;
        let logs = state.log_multipliers();
        let top0 = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let promise: Vec<f64> = logs.iter().map(|l| (l - top0).exp().max(FLOOR)).collect();

        // One round: every deferred sketch of the batch is built in a single pass.
        ledger.begin_round("deferred sparsifiers");
        let mut sketches: Vec<Vec<(&[usize], DeferredSketch)>> = Vec::with_capacity(batch);
        let mut stored: BTreeSet<usize> = BTreeSet::new();
        let mut space = 0;
        for q in 0..batch {
            let mut per_level = Vec::new();
            for (&k, ids) in &lg.levels {
                let ends: Vec<_> = ids.iter().map(|&e| (lg.edges[e].i, lg.edges[e].j)).collect();
                let pr: Vec<f64> = ids.iter().map(|&e| promise[e]).collect();
                let seed = derive(cfg.seed, &[2, round, q as u64, k as u64]);
                let sk = build_deferred(n, &ends, &pr, chi, 1.0 / FLOOR, &sp, seed)?;
                space += sk.stored_count();
                stored.extend(sk.stored.iter().map(|&p| ids[p]));
                per_level.push((ids.as_slice(), sk));
            }
            sketches.push(per_level);
        }
        ledger.record_space(space);
        ctx.diag.sparsifier_sizes.push(space);

        // Stored edges double as a candidate pool for an integral solution.
        let stored: Vec<usize> = stored.into_iter().collect();
        let scaled = match &last_harvest {
            Some((s, r)) if *s == stored => r.clone(),
            _ => {
                let (scaled, orig) = harvest(&lg, &stored, cfg.exact_threshold)?;
                best.offer(&lg, orig);
                best.offer(&lg, scaled.clone());
                last_harvest = Some((stored, scaled.clone()));
                scaled
            }
        };
        if scaled.weight > beta * (1.0 - eps) / (1.0 + eps) {
            beta = scaled.weight * (1.0 + eps) / (1.0 - eps);
            ctx.diag.harvest_updates += 1;
        }

        let phase0 = state.phase();
        for per_level in &sketches {
            if state.done() || state.phase() != phase0 {
                break;
            }
            let logs = state.log_multipliers();
            let u: Vec<f64> = logs.iter().map(|l| (l - top0).exp()).collect();
            let mut us: Vec<(usize, f64)> = Vec::new();
            let mut violated = false;
            for (ids, sk) in per_level {
                let reveal: Vec<f64> = ids.iter().map(|&e| u[e].max(FLOOR)).collect();
                match refine_deferred(sk, &reveal) {
                    Ok(h) => us.extend(h.edges.iter().map(|se| (ids[se.edge], se.value))),
                    Err(Error::PromiseViolation { .. }) => {
                        violated = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if violated {
                ctx.diag.promise_violations += 1;
                break;
            }
            us.sort_by_key(|p| p.0);
            let sys = SparseSystem::new(&lg, &rows, &us)?;

            let mut probes = 0;
            let point = loop {
                match ctx.inner_solve(&sys, beta)? {
                    Inner::Point(p) => break Some(p),
                    Inner::Exhausted => break None,
                    Inner::Cert(cert) => {
                        ctx.diag.certificates += 1;
                        match extract_integral(&cert, &lg, eps, beta, cfg.exact_threshold) {
                            Ok(found) => best.offer(&lg, found),
                            Err(Error::Contract(_)) => ctx.diag.certificate_shortfalls += 1,
                            Err(e) => return Err(e),
                        }
                        beta *= 1.0 + eps;
                        probes += 1;
                        if probes >= cfg.probe_cap {
                            break None;
                        }
                    }
                }
            };
            let Some(xt) = point else { continue };
            if cfg.assert_mode {
                let mut full = vec![0.0; m];
                for &(e, v) in &us {
                    full[e] = v;
                }
                let sc = verify_switch(&u, &full, &xt, &lg, eps)?;
                ctx.diag.switch_checks += 1;
                if sc.hypothesis && !sc.conclusion {
                    ctx.diag.switch_failures += 1;
                }
            }
            let info = state.step(&xt.edge_activity(&lg))?;
            x.mix(&xt, info.sigma);
        }
        lambda_trace.push(state.lambda());
        beta_trace.push(beta);
    }

    let mut diag = ctx.diag;
    diag.audit = ctx.audit;
    diag.outer_rounds = round as usize;
    diag.covering_steps = state.steps();
    diag.covering_phases = state.phases.len();
    diag.corollary_violations = state.corollary_violations;
    diag.max_drift = state.max_drift;
    diag.final_lambda = state.lambda();
    diag.dual_bound = x.converted_objective(&g.b) / state.lambda();
    if cfg.assert_mode && ledger.peak_space as f64 > diag.space_limit {
        return Err(Error::SpaceBudget { used: ledger.peak_space, limit: diag.space_limit as usize });
    }

    let chosen = best.matching.unwrap_or_default();
    let mut merged: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut rescaled_weight = 0.0;
    for mt in &chosen.edges {
        *merged.entry((mt.i.min(mt.j), mt.i.max(mt.j))).or_insert(0) += mt.mult;
        rescaled_weight += lg.edge_weight(mt.edge) * mt.mult as f64;
    }
    Ok(SolveReport {
        matching: merged.into_iter().map(|((i, j), t)| (i, j, t)).collect(),
        weight: best.weight,
        rescaled_weight,
        ratio_bound: rescaled_weight / diag.dual_bound,
        rounds: ledger.rounds,
        peak_space: ledger.peak_space,
        lambda_trace,
        beta_trace,
        config_echo: cfg.clone(),
        termination: if state.done() { Termination::Converged } else { Termination::RoundCap },
        diagnostics: diag,
    })
}
