//! Acceptance suite: analytic results against brute-force and Monte Carlo
//! oracles that share no code with the solver.
//!
//! Each criterion returns a [`CriterionReport`]; runtime limits count toward
//! the verdict.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::channel::{derive_success_probs, LinkModel, SuccessProbs};
use crate::presets::{
    primary_mpr, secondary_mpr, Preset, FIG5_DELTAS, FIG6_P_BAR_P_C, FIG7_LAMBDA_P,
};
use crate::rates::{
    busy_success, delay_s1, delay_sf1, feedback_chain, s1_primary_rate, s1_secondary_rate,
    s2_rates, sf1_secondary_rate_inclusive, AccessPolicy, Traffic,
};
use crate::sim::{run, Dominance, EnergyModel, SimConfig};
use crate::solver::{
    check_quasiconcavity, closed_form_s1_delay_ps0, closed_form_s1_ps0, closed_form_sf_ps0,
    conventional_point, optimize_s1, optimize_s1_delay, optimize_sf1, optimize_sf_delay,
    region_point, s1_objective, s2_curve, sf_objective, stability_region, uniform_grid,
    RegionCurve, SolverOptions,
};

pub const CRITERIA: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] AC-{} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Slots per simulation run.
    pub sim_slots: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            sim_slots: 1_000_000,
        }
    }
}

/// Runs one criterion by number; `None` for an unknown id.
pub fn run_criterion(id: u8, opts: &ValidationOptions) -> Option<CriterionReport> {
    let start = Instant::now();
    let (name, limit, outcome): (&str, Option<f64>, Outcome) = match id {
        1 => (
            "closed forms vs grid search",
            Some(10.0),
            closed_forms(opts.seed),
        ),
        2 => (
            "bisection solver vs grid oracle",
            Some(60.0),
            solver_vs_oracle(),
        ),
        3 => ("region dominance", None, region_dominance()),
        4 => ("conventional convergence", None, conventional_convergence()),
        5 => ("MPR monotonicity", None, mpr_monotonicity()),
        6 => ("energy sweep", None, energy_sweep()),
        7 => ("delay constraint", None, delay_constraint()),
        8 => (
            "simulation vs analytics",
            Some(300.0),
            sim_vs_analytics(opts),
        ),
        9 => ("energy approximation bound", None, energy_bound(opts)),
        10 => ("quasiconcavity", None, quasiconcavity(opts.seed)),
        11 => ("channel Monte Carlo", None, channel_oracle(opts.seed)),
        _ => return None,
    };
    let seconds = start.elapsed().as_secs_f64();
    let mut passed = outcome.passed;
    let mut detail = outcome.detail;
    if let Some(limit) = limit {
        if seconds >= limit {
            passed = false;
            detail.push_str(&format!("; runtime {seconds:.1} s exceeds {limit} s"));
        }
    }
    Some(CriterionReport {
        id,
        name: name.into(),
        passed,
        detail,
        seconds,
    })
}

pub fn run_all(opts: &ValidationOptions) -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .filter_map(|&id| run_criterion(id, opts))
        .collect()
}

struct Outcome {
    passed: bool,
    detail: String,
}

/// Tracks the worst violation of a family of checks.
#[derive(Default)]
struct Worst {
    failures: usize,
    checks: usize,
    gap: f64,
    at: String,
}

impl Worst {
    /// Records a signed gap; positive values are violations of `limit`.
    fn record(&mut self, gap: f64, limit: f64, at: impl FnOnce() -> String) {
        self.checks += 1;
        if gap > limit || gap.is_nan() {
            self.failures += 1;
        }
        if gap > self.gap || gap.is_nan() || self.checks == 1 {
            self.gap = gap;
            self.at = at();
        }
    }

    fn fail(&mut self, at: String) {
        self.checks += 1;
        self.failures += 1;
        self.gap = f64::INFINITY;
        self.at = at;
    }

    fn outcome(&self, what: &str) -> Outcome {
        Outcome {
            passed: self.failures == 0 && self.checks > 0,
            detail: format!(
                "{} of {} checks failed; worst {what} {:.3e} at {}",
                self.failures, self.checks, self.gap, self.at
            ),
        }
    }
}

fn merge(parts: Vec<Outcome>) -> Outcome {
    Outcome {
        passed: parts.iter().all(|p| p.passed),
        detail: parts
            .into_iter()
            .map(|p| p.detail)
            .collect::<Vec<_>>()
            .join(" | "),
    }
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

fn lambda_grid() -> Vec<f64> {
    grid(0.0, 0.68, 0.02)
}

fn harm(probs: &SuccessProbs, t: &Traffic) -> f64 {
    t.lambda_e * (probs.p_bar_p - probs.p_bar_p_c)
}

fn random_case(rng: &mut ChaCha8Rng) -> (SuccessProbs, Traffic) {
    let p_bar_p = rng.random_range(0.4..1.0);
    let p_bar_0s = rng.random_range(0.3..1.0);
    let p_bar_1s = rng.random_range(0.2..p_bar_0s);
    let probs = SuccessProbs {
        p_bar_p,
        p_bar_p_c: rng.random_range(0.0..p_bar_p),
        p_bar_0s,
        p_bar_1s,
        p_bar_0s_c: rng.random_range(0.0..p_bar_0s),
        p_bar_1s_c: rng.random_range(0.0..p_bar_1s),
    };
    let traffic = Traffic {
        lambda_p: rng.random_range(0.0..0.95 * p_bar_p),
        lambda_s: 0.0,
        lambda_e: rng.random_range(0.05..1.0),
        p_fa: rng.random_range(0.0..0.1),
        p_md: rng.random_range(0.0..0.1),
    };
    (probs, traffic)
}

/// Maximum of `f` over `steps + 1` equally spaced points of `[0, hi]`.
fn line_max(hi: f64, steps: usize, f: impl Fn(f64) -> Option<f64>) -> Option<f64> {
    (0..=steps)
        .filter_map(|k| f(hi * k as f64 / steps as f64))
        .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

fn ps0(p_t: f64, p_r: f64) -> AccessPolicy {
    AccessPolicy {
        p_t,
        p_r,
        ..AccessPolicy::SILENT
    }
}

fn closed_forms(seed: u64) -> Outcome {
    const TOL: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut sf, mut delay) = (Worst::default(), Worst::default(), Worst::default());
    let pr_grid = uniform_grid(101);
    for case in 0..50 {
        let (probs, t) = random_case(&mut rng);
        let lambda = t.lambda_p;
        let ell = harm(&probs, &t);
        let cap = |floor: f64| {
            if ell > 0.0 {
                ((probs.p_bar_p - floor) / ell).min(1.0)
            } else {
                1.0
            }
        };

        let oracle = line_max(cap(lambda), 1000, |p| {
            s1_secondary_rate(&ps0(p, 0.0), &probs, &t).ok()
        });
        match (closed_form_s1_ps0(&probs, &t, lambda), oracle) {
            (Ok(r), Some(o)) => s1.record((r.best_value - o).abs(), TOL, || format!("case {case}")),
            (r, o) => s1.fail(format!(
                "case {case}: closed form {:?} vs oracle {o:?}",
                r.is_ok()
            )),
        }

        // Primary stability at fixed p_r bounds p_t from above.
        let mut best: Option<f64> = None;
        for &p_r in &pr_grid {
            let gamma = probs.p_bar_p - ell * p_r;
            if gamma < 0.0 {
                continue;
            }
            let hi = if lambda == 0.0 || ell == 0.0 {
                1.0
            } else {
                ((lambda * probs.p_bar_p + (1.0 - lambda) * gamma - lambda) / (lambda * ell))
                    .min(1.0)
            };
            if hi < 0.0 {
                continue;
            }
            let v = line_max(hi, 1000, |p| {
                sf1_secondary_rate_inclusive(&ps0(p, p_r), &probs, &t).ok()
            });
            if let Some(v) = v {
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
        match (closed_form_sf_ps0(&probs, &t, lambda, &pr_grid), best) {
            (Ok(r), Some(o)) => sf.record((r.best_value - o).abs(), TOL, || format!("case {case}")),
            (r, o) => sf.fail(format!(
                "case {case}: closed form {:?} vs oracle {o:?}",
                r.is_ok()
            )),
        }

        let d = rng.random_range(1.2..10.0);
        let required = lambda + (1.0 - lambda) / d;
        let cf = closed_form_s1_delay_ps0(&probs, &t, lambda, d);
        if required > probs.p_bar_p {
            if cf.is_ok() {
                delay.fail(format!("case {case}: infeasible delay bound accepted"));
            } else {
                delay.record(0.0, TOL, || format!("case {case}"));
            }
            continue;
        }
        let oracle = line_max(cap(required), 1000, |p| {
            s1_secondary_rate(&ps0(p, 0.0), &probs, &t).ok()
        });
        match (cf, oracle) {
            (Ok(r), Some(o)) => delay.record((r.best_value - o).abs(), TOL, || {
                format!("case {case}, D = {d:.3}")
            }),
            (r, o) => delay.fail(format!(
                "case {case}: closed form {:?} vs oracle {o:?}",
                r.is_ok()
            )),
        }
    }
    merge(vec![
        s1.outcome("S1 gap"),
        sf.outcome("feedback gap"),
        delay.outcome("delay gap"),
    ])
}

/// Compass search with pairwise diagonal moves, from a feasible start.
fn pattern_search(v: &dyn Fn(&[f64]) -> Option<f64>, start: Vec<f64>, fx: f64) -> f64 {
    let n = start.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[i] = s;
            dirs.push(d);
        }
        for j in i + 1..n {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; n];
                d[i] = a;
                d[j] = b;
                dirs.push(d);
            }
        }
    }
    let (mut x, mut fx) = (start, fx);
    let mut step = 0.05;
    let mut moves = 0;
    while step > 1e-10 && moves < 50_000 {
        let improved = dirs.iter().find_map(|d| {
            let y: Vec<f64> = x
                .iter()
                .zip(d)
                .map(|(xi, di)| (xi + step * di).clamp(0.0, 1.0))
                .collect();
            v(&y).filter(|&fy| fy > fx).map(|fy| (y, fy))
        });
        match improved {
            Some((y, fy)) => {
                x = y;
                fx = fy;
                moves += 1;
            }
            None => step *= 0.5,
        }
    }
    fx
}

/// Coarse grid over the unit box followed by pattern search from the best
/// grid points.
fn box_oracle(v: &dyn Fn(&[f64]) -> Option<f64>, dim: usize) -> Option<f64> {
    const POINTS: usize = 11;
    const STARTS: usize = 8;
    let mut top: Vec<(f64, Vec<f64>)> = Vec::new();
    let total = POINTS.pow(dim as u32);
    for idx in 0..total {
        let mut rest = idx;
        let x: Vec<f64> = (0..dim)
            .map(|_| {
                let k = rest % POINTS;
                rest /= POINTS;
                k as f64 / (POINTS - 1) as f64
            })
            .collect();
        if let Some(fx) = v(&x) {
            if top.len() < STARTS || fx > top[top.len() - 1].0 {
                top.push((fx, x));
                top.sort_by(|a, b| b.0.total_cmp(&a.0));
                top.truncate(STARTS);
            }
        }
    }
    top.into_iter()
        .map(|(fx, x)| pattern_search(v, x, fx))
        .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

fn policy5(x: &[f64]) -> AccessPolicy {
    AccessPolicy {
        p_s: x[0],
        p_t: x[1],
        p_f: x[2],
        p_b: x[3],
        p_r: x.get(4).copied().unwrap_or(0.0),
    }
}

fn solver_vs_oracle() -> Outcome {
    const TOL: f64 = 1e-4;
    let opts = SolverOptions::default();
    let (mut s1, mut sf) = (Worst::default(), Worst::default());
    for preset in [Preset::Fig3, Preset::Fig4] {
        let probs = preset.probs();
        for lambda in grid(0.0, 0.6, 0.1) {
            let t = preset.traffic().with_lambda_p(lambda);
            let at = || format!("{preset}, lambda_p = {lambda:.1}");
            let v1 = |x: &[f64]| s1_secondary_rate(&policy5(x), &probs, &t).ok();
            match (optimize_s1(&probs, &t, lambda, &opts), box_oracle(&v1, 4)) {
                (Ok(r), Some(o)) => s1.record((r.best_value - o).abs(), TOL, at),
                _ => s1.fail(at()),
            }
            let vf = |x: &[f64]| sf1_secondary_rate_inclusive(&policy5(x), &probs, &t).ok();
            match (optimize_sf1(&probs, &t, lambda, &opts), box_oracle(&vf, 5)) {
                (Ok(r), Some(o)) => sf.record((r.best_value - o).abs(), TOL, at),
                _ => sf.fail(at()),
            }
        }
    }
    merge(vec![s1.outcome("S1 gap"), sf.outcome("feedback gap")])
}

fn region_dominance() -> Outcome {
    const SLACK: f64 = 1e-6;
    let preset = Preset::Fig3;
    let (probs, t) = (preset.probs(), preset.traffic());
    let opts = SolverOptions::default();
    let lambdas = lambda_grid();
    let fb = stability_region(&probs, &t, &lambdas, true, &opts);
    let nofb = stability_region(&probs, &t, &lambdas, false, &opts);
    let s2 = s2_curve(&probs, &t, &lambdas);
    let mut w = Worst::default();
    for &l in &lambdas {
        let at = || format!("lambda_p = {l:.2}");
        match (fb.at(l), nofb.at(l), s2.at(l)) {
            (Some(a), Some(b), Some(c)) => {
                let gap = (b.lambda_s_max - a.lambda_s_max).max(c.lambda_s_max - b.lambda_s_max);
                w.record(gap, SLACK, at);
            }
            _ => w.fail(at()),
        }
    }
    w.outcome("ordering violation")
}

fn conventional_convergence() -> Outcome {
    const TOL: f64 = 1e-4;
    let preset = Preset::Fig4;
    let (probs, t) = (preset.probs(), preset.traffic());
    let opts = SolverOptions::default();
    let target = AccessPolicy::conventional();
    let (mut value, mut policy) = (Worst::default(), Worst::default());
    for l in grid(0.475, 0.675, 0.025) {
        let Some(conv) = conventional_point(&probs, &t, l) else {
            value.fail(format!("conventional infeasible at lambda_p = {l:.3}"));
            continue;
        };
        for feedback in [false, true] {
            let at = || format!("lambda_p = {l:.3}, feedback = {feedback}");
            let Some(p) = region_point(&probs, &t, l, feedback, &opts) else {
                value.fail(at());
                continue;
            };
            value.record((p.lambda_s_max - conv.lambda_s_max).abs(), TOL, at);
            let q = p.policy;
            let dist = [
                q.p_s - target.p_s,
                q.p_t - target.p_t,
                q.p_f - target.p_f,
                q.p_b - target.p_b,
                q.p_r - target.p_r,
            ]
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()));
            policy.record(dist, TOL, || format!("{} with {:?}", at(), q));
        }
    }
    merge(vec![
        value.outcome("throughput gap"),
        policy.outcome("policy distance"),
    ])
}

/// Checks that each curve dominates the previous one pointwise.
fn nested(curves: &[(String, RegionCurve)], lambdas: &[f64], slack: f64, w: &mut Worst) {
    for pair in curves.windows(2) {
        let ((na, a), (nb, b)) = (&pair[0], &pair[1]);
        for &l in lambdas {
            let va = a.at(l).map_or(0.0, |p| p.lambda_s_max);
            let vb = b.at(l).map_or(0.0, |p| p.lambda_s_max);
            w.record(va - vb, slack, || {
                format!("{na} -> {nb} at lambda_p = {l:.2}")
            });
        }
    }
}

fn mpr_monotonicity() -> Outcome {
    const SLACK: f64 = 1e-6;
    let opts = SolverOptions::default();
    let lambdas = lambda_grid();
    let mut w = Worst::default();
    let t5 = Preset::Fig5.traffic();
    for feedback in [false, true] {
        let curves: Vec<(String, RegionCurve)> = FIG5_DELTAS
            .iter()
            .map(|&d| {
                (
                    format!("delta {d}{}", if feedback { " (feedback)" } else { "" }),
                    stability_region(&secondary_mpr(d), &t5, &lambdas, feedback, &opts),
                )
            })
            .collect();
        nested(&curves, &lambdas, SLACK, &mut w);
    }
    let t6 = Preset::Fig6.traffic();
    let curves: Vec<(String, RegionCurve)> = FIG6_P_BAR_P_C
        .iter()
        .map(|&c| {
            (
                format!("p_bar_p_c {c}"),
                stability_region(&primary_mpr(c), &t6, &lambdas, false, &opts),
            )
        })
        .collect();
    nested(&curves, &lambdas, SLACK, &mut w);
    w.outcome("decrease")
}

fn energy_sweep() -> Outcome {
    const SLACK: f64 = 1e-6;
    const TOL: f64 = 1e-4;
    let preset = Preset::Fig7;
    let probs = preset.probs();
    let energies: Vec<f64> = grid(0.01, 0.05, 0.01)
        .into_iter()
        .chain(grid(0.1, 1.0, 0.05))
        .collect();
    let full = SolverOptions::default();
    let random = SolverOptions::default().without_sensing();
    let value = |lambda_e: f64, feedback: bool, opts: &SolverOptions| {
        let t = Traffic {
            lambda_e,
            ..preset.traffic()
        };
        region_point(&probs, &t, FIG7_LAMBDA_P, feedback, opts).map_or(0.0, |p| p.lambda_s_max)
    };
    let (mut mono, mut equal) = (Worst::default(), Worst::default());
    for (name, opts) in [("S", &full), ("S_R", &random)] {
        let plain: Vec<f64> = energies.iter().map(|&e| value(e, false, opts)).collect();
        let fb: Vec<f64> = energies.iter().map(|&e| value(e, true, opts)).collect();
        for (label, curve) in [(name.to_string(), &plain), (format!("{name}^f"), &fb)] {
            for k in 1..energies.len() {
                mono.record(curve[k - 1] - curve[k], SLACK, || {
                    format!("{label} at lambda_e = {:.2}", energies[k])
                });
            }
        }
        for (k, &e) in energies
            .iter()
            .enumerate()
            .filter(|(_, &e)| e <= 0.05 + 1e-12)
        {
            equal.record((fb[k] - plain[k]).abs(), TOL, || {
                format!("{name} at lambda_e = {e:.2}")
            });
        }
    }
    merge(vec![
        mono.outcome("decrease"),
        equal.outcome("feedback gap at low energy"),
    ])
}

fn delay_constraint() -> Outcome {
    const SLACK: f64 = 1e-6;
    const TOL: f64 = 1e-4;
    let preset = Preset::Fig8;
    let (probs, t) = (preset.probs(), preset.traffic());
    let opts = SolverOptions::default();
    let (mut order, mut limit) = (Worst::default(), Worst::default());
    for l in grid(0.0, 0.65, 0.05) {
        for feedback in [false, true] {
            let solve = |d: f64| {
                let r = if feedback {
                    optimize_sf_delay(&probs, &t, l, d, &opts)
                } else {
                    optimize_s1_delay(&probs, &t, l, d, &opts)
                };
                r.map_or(0.0, |r| r.best_value)
            };
            let at = || format!("lambda_p = {l:.2}, feedback = {feedback}");
            order.record(solve(2.0) - solve(4.0), SLACK, at);
            let free = if feedback {
                optimize_sf1(&probs, &t, l, &opts)
            } else {
                optimize_s1(&probs, &t, l, &opts)
            }
            .map_or(0.0, |r| r.best_value);
            limit.record((solve(1e6) - free).abs(), TOL, at);
        }
    }
    merge(vec![
        order.outcome("D = 2 excess over D = 4"),
        limit.outcome("gap to the unconstrained optimum"),
    ])
}

fn sim_config(
    opts: &ValidationOptions,
    seed: u64,
    dominance: Dominance,
    feedback: bool,
) -> SimConfig {
    SimConfig {
        dominance,
        feedback_enabled: feedback,
        energy_model: EnergyModel::Md1Approx,
        ..SimConfig::new(opts.sim_slots, seed)
    }
}

fn rel_err(empirical: f64, analytic: f64) -> f64 {
    ((empirical - analytic) / analytic).abs()
}

/// Policies and loads for the simulation cross-checks, all strictly inside
/// the stability region.
const SIM_POINTS: [(f64, [f64; 5]); 5] = [
    (0.3, [0.0, 1.0, 0.0, 0.0, 0.3]),
    (0.2, [0.5, 0.6, 0.9, 0.2, 0.0]),
    (0.1, [1.0, 0.0, 1.0, 0.3, 1.0]),
    (0.35, [0.3, 0.2, 0.8, 0.1, 0.5]),
    (0.25, [0.8, 0.5, 0.7, 0.5, 0.8]),
];

fn sim_vs_analytics(opts: &ValidationOptions) -> Outcome {
    const REL: f64 = 0.02;
    let preset = Preset::Fig4;
    let probs = preset.probs();
    let (mut rates, mut delays, mut states) =
        (Worst::default(), Worst::default(), Worst::default());
    for (k, &(lambda, x)) in SIM_POINTS.iter().enumerate() {
        let policy = policy5(&x);
        let t = preset.traffic().with_lambda_p(lambda);
        let seed = opts.seed.wrapping_add(k as u64);

        // No feedback, saturated secondary.
        let at = |s: &str| format!("{s} point {k}");
        let mu_p = s1_primary_rate(&policy, &probs, &t);
        match (
            s1_secondary_rate(&policy, &probs, &t),
            run(
                &sim_config(opts, seed, Dominance::SaturateSecondary, false),
                &policy,
                &probs,
                &t,
            ),
        ) {
            (Ok(mu_s), Ok(r)) if lambda < 0.8 * mu_p => {
                rates.record(rel_err(r.mu_p.mean, mu_p), REL, || at("S1 mu_p"));
                rates.record(rel_err(r.mu_s.mean, mu_s), REL, || at("S1 mu_s"));
                let d = delay_s1(&policy, &probs, &t).d_p;
                delays.record(rel_err(r.mean_delay_p.mean, d), REL, || at("S1"));
            }
            _ => rates.fail(at("S1 (not interior)")),
        }

        // Feedback, saturated secondary.
        match (
            feedback_chain(&policy, &probs, &t),
            sf1_secondary_rate_inclusive(&policy, &probs, &t),
            run(
                &sim_config(opts, seed, Dominance::SaturateSecondary, true),
                &policy,
                &probs,
                &t,
            ),
        ) {
            (Ok(chain), Ok(mu_s), Ok(r)) if chain.pi0 > 0.2 => {
                // Successes per transmission attempt of the primary.
                let mu_p = lambda / (1.0 - chain.pi0);
                rates.record(rel_err(r.mu_p.mean, mu_p), REL, || at("S1f mu_p"));
                rates.record(rel_err(r.mu_s.mean, mu_s), REL, || at("S1f mu_s"));
                let d = delay_sf1(&policy, &probs, &t).d_p;
                delays.record(rel_err(r.mean_delay_p.mean, d), REL, || at("S1f"));
                for (name, est, exact) in [
                    ("empty", r.empty_freq_p, chain.pi0),
                    (
                        "first transmission",
                        r.first_transmission_freq,
                        chain.sum_pi,
                    ),
                    ("retransmission", r.retransmission_freq, chain.sum_eps),
                ] {
                    let se = est.std_error(r.batches);
                    states.record((est.mean - exact).abs() / se, 3.0, || {
                        format!("S1f point {k} {name} (in standard errors)")
                    });
                }
            }
            _ => rates.fail(at("S1f (not interior)")),
        }

        // Saturated primary, secondary at 70% of its service rate.
        let mu_s = t.lambda_e * busy_success(&policy, &probs, &t);
        let t2 = t.with_lambda_s(0.7 * mu_s);
        match (
            s2_rates(&policy, &probs, &t2),
            run(
                &sim_config(opts, seed, Dominance::SaturatePrimary, false),
                &policy,
                &probs,
                &t2,
            ),
        ) {
            (Ok(a), Ok(r)) if mu_s > 0.0 => {
                rates.record(rel_err(r.mu_p.mean, a.mu_p), REL, || at("S2 mu_p"));
                rates.record(rel_err(r.mu_s.mean, a.mu_s), REL, || at("S2 mu_s"));
            }
            _ => rates.fail(at("S2 (not interior)")),
        }
    }
    merge(vec![
        rates.outcome("relative rate error"),
        delays.outcome("relative delay error"),
        states.outcome("state frequency deviation"),
    ])
}

fn energy_bound(opts: &ValidationOptions) -> Outcome {
    let preset = Preset::Fig4;
    let probs = preset.probs();
    let mut w = Worst::default();
    for (k, &(lambda, x)) in SIM_POINTS.iter().enumerate() {
        for feedback in [false, true] {
            let policy = policy5(&x);
            let t = preset.traffic().with_lambda_p(lambda);
            let seed = opts.seed.wrapping_add(100 + k as u64);
            let mut cfg = sim_config(opts, seed, Dominance::SaturateSecondary, feedback);
            let approx = run(&cfg, &policy, &probs, &t);
            cfg.energy_model = EnergyModel::Exact;
            let exact = run(&cfg, &policy, &probs, &t);
            let at = || format!("point {k}, feedback = {feedback}");
            match (exact, approx) {
                (Ok(e), Ok(a)) => {
                    let se = (e.mu_s.std_error(e.batches).powi(2)
                        + a.mu_s.std_error(a.batches).powi(2))
                    .sqrt();
                    // Deficit of the exact model in units of 1.96 standard errors.
                    w.record((a.mu_s.mean - e.mu_s.mean) / (1.96 * se), 1.0, at);
                }
                _ => w.fail(at()),
            }
        }
    }
    w.outcome("normalized deficit")
}

fn quasiconcavity(seed: u64) -> Outcome {
    const SEGMENTS: usize = 10_000;
    let mut parts = Vec::new();
    let mut all = true;
    for preset in [Preset::Fig3, Preset::Fig4] {
        let probs = preset.probs();
        for lambda in [0.2, 0.4] {
            let t = preset.traffic().with_lambda_p(lambda);
            for p_s in [0.0, 0.5, 1.0] {
                let s1 = check_quasiconcavity(
                    s1_objective(&probs, &t, p_s),
                    &[0.0; 3],
                    &[1.0; 3],
                    SEGMENTS,
                    seed,
                );
                let sf = check_quasiconcavity(
                    sf_objective(&probs, &t, p_s),
                    &[0.0; 4],
                    &[1.0; 4],
                    SEGMENTS,
                    seed,
                );
                for (name, r) in [("S1", s1), ("S1f", sf)] {
                    if !r.passed {
                        all = false;
                        let worst = r.counterexample.as_ref().map_or(0.0, |c| c.violation());
                        parts.push(format!(
                            "{name} {preset} lambda_p = {lambda} p_s = {p_s}: {}/{} violations, worst {worst:.3e}",
                            r.violations, r.segments_checked
                        ));
                    }
                }
            }
        }
    }
    let control =
        check_quasiconcavity(|x| Some((6.0 * x[0]).sin()), &[0.0], &[1.0], SEGMENTS, seed);
    if control.passed {
        all = false;
        parts.push("sin control was not rejected".into());
    }
    if parts.is_empty() {
        parts.push("all objectives passed; sin control rejected".into());
    }
    Outcome {
        passed: all,
        detail: parts.join("; "),
    }
}

/// Link used for the channel cross-check: rate 1 bit/s/Hz, sensing takes 5%
/// of the slot, mean SNRs between 1 and 3.
pub fn reference_link() -> LinkModel {
    LinkModel {
        bits_per_packet: 1000.0,
        slot_duration: 1e-3,
        bandwidth: 1e6,
        sensing_duration: 5e-5,
        gain_pp: 1.0,
        gain_sp: 0.3,
        gain_ss: 1.0,
        gain_ps: 0.5,
        noise_primary_rx: 1e-3,
        noise_secondary_rx: 1e-3,
        primary_power: 3e-3,
        secondary_energy: 2e-6,
    }
}

fn channel_oracle(seed: u64) -> Outcome {
    const DRAWS: usize = 1_000_000;
    let link = reference_link();
    let probs = match derive_success_probs(&link) {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                passed: false,
                detail: e.to_string(),
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold =
        |airtime: f64| 2f64.powf(link.bits_per_packet / (link.bandwidth * airtime)) - 1.0;
    let full = link.slot_duration;
    let late = link.slot_duration - link.sensing_duration;
    let p_snr = link.primary_power * link.gain_pp / link.noise_primary_rx;
    let sp_inr = link.secondary_energy / full * link.gain_sp / link.noise_primary_rx;
    let s_snr =
        |airtime: f64| link.secondary_energy / airtime * link.gain_ss / link.noise_secondary_rx;
    let ps_inr = link.primary_power * link.gain_ps / link.noise_secondary_rx;
    // (name, analytic, own mean SNR, interferer mean INR, threshold)
    let cases = [
        ("p_bar_p", probs.p_bar_p, p_snr, 0.0, threshold(full)),
        ("p_bar_p_c", probs.p_bar_p_c, p_snr, sp_inr, threshold(full)),
        (
            "p_bar_0s",
            probs.p_bar_0s,
            s_snr(full),
            0.0,
            threshold(full),
        ),
        (
            "p_bar_1s",
            probs.p_bar_1s,
            s_snr(late),
            0.0,
            threshold(late),
        ),
        (
            "p_bar_0s_c",
            probs.p_bar_0s_c,
            s_snr(full),
            ps_inr,
            threshold(full),
        ),
        (
            "p_bar_1s_c",
            probs.p_bar_1s_c,
            s_snr(late),
            ps_inr,
            threshold(late),
        ),
    ];
    let mut w = Worst::default();
    for (name, analytic, snr, inr, thr) in cases {
        let hits = (0..DRAWS)
            .filter(|_| {
                let h: f64 = Exp1.sample(&mut rng);
                let g: f64 = Exp1.sample(&mut rng);
                snr * h >= thr * (1.0 + inr * g)
            })
            .count();
        let p = hits as f64 / DRAWS as f64;
        let se = (analytic * (1.0 - analytic) / DRAWS as f64).sqrt();
        w.record((p - analytic).abs() / se, 3.0, || {
            format!("{name} (in standard errors)")
        });
    }
    let ordered = probs.p_bar_p_c <= probs.p_bar_p
        && probs.p_bar_0s_c <= probs.p_bar_0s
        && probs.p_bar_1s_c <= probs.p_bar_1s
        && probs.p_bar_1s <= probs.p_bar_0s
        && probs.p_bar_1s_c <= probs.p_bar_0s_c;
    let mut out = w.outcome("deviation");
    out.passed &= ordered;
    if !ordered {
        out.detail.push_str("; ordering invariants violated");
    }
    out
}
