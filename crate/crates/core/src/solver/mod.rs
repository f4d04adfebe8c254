//! Optimal sensing and access probabilities.
//!
//! For a fixed sensing probability `p_s` the secondary rate of each dominant
//! system is a quadratic over an affine function of the remaining access
//! probabilities, so it is maximized with [`bisect_quasiconcave`]. The outer
//! search runs over a `p_s` grid with an optional local refinement.

mod closed_form;
pub mod program;
mod programs;
mod quasi;
mod region;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::SuccessProbs;
use crate::rates::{
    delay_s1, delay_sf1, feedback_eta, retransmission_success, s1_primary_rate, s1_secondary_rate,
    sf1_secondary_rate_inclusive, AccessPolicy, Traffic,
};
use programs::{min_eta_for_delay, policy_at, s1_program, sf_program, FeedbackBound, MIN_GAMMA};

pub use closed_form::{
    closed_form_s1_delay_ps0, closed_form_s1_ps0, closed_form_sf_ps0, closed_form_sf_ps0_at,
    feasibility_s2,
};
pub use program::{
    bisect_quasiconcave, Affine, FractionalProgram, LinearConstraint, ProgramSolution, Quadratic,
};
pub use quasi::{check_quasiconcavity, s1_objective, sf_objective, Counterexample, QuasiReport};
pub use region::{
    conventional_curve, conventional_point, region_point, s2_curve, s2_point, stability_region,
    RegionCurve, RegionPoint,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("denominator is not positive on the feasible set")]
    DegenerateDenominator,
}

/// Dominant system (or baseline) that attains a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemTag {
    /// Saturated secondary, no feedback exploitation.
    S1,
    /// Saturated primary, random access without sensing.
    S2,
    /// Saturated secondary with feedback exploitation.
    S1f,
    /// Sense every slot, transmit only on a free channel.
    Conventional,
}

impl SystemTag {
    pub fn name(self) -> &'static str {
        match self {
            SystemTag::S1 => "S1",
            SystemTag::S2 => "S2",
            SystemTag::S1f => "S1f",
            SystemTag::Conventional => "conventional",
        }
    }
}

impl std::fmt::Display for SystemTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub ps_grid: Vec<f64>,
    pub pr_grid: Vec<f64>,
    /// Bisection tolerance on the secondary rate.
    pub tol: f64,
    /// Golden-section pass on `p_s` around the best grid point.
    pub refine: bool,
}

/// `n` evenly spaced points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            ps_grid: uniform_grid(101),
            pr_grid: uniform_grid(101),
            tol: 1e-7,
            refine: true,
        }
    }
}

impl SolverOptions {
    /// Random access without sensing (`p_s = 0` only).
    pub fn without_sensing(mut self) -> Self {
        self.ps_grid = vec![0.0];
        self.refine = false;
        self
    }

    fn validate(&self) -> Result<(), SolverError> {
        let grid_ok = |g: &[f64]| !g.is_empty() && g.iter().all(|v| (0.0..=1.0).contains(v));
        if !grid_ok(&self.ps_grid) || !grid_ok(&self.pr_grid) {
            return Err(SolverError::InvalidInput(
                "grids must be non-empty with points in [0, 1]".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::InvalidInput("tolerance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub system: SystemTag,
    pub best_policy: AccessPolicy,
    /// Optimal secondary service rate (the maximum stable `lambda_s`).
    pub best_value: f64,
    /// Primary service rate at the optimum (`eta` under feedback).
    pub mu_p: f64,
    pub feasible: bool,
    /// Level tests (or closed-form candidates) evaluated.
    pub iterations: usize,
    pub tolerance: f64,
}

struct Candidate {
    p_s: f64,
    policy: AccessPolicy,
    value: f64,
    iterations: usize,
}

/// Best candidate: highest value, ties within `tol` going to the smallest `p_s`.
fn pick(candidates: &[Candidate], tol: f64) -> Option<&Candidate> {
    let top = candidates
        .iter()
        .map(|c| c.value)
        .fold(f64::NEG_INFINITY, f64::max);
    candidates
        .iter()
        .filter(|c| c.value >= top - tol)
        .min_by(|a, b| a.p_s.total_cmp(&b.p_s))
}

/// Searches the `p_s` family. `solve` returns the best policy and value at a
/// given `p_s`, plus the number of level tests it used.
fn search_ps(
    opts: &SolverOptions,
    solve: impl Fn(f64) -> Option<(AccessPolicy, f64, usize)>,
) -> Option<(AccessPolicy, f64, usize)> {
    let mut candidates = Vec::new();
    let run = |p_s: f64, out: &mut Vec<Candidate>| {
        if let Some((policy, value, iterations)) = solve(p_s) {
            out.push(Candidate {
                p_s,
                policy,
                value,
                iterations,
            });
        }
    };
    for &p_s in &opts.ps_grid {
        run(p_s, &mut candidates);
    }
    let grid_pick = pick(&candidates, opts.tol)?;
    let (grid_best, grid_value) = (grid_pick.p_s, grid_pick.value);
    if opts.refine {
        // One golden-section pass on the neighbouring cell.
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = ((grid_best - 0.01).max(0.0), (grid_best + 0.01).min(1.0));
        let value_at = |p_s: f64| solve(p_s).map_or(f64::NEG_INFINITY, |(_, v, _)| v);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (value_at(c), value_at(d));
        for _ in 0..20 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = value_at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = value_at(d);
            }
        }
        // The refined point must beat the grid, else ties favour grid values.
        let mut refined = Vec::new();
        run(if fc >= fd { c } else { d }, &mut refined);
        candidates.extend(
            refined
                .into_iter()
                .filter(|c| c.value > grid_value + opts.tol),
        );
    }
    let iterations = candidates.iter().map(|c| c.iterations).sum();
    let best = pick(&candidates, opts.tol)?;
    Some((best.policy, best.value, iterations))
}

fn check_inputs(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    opts: &SolverOptions,
) -> Result<Traffic, SolverError> {
    opts.validate()?;
    probs
        .validate()
        .map_err(|e| SolverError::InvalidInput(e.to_string()))?;
    let t = traffic.with_lambda_p(lambda_p);
    t.validate()
        .map_err(|e| SolverError::InvalidInput(e.to_string()))?;
    if lambda_p >= probs.p_bar_p {
        return Err(SolverError::Infeasible(format!(
            "lambda_p = {lambda_p} is not below the primary capacity {}",
            probs.p_bar_p
        )));
    }
    Ok(t)
}

fn solve_at(
    prog: &program::FractionalProgram,
    p_s: f64,
    tol: f64,
    rate: impl Fn(&AccessPolicy) -> Option<f64>,
) -> Option<(AccessPolicy, f64, usize)> {
    let sol = bisect_quasiconcave(prog, tol).ok()?;
    let policy = policy_at(p_s, &sol.x);
    if let Some(value) = rate(&policy) {
        return Some((policy, value, sol.iterations));
    }
    // An active constraint can be missed by rounding; backing the access
    // probabilities off slightly only helps the primary.
    for k in [1e-13, 1e-12, 1e-11, 1e-10, 1e-9] {
        let x: Vec<f64> = sol.x.iter().map(|v| v * (1.0 - k)).collect();
        let policy = policy_at(p_s, &x);
        if let Some(value) = rate(&policy) {
            return Some((policy, value, sol.iterations));
        }
    }
    None
}

fn s1_result(
    policy: AccessPolicy,
    value: f64,
    iterations: usize,
    probs: &SuccessProbs,
    t: &Traffic,
    tol: f64,
) -> SolveResult {
    SolveResult {
        system: SystemTag::S1,
        best_policy: policy,
        best_value: value,
        mu_p: s1_primary_rate(&policy, probs, t),
        feasible: true,
        iterations,
        tolerance: tol,
    }
}

fn sf_result(
    policy: AccessPolicy,
    value: f64,
    iterations: usize,
    probs: &SuccessProbs,
    t: &Traffic,
    tol: f64,
) -> SolveResult {
    SolveResult {
        system: SystemTag::S1f,
        best_policy: policy,
        best_value: value,
        mu_p: feedback_eta(&policy, probs, t),
        feasible: true,
        iterations,
        tolerance: tol,
    }
}

/// Maximum secondary rate of the no-feedback system with a saturated
/// secondary, subject to primary stability.
pub fn optimize_s1(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    opts: &SolverOptions,
) -> Result<SolveResult, SolverError> {
    let t = check_inputs(probs, traffic, lambda_p, opts)?;
    let (policy, value, iterations) = search_ps(opts, |p_s| {
        let prog = s1_program(p_s, probs, &t, lambda_p);
        solve_at(&prog, p_s, opts.tol, |p| {
            s1_secondary_rate(p, probs, &t).ok()
        })
    })
    .ok_or_else(|| {
        SolverError::Infeasible("no sensing probability admits a stable primary".into())
    })?;
    Ok(s1_result(policy, value, iterations, probs, &t, opts.tol))
}

/// Maximum secondary rate with feedback exploitation, subject to
/// `lambda_p <= eta`. The retransmission access probability is optimized
/// jointly with the other access probabilities.
pub fn optimize_sf1(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    opts: &SolverOptions,
) -> Result<SolveResult, SolverError> {
    let t = check_inputs(probs, traffic, lambda_p, opts)?;
    let (policy, value, iterations) = search_ps(opts, |p_s| {
        let prog = sf_program(p_s, None, probs, &t, FeedbackBound::Stability);
        solve_at(&prog, p_s, opts.tol, |p| {
            sf1_secondary_rate_inclusive(p, probs, &t).ok()
        })
    })
    .ok_or_else(|| SolverError::Infeasible("no policy satisfies lambda_p <= eta".into()))?;
    Ok(sf_result(policy, value, iterations, probs, &t, opts.tol))
}

fn check_delay_bound(d: f64) -> Result<(), SolverError> {
    if d.is_nan() || d < 1.0 {
        return Err(SolverError::InvalidInput(format!(
            "delay bound must be at least one slot, got {d}"
        )));
    }
    Ok(())
}

/// Primary service rate needed to keep the mean delay at or below `d` slots.
pub fn required_mu_p(lambda_p: f64, d: f64) -> f64 {
    lambda_p + (1.0 - lambda_p) / d
}

/// Maximum secondary rate of the no-feedback system subject to a mean
/// primary queueing delay of at most `d` slots.
pub fn optimize_s1_delay(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    d: f64,
    opts: &SolverOptions,
) -> Result<SolveResult, SolverError> {
    check_delay_bound(d)?;
    let t = check_inputs(probs, traffic, lambda_p, opts)?;
    let need = required_mu_p(lambda_p, d);
    if probs.p_bar_p < need {
        return Err(SolverError::Infeasible(format!(
            "even a silent secondary leaves the primary delay above {d}"
        )));
    }
    let (policy, value, iterations) = search_ps(opts, |p_s| {
        let prog = s1_program(p_s, probs, &t, need);
        solve_at(&prog, p_s, opts.tol, |p| {
            let delay = delay_s1(p, probs, &t);
            if delay.feasible && delay.d_p <= d * (1.0 + 1e-9) {
                s1_secondary_rate(p, probs, &t).ok()
            } else {
                None
            }
        })
    })
    .ok_or_else(|| SolverError::Infeasible("no policy meets the delay bound".into()))?;
    Ok(s1_result(policy, value, iterations, probs, &t, opts.tol))
}

/// Maximum secondary rate with feedback exploitation subject to a mean
/// primary queueing delay of at most `d` slots, searched over the
/// `(p_s, p_r)` grid.
pub fn optimize_sf_delay(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    d: f64,
    opts: &SolverOptions,
) -> Result<SolveResult, SolverError> {
    check_delay_bound(d)?;
    let t = check_inputs(probs, traffic, lambda_p, opts)?;
    let meets = |p: &AccessPolicy| {
        let delay = delay_sf1(p, probs, &t);
        delay.feasible && delay.d_p <= d * (1.0 + 1e-9)
    };
    let solve_ps = |p_s: f64| {
        let mut best: Option<(AccessPolicy, f64, usize)> = None;
        let mut iterations = 0;
        for &p_r in &opts.pr_grid {
            let probe = AccessPolicy {
                p_r,
                ..AccessPolicy::SILENT
            };
            let gamma = retransmission_success(&probe, probs, &t);
            if gamma < MIN_GAMMA {
                continue;
            }
            let bound = if lambda_p == 0.0 {
                FeedbackBound::IdleDelay(d)
            } else {
                let eta_max = lambda_p * probs.p_bar_p + (1.0 - lambda_p) * gamma;
                match min_eta_for_delay(gamma, lambda_p, d, eta_max) {
                    Some(eta_lo) => FeedbackBound::Eta(eta_lo),
                    None => continue,
                }
            };
            let prog = sf_program(p_s, Some(p_r), probs, &t, bound);
            let found = solve_at(&prog, p_s, opts.tol, |p| {
                if meets(p) {
                    sf1_secondary_rate_inclusive(p, probs, &t).ok()
                } else {
                    None
                }
            });
            if let Some((policy, value, its)) = found {
                iterations += its;
                if best.as_ref().is_none_or(|b| value > b.1 + opts.tol) {
                    best = Some((policy, value, 0));
                }
            }
        }
        best.map(|(p, v, _)| (p, v, iterations))
    };
    let (policy, value, iterations) = search_ps(opts, solve_ps)
        .ok_or_else(|| SolverError::Infeasible("no grid point meets the delay bound".into()))?;
    Ok(sf_result(policy, value, iterations, probs, &t, opts.tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig4() -> (SuccessProbs, Traffic) {
        (
            SuccessProbs::new(0.7, 0.1, 0.8, 0.6, 0.1, 0.075).unwrap(),
            Traffic {
                lambda_p: 0.0,
                lambda_s: 0.0,
                lambda_e: 0.4,
                p_fa: 0.05,
                p_md: 0.01,
            },
        )
    }

    fn quick() -> SolverOptions {
        SolverOptions {
            ps_grid: uniform_grid(21),
            ..SolverOptions::default()
        }
    }

    #[test]
    fn zero_primary_load_uses_full_slot_access() {
        let (probs, t) = fig4();
        let r = optimize_s1(&probs, &t, 0.0, &quick()).unwrap();
        assert!((r.best_value - 0.4 * 0.8).abs() < 1e-9);
        assert_eq!(r.best_policy.p_s, 0.0);
        assert_eq!(r.best_policy.p_t, 1.0);
    }

    #[test]
    fn strong_mpr_needs_no_sensing() {
        let probs = SuccessProbs::new(0.7, 0.7, 0.8, 0.6, 0.8, 0.6).unwrap();
        let (_, t) = fig4();
        for lambda in [0.1, 0.4, 0.6] {
            let r = optimize_s1(&probs, &t, lambda, &quick()).unwrap();
            assert_eq!(r.best_policy.p_s, 0.0);
            assert!((r.best_value - 0.4 * 0.8).abs() < 1e-9);
        }
    }

    #[test]
    fn forced_no_sensing_matches_closed_form() {
        let (probs, t) = fig4();
        let opts = SolverOptions::default().without_sensing();
        let r = optimize_s1(&probs, &t, 0.5, &opts).unwrap();
        let cf = closed_form_s1_ps0(&probs, &t, 0.5).unwrap();
        assert!((r.best_value - cf.best_value).abs() < 1e-6);
        assert!((r.best_policy.p_t - 0.61084).abs() < 1e-3);
    }

    #[test]
    fn rejects_overloaded_primary() {
        let (probs, t) = fig4();
        assert!(matches!(
            optimize_s1(&probs, &t, 0.7, &quick()),
            Err(SolverError::Infeasible(_))
        ));
        assert!(matches!(
            optimize_sf1(&probs, &t, 0.75, &quick()),
            Err(SolverError::Infeasible(_))
        ));
    }

    #[test]
    fn feedback_never_hurts() {
        let (probs, t) = fig4();
        for lambda in [0.1, 0.3, 0.5] {
            let s1 = optimize_s1(&probs, &t, lambda, &quick()).unwrap();
            let sf = optimize_sf1(&probs, &t, lambda, &quick()).unwrap();
            assert!(sf.best_value >= s1.best_value - 1e-9, "{lambda}");
        }
    }

    #[test]
    fn delay_bound_is_met_and_monotone() {
        let (probs, t) = fig4();
        let loose = optimize_s1_delay(&probs, &t, 0.3, 4.0, &quick()).unwrap();
        let tight = optimize_s1_delay(&probs, &t, 0.3, 2.0, &quick()).unwrap();
        assert!(tight.best_value <= loose.best_value + 1e-12);
        assert!(delay_s1(&tight.best_policy, &probs, &t.with_lambda_p(0.3)).d_p <= 2.0 + 1e-9);
        let opts = SolverOptions {
            ps_grid: uniform_grid(11),
            pr_grid: uniform_grid(11),
            ..SolverOptions::default()
        };
        let sf_loose = optimize_sf_delay(&probs, &t, 0.3, 4.0, &opts).unwrap();
        let sf_tight = optimize_sf_delay(&probs, &t, 0.3, 2.0, &opts).unwrap();
        assert!(sf_tight.best_value <= sf_loose.best_value + 1e-12);
        assert!(delay_sf1(&sf_tight.best_policy, &probs, &t.with_lambda_p(0.3)).d_p <= 2.0 + 1e-9);
    }

    #[test]
    fn results_reproduce_their_value() {
        let (probs, t) = fig4();
        let r = optimize_sf1(&probs, &t, 0.35, &quick()).unwrap();
        let again =
            sf1_secondary_rate_inclusive(&r.best_policy, &probs, &t.with_lambda_p(0.35)).unwrap();
        assert!((r.best_value - again).abs() < 1e-12);
    }

    mod properties {
        use super::*;
        use crate::rates::{
            delay_s1, delay_sf1, s1_primary_rate, s1_secondary_rate, sf1_secondary_rate_inclusive,
        };
        use proptest::prelude::*;

        fn scenario() -> impl Strategy<Value = (SuccessProbs, Traffic, f64)> {
            (
                (
                    0.3..1.0f64,
                    0.0..1.0f64,
                    0.2..1.0f64,
                    0.0..1.0f64,
                    0.0..1.0f64,
                ),
                (0.05..1.0f64, 0.0..0.2f64, 0.0..0.2f64, 0.0..0.95f64),
            )
                .prop_map(|((pp, cp, s0, s1, cs), (le, fa, md, load))| {
                    let p_bar_1s = s0 * s1;
                    let probs =
                        SuccessProbs::new(pp, pp * cp, s0, p_bar_1s, s0 * cs, p_bar_1s * cs)
                            .unwrap();
                    let traffic = Traffic {
                        lambda_p: 0.0,
                        lambda_s: 0.0,
                        lambda_e: le,
                        p_fa: fa,
                        p_md: md,
                    };
                    (probs, traffic, load * pp)
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn s1_optimum_is_achieved_and_feasible((probs, traffic, lambda_p) in scenario()) {
                let r = optimize_s1(&probs, &traffic, lambda_p, &quick()).unwrap();
                let t = traffic.with_lambda_p(lambda_p);
                let mu_p = s1_primary_rate(&r.best_policy, &probs, &t);
                prop_assert!(mu_p - lambda_p >= -1e-9);
                let mu_s = s1_secondary_rate(&r.best_policy, &probs, &t).unwrap();
                prop_assert!((mu_s - r.best_value).abs() < 1e-9, "{mu_s} vs {}", r.best_value);
            }

            #[test]
            fn sf1_optimum_is_achieved_and_feasible((probs, traffic, lambda_p) in scenario()) {
                let r = optimize_sf1(&probs, &traffic, lambda_p, &quick()).unwrap();
                let t = traffic.with_lambda_p(lambda_p);
                prop_assert!(r.mu_p - lambda_p >= -1e-9);
                let mu_s = sf1_secondary_rate_inclusive(&r.best_policy, &probs, &t).unwrap();
                prop_assert!((mu_s - r.best_value).abs() < 1e-9, "{mu_s} vs {}", r.best_value);
            }

            #[test]
            fn delay_optima_respect_the_bound(
                (probs, traffic, lambda_p) in scenario(),
                d in 1.5..20.0f64,
            ) {
                let t = traffic.with_lambda_p(lambda_p);
                if let Ok(r) = optimize_s1_delay(&probs, &traffic, lambda_p, d, &quick()) {
                    let report = delay_s1(&r.best_policy, &probs, &t);
                    prop_assert!(report.feasible && report.d_p <= d + 1e-9, "{report:?} > {d}");
                    let mu_s = s1_secondary_rate(&r.best_policy, &probs, &t).unwrap();
                    prop_assert!((mu_s - r.best_value).abs() < 1e-9);
                }
                if let Ok(r) = optimize_sf_delay(&probs, &traffic, lambda_p, d, &quick()) {
                    let report = delay_sf1(&r.best_policy, &probs, &t);
                    prop_assert!(report.feasible && report.d_p <= d + 1e-9, "{report:?} > {d}");
                }
            }
        }
    }
}
