//! Closed-form optima when the secondary never senses (`p_s = 0`), and the
//! feasibility bound of the saturated-primary system.

use super::{required_mu_p, SolveResult, SolverError, SystemTag};
use crate::channel::SuccessProbs;
use crate::rates::{
    feedback_eta, s1_primary_rate, s1_secondary_rate, sf1_secondary_rate_inclusive, AccessPolicy,
    Traffic,
};

fn random_access(p_t: f64, p_r: f64) -> AccessPolicy {
    AccessPolicy {
        p_t,
        p_r,
        ..AccessPolicy::SILENT
    }
}

/// Optimal `p_t` under `mu_p >= bound` when `p_s = 0`.
fn s1_ps0_access(probs: &SuccessProbs, traffic: &Traffic, bound: f64) -> Option<f64> {
    let lambda = traffic.lambda_p;
    let ell = traffic.lambda_e * probs.delta_p();
    let headroom = probs.p_bar_p - bound;
    if headroom < 0.0 {
        return None;
    }
    if ell == 0.0 {
        return Some(1.0);
    }
    let cap = (headroom / ell).min(1.0);
    let root = (probs.p_bar_p - (probs.p_bar_p * lambda * (1.0 - probs.delta_0s())).sqrt()) / ell;
    Some(cap.min(root.max(0.0)))
}

fn s1_closed_result(
    probs: &SuccessProbs,
    traffic: &Traffic,
    p_t: f64,
) -> Result<SolveResult, SolverError> {
    let policy = random_access(p_t, 0.0);
    let value = s1_secondary_rate(&policy, probs, traffic)
        .map_err(|e| SolverError::Infeasible(e.to_string()))?;
    Ok(SolveResult {
        system: SystemTag::S1,
        best_policy: policy,
        best_value: value,
        mu_p: s1_primary_rate(&policy, probs, traffic),
        feasible: true,
        iterations: 1,
        tolerance: 0.0,
    })
}

/// Optimal random access without sensing or feedback: `p_t` is the smaller
/// of the stability cap and the stationary point of the secondary rate.
pub fn closed_form_s1_ps0(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
) -> Result<SolveResult, SolverError> {
    let t = traffic.with_lambda_p(lambda_p);
    let p_t = s1_ps0_access(probs, &t, lambda_p).ok_or_else(|| {
        SolverError::Infeasible(format!(
            "lambda_p = {lambda_p} exceeds the primary capacity {}",
            probs.p_bar_p
        ))
    })?;
    s1_closed_result(probs, &t, p_t)
}

/// As [`closed_form_s1_ps0`] with the primary mean delay bounded by `d` slots.
pub fn closed_form_s1_delay_ps0(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    d: f64,
) -> Result<SolveResult, SolverError> {
    if d.is_nan() || d < 1.0 {
        return Err(SolverError::InvalidInput(format!(
            "delay bound must be at least one slot, got {d}"
        )));
    }
    let t = traffic.with_lambda_p(lambda_p);
    let p_t = s1_ps0_access(probs, &t, required_mu_p(lambda_p, d)).ok_or_else(|| {
        SolverError::Infeasible(format!("no access probability keeps the delay below {d}"))
    })?;
    s1_closed_result(probs, &t, p_t)
}

/// Optimal `p_t` for a fixed `p_r` when `p_s = 0` under feedback
/// exploitation, with the resulting secondary rate. `None` when no `p_t`
/// keeps the primary stable at this `p_r`.
pub fn closed_form_sf_ps0_at(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    p_r: f64,
) -> Option<(f64, f64)> {
    let t = traffic.with_lambda_p(lambda_p);
    let ell = t.lambda_e * probs.delta_p();
    let slack = probs.p_bar_p - (1.0 - lambda_p) * ell * p_r - lambda_p;
    if slack < 0.0 {
        return None;
    }
    let scale = lambda_p * ell;
    let p_t = if scale == 0.0 {
        1.0
    } else {
        let cap = slack / scale;
        let interior = (slack + lambda_p * probs.delta_0s() * probs.p_bar_p) / (2.0 * scale);
        cap.min(interior).clamp(0.0, 1.0)
    };
    let value = sf1_secondary_rate_inclusive(&random_access(p_t, p_r), probs, &t).ok()?;
    Some((p_t, value))
}

/// Best closed-form random access policy with feedback exploitation over a
/// grid of retransmission access probabilities. Ties go to the smallest `p_r`.
pub fn closed_form_sf_ps0(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    pr_grid: &[f64],
) -> Result<SolveResult, SolverError> {
    let t = traffic.with_lambda_p(lambda_p);
    let mut best: Option<(f64, f64, f64)> = None;
    for &p_r in pr_grid {
        if let Some((p_t, value)) = closed_form_sf_ps0_at(probs, &t, lambda_p, p_r) {
            if best.is_none_or(|(_, _, v)| value > v) {
                best = Some((p_r, p_t, value));
            }
        }
    }
    let (p_r, p_t, value) = best.ok_or_else(|| {
        SolverError::Infeasible(
            "no retransmission access probability keeps the primary stable".into(),
        )
    })?;
    let policy = random_access(p_t, p_r);
    Ok(SolveResult {
        system: SystemTag::S1f,
        best_policy: policy,
        best_value: value,
        mu_p: feedback_eta(&policy, probs, &t),
        feasible: true,
        iterations: pr_grid.len(),
        tolerance: 0.0,
    })
}

/// Feasibility of the saturated-primary system at the traffic's `lambda_s`:
/// the smallest `p_t` serving the secondary, and the primary rate it leaves.
pub fn feasibility_s2(probs: &SuccessProbs, traffic: &Traffic) -> Result<SolveResult, SolverError> {
    let capacity = traffic.lambda_e * probs.p_bar_0s_c;
    let lambda_s = traffic.lambda_s;
    if lambda_s > capacity {
        return Err(SolverError::Infeasible(format!(
            "lambda_s = {lambda_s} exceeds lambda_e * p_bar_0s_c = {capacity}"
        )));
    }
    let p_t = if lambda_s == 0.0 {
        0.0
    } else {
        lambda_s / capacity
    };
    let mu_p = if lambda_s == 0.0 {
        probs.p_bar_p
    } else {
        probs.p_bar_p - lambda_s * probs.delta_p() / probs.p_bar_0s_c
    };
    Ok(SolveResult {
        system: SystemTag::S2,
        best_policy: random_access(p_t, p_t),
        best_value: lambda_s,
        mu_p,
        feasible: true,
        iterations: 1,
        tolerance: 0.0,
    })
}
