//! Builders for the secondary-throughput programs at a fixed sensing
//! probability, with and without feedback exploitation.

use super::program::{Affine, FractionalProgram, LinearConstraint, Quadratic};
use crate::channel::SuccessProbs;
use crate::rates::{
    busy_success, idle_success, retransmission_success, s1_primary_rate, AccessPolicy, Traffic,
};

/// Smallest retransmission success probability admitted by the feedback programs.
pub(crate) const MIN_GAMMA: f64 = 1e-9;

/// Decision variables are `(p_t, p_f, p_b, p_r)` at a fixed `p_s`.
pub(crate) const DIM: usize = 4;

pub(crate) fn policy_at(p_s: f64, x: &[f64]) -> AccessPolicy {
    AccessPolicy {
        p_s,
        p_t: x[0],
        p_f: x[1],
        p_b: x[2],
        p_r: x[3],
    }
}

/// Affine form of a function that is linear in `(p_t, p_f, p_b, p_r)` at fixed `p_s`.
fn affine_of(p_s: f64, f: impl Fn(&AccessPolicy) -> f64) -> Affine {
    let origin = f(&policy_at(p_s, &[0.0; DIM]));
    let coef = (0..DIM)
        .map(|i| {
            let mut x = [0.0; DIM];
            x[i] = 1.0;
            f(&policy_at(p_s, &x)) - origin
        })
        .collect();
    Affine::new(coef, origin)
}

/// Box bounds pinning variables that have no effect at this `p_s` to zero.
fn bounds(p_s: f64, p_r: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let t = if p_s < 1.0 { 1.0 } else { 0.0 };
    let s = if p_s > 0.0 { 1.0 } else { 0.0 };
    let (r_lo, r_hi) = match p_r {
        Some(v) => (v, v),
        None => (0.0, 1.0),
    };
    (vec![0.0, 0.0, 0.0, r_lo], vec![t, s, s, r_hi])
}

pub(crate) struct Forms {
    pub idle: Affine,
    pub busy: Affine,
    pub alpha: Affine,
    pub gamma: Affine,
}

pub(crate) fn forms(p_s: f64, probs: &SuccessProbs, traffic: &Traffic) -> Forms {
    Forms {
        idle: affine_of(p_s, |p| idle_success(p, probs, traffic)),
        busy: affine_of(p_s, |p| busy_success(p, probs, traffic)),
        alpha: affine_of(p_s, |p| s1_primary_rate(p, probs, traffic)),
        gamma: affine_of(p_s, |p| retransmission_success(p, probs, traffic)),
    }
}

/// No-feedback program: maximize the saturated secondary rate subject to
/// `mu_p >= required_mu_p` (`lambda_p` for stability, larger for a delay bound).
pub(crate) fn s1_program(
    p_s: f64,
    probs: &SuccessProbs,
    traffic: &Traffic,
    required_mu_p: f64,
) -> FractionalProgram {
    let lambda = traffic.lambda_p;
    let f = forms(p_s, probs, traffic);
    let (lower, upper) = bounds(p_s, Some(0.0));
    let constraints = vec![LinearConstraint::at_least(&f.alpha, required_mu_p)];
    if lambda == 0.0 {
        return FractionalProgram {
            numerator: Quadratic::from_affine(&f.idle.scale(traffic.lambda_e)),
            denominator: Affine::constant(DIM, 1.0),
            lower,
            upper,
            constraints,
        };
    }
    // lambda_e [(mu_p - lambda) idle + lambda busy] / mu_p
    let numerator = Quadratic::product(&f.alpha.offset(-lambda), &f.idle)
        .add(&Quadratic::from_affine(&f.busy.scale(lambda)))
        .scale(traffic.lambda_e);
    FractionalProgram {
        numerator,
        denominator: f.alpha,
        lower,
        upper,
        constraints,
    }
}

/// Extra constraint of a feedback program beyond `eta >= lambda_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum FeedbackBound {
    Stability,
    /// `eta >= bound` (delay constraint rewritten for a fixed `p_r`).
    Eta(f64),
    /// At zero primary load: `alpha >= 1 + gamma (1 - D)`.
    IdleDelay(f64),
}

/// Feedback program: maximize the saturated secondary rate subject to
/// `eta >= lambda_p` and an optional delay bound. `p_r = None` leaves the
/// retransmission access probability free.
pub(crate) fn sf_program(
    p_s: f64,
    p_r: Option<f64>,
    probs: &SuccessProbs,
    traffic: &Traffic,
    bound: FeedbackBound,
) -> FractionalProgram {
    let lambda = traffic.lambda_p;
    let f = forms(p_s, probs, traffic);
    let (lower, upper) = bounds(p_s, p_r);
    let eta = f.alpha.scale(lambda).add(&f.gamma.scale(1.0 - lambda));
    let mut constraints = vec![
        LinearConstraint::at_least(&eta, lambda),
        LinearConstraint::at_least(&f.gamma, MIN_GAMMA),
    ];
    match bound {
        FeedbackBound::Stability => {}
        FeedbackBound::Eta(v) => constraints.push(LinearConstraint::at_least(&eta, v)),
        FeedbackBound::IdleDelay(d) => constraints.push(LinearConstraint::at_least(
            &f.alpha.sub(&f.gamma.scale(1.0 - d)),
            1.0,
        )),
    }
    if lambda == 0.0 {
        return FractionalProgram {
            numerator: Quadratic::from_affine(&f.idle.scale(traffic.lambda_e)),
            denominator: Affine::constant(DIM, 1.0),
            lower,
            upper,
            constraints,
        };
    }
    // lambda_e [(eta - lambda) idle + lambda gamma busy + lambda (1 - alpha) p_r P0s_c] / gamma
    let mut retx = Affine::constant(DIM, 0.0);
    retx.coef[3] = probs.p_bar_0s_c;
    let one_minus_alpha = f.alpha.scale(-1.0).offset(1.0);
    let numerator = Quadratic::product(&eta.offset(-lambda), &f.idle)
        .add(&Quadratic::product(&f.gamma, &f.busy).scale(lambda))
        .add(&Quadratic::product(&one_minus_alpha, &retx).scale(lambda))
        .scale(traffic.lambda_e);
    FractionalProgram {
        numerator,
        denominator: f.gamma,
        lower,
        upper,
        constraints,
    }
}

/// The rearranged feedback delay constraint `E(eta) <= 0` for fixed
/// `gamma`, `lambda_p > 0` and bound `d`.
pub(crate) fn delay_residual(eta: f64, gamma: f64, lambda: f64, d: f64) -> f64 {
    let lb = 1.0 - lambda;
    let w = lambda + lb * gamma;
    (eta - gamma) * (eta - lambda).powi(2) / eta
        + lb * (w - eta)
        + d * (eta - lambda) * (eta - 1.0) * gamma * lambda / eta
}

/// Smallest `eta` in `(lambda, eta_max]` meeting the delay bound, if any.
///
/// The residual is convex in `eta`, positive at `eta = lambda` and zero at
/// `eta = 1`, so the feasible part of `[lambda, eta_max]` is `[root, eta_max]`.
pub(crate) fn min_eta_for_delay(gamma: f64, lambda: f64, d: f64, eta_max: f64) -> Option<f64> {
    if eta_max <= lambda || delay_residual(eta_max, gamma, lambda, d) > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (lambda, eta_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if delay_residual(mid, gamma, lambda, d) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{s1_secondary_rate, sf1_delay_value, sf1_secondary_rate_inclusive};

    fn preset() -> SuccessProbs {
        SuccessProbs::new(0.7, 0.1, 0.8, 0.6, 0.1, 0.075).unwrap()
    }

    fn traffic(lambda_p: f64) -> Traffic {
        Traffic {
            lambda_p,
            lambda_s: 0.0,
            lambda_e: 0.4,
            p_fa: 0.05,
            p_md: 0.01,
        }
    }

    #[test]
    fn s1_program_reproduces_rate() {
        let t = traffic(0.3);
        for p_s in [0.0, 0.4, 1.0] {
            let prog = s1_program(p_s, &preset(), &t, 0.3);
            let x = [0.3, 0.7, 0.2, 0.0];
            let policy = policy_at(p_s, &x);
            let direct = s1_secondary_rate(&policy, &preset(), &t).unwrap();
            assert!((prog.ratio(&x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn sf_program_reproduces_rate() {
        let t = traffic(0.35);
        for p_s in [0.0, 0.4, 1.0] {
            let prog = sf_program(p_s, None, &preset(), &t, FeedbackBound::Stability);
            let x = [0.3, 0.7, 0.2, 0.6];
            let policy = policy_at(p_s, &x);
            let direct = sf1_secondary_rate_inclusive(&policy, &preset(), &t).unwrap();
            assert!((prog.ratio(&x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn delay_residual_sign_matches_delay() {
        let lambda = 0.3;
        let gamma = 0.55;
        for d in [1.5, 2.0, 4.0, 10.0] {
            for k in 1..100 {
                let eta = lambda + (1.0 - lambda) * k as f64 / 100.0;
                if eta >= 0.999 {
                    continue;
                }
                let alpha = (eta - (1.0 - lambda) * gamma) / lambda;
                if !(0.0..=1.0).contains(&alpha) {
                    continue;
                }
                let delay = sf1_delay_value(lambda, alpha, gamma).d_p;
                let residual = delay_residual(eta, gamma, lambda, d);
                if (delay - d).abs() > 1e-9 {
                    assert_eq!(delay <= d, residual <= 0.0, "eta {eta} d {d}");
                }
            }
        }
    }
}
