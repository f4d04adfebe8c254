//! Closed-form service rates, stationary distributions and delays of the
//! dominant systems, with and without primary ARQ feedback.
//!
//! The energy queue is treated as an M/D/1 queue throughout, so the secondary
//! has energy in a slot with probability `lambda_e`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::SuccessProbs;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("`{name}` = {value} is not a probability in [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("primary queue unstable: lambda_p = {lambda_p} >= mu_p = {mu_p}")]
    PrimaryUnstable { lambda_p: f64, mu_p: f64 },
    #[error("secondary queue unstable: lambda_s = {lambda_s} > mu_s = {mu_s}")]
    SecondaryUnstable { lambda_s: f64, mu_s: f64 },
    #[error("feedback chain unstable: lambda_p = {lambda_p} >= eta = {eta}")]
    FeedbackUnstable { lambda_p: f64, eta: f64 },
    #[error(
        "retransmission success probability is zero; the feedback chain has no stationary law"
    )]
    DegenerateRetransmission,
    #[error(
        "occupancy probabilities must lie in [0, 1] and sum to at most 1, got {idle} and {busy}"
    )]
    InvalidOccupancy { idle: f64, busy: f64 },
}

fn check_prob(name: &'static str, value: f64) -> Result<(), RateError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(RateError::InvalidProbability { name, value })
    }
}

/// Sensing and access probabilities of the secondary user.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AccessPolicy {
    /// Probability of sensing at the start of a slot.
    pub p_s: f64,
    /// Access probability without sensing.
    pub p_t: f64,
    /// Access probability after sensing the channel free.
    pub p_f: f64,
    /// Access probability after sensing the channel busy.
    pub p_b: f64,
    /// Access probability in a slot where the primary retransmits.
    pub p_r: f64,
}

impl AccessPolicy {
    pub const SILENT: AccessPolicy = AccessPolicy {
        p_s: 0.0,
        p_t: 0.0,
        p_f: 0.0,
        p_b: 0.0,
        p_r: 0.0,
    };

    pub fn new(p_s: f64, p_t: f64, p_f: f64, p_b: f64, p_r: f64) -> Result<Self, RateError> {
        let policy = Self {
            p_s,
            p_t,
            p_f,
            p_b,
            p_r,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Sense every slot and transmit only when the channel looks free.
    pub fn conventional() -> Self {
        Self {
            p_s: 1.0,
            p_t: 0.0,
            p_f: 1.0,
            p_b: 0.0,
            p_r: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), RateError> {
        check_prob("p_s", self.p_s)?;
        check_prob("p_t", self.p_t)?;
        check_prob("p_f", self.p_f)?;
        check_prob("p_b", self.p_b)?;
        check_prob("p_r", self.p_r)
    }

    /// Probability of a secondary transmission in a slot where the primary
    /// sends a first transmission, given that the secondary has energy.
    pub fn busy_access(&self, p_md: f64) -> f64 {
        (1.0 - self.p_s) * self.p_t
            + self.p_s * p_md * self.p_f
            + self.p_s * (1.0 - p_md) * self.p_b
    }

    /// Probability of a secondary transmission in an idle slot, given energy.
    pub fn idle_access(&self, p_fa: f64) -> f64 {
        (1.0 - self.p_s) * self.p_t
            + self.p_s * p_fa * self.p_b
            + self.p_s * (1.0 - p_fa) * self.p_f
    }
}

/// Arrival rates and sensing error probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Traffic {
    pub lambda_p: f64,
    pub lambda_s: f64,
    pub lambda_e: f64,
    /// False-alarm probability (idle channel sensed busy).
    pub p_fa: f64,
    /// Misdetection probability (busy channel sensed idle).
    pub p_md: f64,
}

impl Traffic {
    pub fn validate(&self) -> Result<(), RateError> {
        check_prob("lambda_p", self.lambda_p)?;
        check_prob("lambda_s", self.lambda_s)?;
        check_prob("lambda_e", self.lambda_e)?;
        check_prob("p_fa", self.p_fa)?;
        check_prob("p_md", self.p_md)
    }

    pub fn with_lambda_p(mut self, lambda_p: f64) -> Self {
        self.lambda_p = lambda_p;
        self
    }

    pub fn with_lambda_s(mut self, lambda_s: f64) -> Self {
        self.lambda_s = lambda_s;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceRates {
    pub mu_p: f64,
    pub mu_s: f64,
    pub mu_e: f64,
}

/// Secondary success probability in an idle slot, given energy.
pub fn idle_success(policy: &AccessPolicy, probs: &SuccessProbs, traffic: &Traffic) -> f64 {
    (1.0 - policy.p_s) * policy.p_t * probs.p_bar_0s
        + policy.p_s * policy.p_b * traffic.p_fa * probs.p_bar_1s
        + policy.p_s * policy.p_f * (1.0 - traffic.p_fa) * probs.p_bar_1s
}

/// Secondary success probability in a slot carrying a primary first
/// transmission, given energy.
pub fn busy_success(policy: &AccessPolicy, probs: &SuccessProbs, traffic: &Traffic) -> f64 {
    (1.0 - policy.p_s) * policy.p_t * probs.p_bar_0s_c
        + policy.p_s * policy.p_f * traffic.p_md * probs.p_bar_1s_c
        + policy.p_s * policy.p_b * (1.0 - traffic.p_md) * probs.p_bar_1s_c
}

/// Primary service rate with a saturated secondary.
pub fn s1_primary_rate(policy: &AccessPolicy, probs: &SuccessProbs, traffic: &Traffic) -> f64 {
    probs.p_bar_p - traffic.lambda_e * probs.delta_p() * policy.busy_access(traffic.p_md)
}

/// Fraction of slots with a busy primary, `lambda_p / mu_p`, with `0 / 0 = 0`.
fn busy_fraction(lambda_p: f64, mu_p: f64) -> f64 {
    if lambda_p == 0.0 {
        0.0
    } else {
        lambda_p / mu_p
    }
}

/// Secondary service rate with a saturated secondary, accepting the
/// stability boundary `lambda_p = mu_p` (where the primary is always busy).
pub fn s1_secondary_rate(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<f64, RateError> {
    let mu_p = s1_primary_rate(policy, probs, traffic);
    if traffic.lambda_p > mu_p {
        return Err(RateError::PrimaryUnstable {
            lambda_p: traffic.lambda_p,
            mu_p,
        });
    }
    let busy = busy_fraction(traffic.lambda_p, mu_p);
    Ok(traffic.lambda_e
        * ((1.0 - busy) * idle_success(policy, probs, traffic)
            + busy * busy_success(policy, probs, traffic)))
}

/// Service rates of the first dominant system (secondary saturated).
///
/// Fails with [`RateError::PrimaryUnstable`] when `lambda_p >= mu_p`; the
/// error still carries `mu_p`.
pub fn s1_rates(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<ServiceRates, RateError> {
    policy.validate()?;
    traffic.validate()?;
    let mu_p = s1_primary_rate(policy, probs, traffic);
    if traffic.lambda_p >= mu_p {
        return Err(RateError::PrimaryUnstable {
            lambda_p: traffic.lambda_p,
            mu_p,
        });
    }
    let mu_s = s1_secondary_rate(policy, probs, traffic)?;
    let busy = busy_fraction(traffic.lambda_p, mu_p);
    let mu_e = energy_rate(policy, traffic, 1.0 - busy, busy)?;
    Ok(ServiceRates { mu_p, mu_s, mu_e })
}

/// Service rates of the second dominant system (primary saturated).
pub fn s2_rates(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<ServiceRates, RateError> {
    policy.validate()?;
    traffic.validate()?;
    let mu_s = traffic.lambda_e * busy_success(policy, probs, traffic);
    if traffic.lambda_s > mu_s {
        return Err(RateError::SecondaryUnstable {
            lambda_s: traffic.lambda_s,
            mu_s,
        });
    }
    let occupied = busy_fraction(traffic.lambda_s, mu_s);
    let mu_p = probs.p_bar_p
        - occupied * traffic.lambda_e * probs.delta_p() * policy.busy_access(traffic.p_md);
    let mu_e = energy_rate(policy, traffic, 0.0, occupied)?;
    Ok(ServiceRates { mu_p, mu_s, mu_e })
}

/// Mean service rate of the energy queue for given joint occupancies
/// `idle = Pr{Q_s != 0, Q_p = 0}` and `busy = Pr{Q_s != 0, Q_p != 0}`.
pub fn energy_rate(
    policy: &AccessPolicy,
    traffic: &Traffic,
    idle: f64,
    busy: f64,
) -> Result<f64, RateError> {
    policy.validate()?;
    traffic.validate()?;
    let valid =
        (0.0..=1.0).contains(&idle) && (0.0..=1.0).contains(&busy) && idle + busy <= 1.0 + 1e-12;
    if !valid {
        return Err(RateError::InvalidOccupancy { idle, busy });
    }
    Ok(idle * policy.idle_access(traffic.p_fa) + busy * policy.busy_access(traffic.p_md))
}

/// Stationary law of the primary queue of the first dominant system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimaryChainDist {
    pub lambda_p: f64,
    pub mu_p: f64,
    /// Probability that the queue is empty.
    pub nu0: f64,
    /// Ratio `nu_{k+1} / nu_k` for `k >= 1`.
    pub geometric_ratio: f64,
}

impl PrimaryChainDist {
    /// Probability of `k` packets in the queue.
    pub fn nu(&self, k: u64) -> f64 {
        if k == 0 {
            return self.nu0;
        }
        let nu1 = self.nu0 * self.lambda_p / ((1.0 - self.lambda_p) * self.mu_p);
        nu1 * self.geometric_ratio.powf((k - 1) as f64)
    }

    pub fn mean_queue_length(&self) -> f64 {
        // Sum of k nu_k over the geometric tail.
        let nu1 = self.nu(1);
        nu1 / (1.0 - self.geometric_ratio).powi(2)
    }
}

pub fn primary_chain(lambda_p: f64, mu_p: f64) -> Result<PrimaryChainDist, RateError> {
    check_prob("lambda_p", lambda_p)?;
    check_prob("mu_p", mu_p)?;
    if lambda_p >= mu_p {
        return Err(RateError::PrimaryUnstable { lambda_p, mu_p });
    }
    let nu0 = 1.0 - lambda_p / mu_p;
    let geometric_ratio = lambda_p * (1.0 - mu_p) / ((1.0 - lambda_p) * mu_p);
    Ok(PrimaryChainDist {
        lambda_p,
        mu_p,
        nu0,
        geometric_ratio,
    })
}

/// Stationary law of the primary queue when the secondary exploits ARQ
/// feedback. States are the empty queue, `k` packets with the head on its
/// first transmission (`pi_k`), and `k` packets with the head being
/// retransmitted (`eps_k`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackChain {
    pub lambda_p: f64,
    /// Primary success probability on a first transmission.
    pub alpha_p: f64,
    /// Primary success probability on a retransmission.
    pub gamma_p: f64,
    /// Mean primary service rate.
    pub eta: f64,
    pub pi0: f64,
    pub sum_pi: f64,
    pub sum_eps: f64,
}

impl FeedbackChain {
    fn tail_scale(&self) -> Option<(f64, f64)> {
        let lambda = self.lambda_p;
        if self.alpha_p >= 1.0 || self.eta >= 1.0 || lambda == 0.0 {
            return None;
        }
        let s = lambda * (1.0 - self.eta) / ((1.0 - lambda) * self.eta);
        let c = self.pi0 * (1.0 - self.alpha_p) / (1.0 - self.eta).powi(2);
        Some((s, c))
    }

    /// Probability of `k >= 1` packets with the head on its first transmission.
    pub fn pi(&self, k: u64) -> f64 {
        let lambda = self.lambda_p;
        match k {
            0 => self.pi0,
            1 => {
                self.pi0 * (lambda / (1.0 - lambda)) * (lambda + (1.0 - lambda) * self.gamma_p)
                    / self.eta
            }
            _ => self
                .tail_scale()
                .map_or(0.0, |(s, c)| c * lambda * s.powf(k as f64)),
        }
    }

    /// Probability of `k >= 1` packets with the head being retransmitted.
    pub fn eps(&self, k: u64) -> f64 {
        match k {
            0 => 0.0,
            1 => self.pi0 * (self.lambda_p / self.eta) * (1.0 - self.alpha_p),
            _ => self
                .tail_scale()
                .map_or(0.0, |(s, c)| c * (1.0 - self.lambda_p) * s.powf(k as f64)),
        }
    }
}

/// Primary success probability on a retransmission.
pub fn retransmission_success(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> f64 {
    probs.p_bar_p - traffic.lambda_e * probs.delta_p() * policy.p_r
}

/// Mean primary service rate under feedback exploitation.
pub fn feedback_eta(policy: &AccessPolicy, probs: &SuccessProbs, traffic: &Traffic) -> f64 {
    let alpha = s1_primary_rate(policy, probs, traffic);
    let gamma = retransmission_success(policy, probs, traffic);
    traffic.lambda_p * alpha + (1.0 - traffic.lambda_p) * gamma
}

fn build_feedback_chain(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
    inclusive: bool,
) -> Result<FeedbackChain, RateError> {
    let lambda = traffic.lambda_p;
    let alpha_p = s1_primary_rate(policy, probs, traffic);
    let gamma_p = retransmission_success(policy, probs, traffic);
    if gamma_p <= 0.0 {
        return Err(RateError::DegenerateRetransmission);
    }
    let eta = lambda * alpha_p + (1.0 - lambda) * gamma_p;
    let unstable = if inclusive {
        lambda > eta
    } else {
        lambda >= eta
    };
    if unstable {
        return Err(RateError::FeedbackUnstable {
            lambda_p: lambda,
            eta,
        });
    }
    Ok(FeedbackChain {
        lambda_p: lambda,
        alpha_p,
        gamma_p,
        eta,
        pi0: (eta - lambda) / gamma_p,
        sum_pi: lambda,
        sum_eps: lambda * (1.0 - alpha_p) / gamma_p,
    })
}

pub fn feedback_chain(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<FeedbackChain, RateError> {
    policy.validate()?;
    traffic.validate()?;
    build_feedback_chain(policy, probs, traffic, false)
}

fn sf1_rate_from_chain(
    chain: &FeedbackChain,
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> f64 {
    traffic.lambda_e
        * (chain.pi0 * idle_success(policy, probs, traffic)
            + chain.sum_pi * busy_success(policy, probs, traffic)
            + chain.sum_eps * policy.p_r * probs.p_bar_0s_c)
}

/// Secondary service rate under feedback exploitation with a saturated
/// secondary (strictly stable primary).
pub fn sf1_secondary_rate(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<f64, RateError> {
    let chain = feedback_chain(policy, probs, traffic)?;
    Ok(sf1_rate_from_chain(&chain, policy, probs, traffic))
}

/// As [`sf1_secondary_rate`], also accepting `lambda_p = eta`.
pub fn sf1_secondary_rate_inclusive(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<f64, RateError> {
    let chain = build_feedback_chain(policy, probs, traffic, true)?;
    Ok(sf1_rate_from_chain(&chain, policy, probs, traffic))
}

/// Service rates under feedback exploitation; `mu_p` reports `eta`.
pub fn sf1_rates(
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<ServiceRates, RateError> {
    let chain = feedback_chain(policy, probs, traffic)?;
    let mu_s = sf1_rate_from_chain(&chain, policy, probs, traffic);
    let mu_e = chain.pi0 * policy.idle_access(traffic.p_fa)
        + chain.sum_pi * policy.busy_access(traffic.p_md)
        + chain.sum_eps * policy.p_r;
    Ok(ServiceRates {
        mu_p: chain.eta,
        mu_s,
        mu_e,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    /// Mean primary queueing delay in slots (infinite when infeasible).
    pub d_p: f64,
    pub feasible: bool,
}

impl DelayReport {
    fn infeasible() -> Self {
        Self {
            d_p: f64::INFINITY,
            feasible: false,
        }
    }
}

/// Mean delay of a Bernoulli-fed queue with per-slot service probability `mu_p`.
pub fn s1_delay_value(lambda_p: f64, mu_p: f64) -> DelayReport {
    if lambda_p >= mu_p {
        return DelayReport::infeasible();
    }
    DelayReport {
        d_p: (1.0 - lambda_p) / (mu_p - lambda_p),
        feasible: true,
    }
}

pub fn delay_s1(policy: &AccessPolicy, probs: &SuccessProbs, traffic: &Traffic) -> DelayReport {
    s1_delay_value(traffic.lambda_p, s1_primary_rate(policy, probs, traffic))
}

/// Mean primary delay under feedback exploitation for given success
/// probabilities on first transmissions (`alpha`) and retransmissions (`gamma`).
pub fn sf1_delay_value(lambda_p: f64, alpha: f64, gamma: f64) -> DelayReport {
    let eta = lambda_p * alpha + (1.0 - lambda_p) * gamma;
    if gamma <= 0.0 || lambda_p >= eta {
        return DelayReport::infeasible();
    }
    if lambda_p == 0.0 {
        return DelayReport {
            d_p: (1.0 + gamma - alpha) / gamma,
            feasible: true,
        };
    }
    if alpha == gamma || eta >= 1.0 {
        // First transmissions and retransmissions behave alike.
        return s1_delay_value(lambda_p, eta);
    }
    let num =
        (alpha - eta) * (eta - lambda_p).powi(2) + (1.0 - lambda_p).powi(2) * (1.0 - alpha) * eta;
    let den = (eta - lambda_p) * (1.0 - lambda_p) * (1.0 - eta) * gamma;
    DelayReport {
        d_p: num / den,
        feasible: true,
    }
}

pub fn delay_sf1(policy: &AccessPolicy, probs: &SuccessProbs, traffic: &Traffic) -> DelayReport {
    sf1_delay_value(
        traffic.lambda_p,
        s1_primary_rate(policy, probs, traffic),
        retransmission_success(policy, probs, traffic),
    )
}

/// Rates of the sense-every-slot baseline.
pub fn conventional_rates(
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<ServiceRates, RateError> {
    s1_rates(&AccessPolicy::conventional(), probs, traffic)
}
