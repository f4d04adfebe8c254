//! Slot-level Monte Carlo simulation of the primary and secondary users.
//!
//! Each slot: the primary transmits if it has a packet; the secondary, if it
//! has data and energy, either follows a pending NACK (feedback mode), senses
//! and then decides, or decides directly; receptions are drawn from the six
//! success probabilities; energy is consumed; arrivals join the queues after
//! service. Every random decision category has its own generator stream and
//! a fixed number of draws per slot, so runs with matched seeds share their
//! randomness across parameter changes.

mod boundary;
pub mod stats;

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::SuccessProbs;
use crate::rates::{AccessPolicy, RateError, Traffic};
pub use boundary::{estimate_boundary, BoundaryAxis, BoundaryEstimate};
pub use stats::Estimate;
use stats::{RatioBatches, Trend};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyModel {
    /// One energy packet is consumed per secondary transmission.
    Exact,
    /// One energy packet is drained every slot the energy queue is nonempty.
    Md1Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dominance {
    None,
    /// The secondary sends dummy packets when its queue is empty.
    SaturateSecondary,
    /// The primary sends dummy packets when its queue is empty.
    SaturatePrimary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub num_slots: u64,
    pub warmup_slots: u64,
    pub seed: u64,
    pub feedback_enabled: bool,
    pub energy_model: EnergyModel,
    pub dominance: Dominance,
    /// Batches used for confidence intervals.
    pub batches: usize,
}

impl SimConfig {
    /// `num_slots` slots with a 10% warmup, no feedback, exact energy, no dominance.
    pub fn new(num_slots: u64, seed: u64) -> Self {
        Self {
            num_slots,
            warmup_slots: num_slots / 10,
            seed,
            feedback_enabled: false,
            energy_model: EnergyModel::Exact,
            dominance: Dominance::None,
            batches: 50,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.num_slots <= self.warmup_slots {
            return Err(SimError::Config(
                "num_slots must exceed warmup_slots".into(),
            ));
        }
        if self.batches < 2 || (self.num_slots - self.warmup_slots) < self.batches as u64 {
            return Err(SimError::Config(
                "need at least 2 batches and one measured slot per batch".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error("invalid success probabilities: {0}")]
    Probs(String),
}

/// Queue state carried from slot to slot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeState {
    /// Arrival slot of each queued primary packet.
    pub primary_queue: VecDeque<u64>,
    pub secondary_queue: u64,
    pub energy_queue: u64,
    /// The previous primary transmission failed and feedback is exploited.
    pub retransmission: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub slots_measured: u64,
    pub batches: usize,
    /// Primary successes per primary transmission (dummy packets included).
    pub mu_p: Estimate,
    /// Secondary successes per slot with a backlogged secondary.
    pub mu_s: Estimate,
    /// Primary packets delivered per slot.
    pub throughput_p: Estimate,
    /// Secondary packets delivered per slot.
    pub throughput_s: Estimate,
    /// Mean slots from arrival to delivery of primary packets.
    pub mean_delay_p: Estimate,
    /// Time-average primary queue length at slot start.
    pub mean_queue_p: Estimate,
    pub empty_freq_p: Estimate,
    pub empty_freq_s: Estimate,
    /// Fraction of slots the secondary has energy.
    pub energy_available: Estimate,
    /// Fraction of slots the primary head-of-line packet is on its first try.
    pub first_transmission_freq: Estimate,
    /// Fraction of slots the primary is retransmitting after a NACK.
    pub retransmission_freq: Estimate,
    /// Least-squares growth of the primary queue over the last half of the run.
    pub slope_p: f64,
    pub slope_s: f64,
    pub final_queue_p: u64,
    pub final_queue_s: u64,
    pub warnings: Vec<String>,
}

struct Streams {
    arrivals: ChaCha8Rng,
    sensing: ChaCha8Rng,
    access: ChaCha8Rng,
    reception: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        Self {
            arrivals: stream(0),
            sensing: stream(1),
            access: stream(2),
            reception: stream(3),
        }
    }
}

struct Tallies {
    mu_p: RatioBatches,
    mu_s: RatioBatches,
    thr_p: RatioBatches,
    thr_s: RatioBatches,
    delay: RatioBatches,
    queue_p: RatioBatches,
    empty_p: RatioBatches,
    empty_s: RatioBatches,
    energy: RatioBatches,
    first: RatioBatches,
    retx: RatioBatches,
}

impl Tallies {
    fn new(b: usize) -> Self {
        Self {
            mu_p: RatioBatches::new(b),
            mu_s: RatioBatches::new(b),
            thr_p: RatioBatches::new(b),
            thr_s: RatioBatches::new(b),
            delay: RatioBatches::new(b),
            queue_p: RatioBatches::new(b),
            empty_p: RatioBatches::new(b),
            empty_s: RatioBatches::new(b),
            energy: RatioBatches::new(b),
            first: RatioBatches::new(b),
            retx: RatioBatches::new(b),
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Simulates `config.num_slots` slots and reports post-warmup statistics.
pub fn run(
    config: &SimConfig,
    policy: &AccessPolicy,
    probs: &SuccessProbs,
    traffic: &Traffic,
) -> Result<SimReport, SimError> {
    config.validate()?;
    policy.validate()?;
    traffic.validate()?;
    probs
        .validate()
        .map_err(|e| SimError::Probs(e.to_string()))?;

    let mut rng = Streams::new(config.seed);
    let mut state = NodeState::default();
    let measured = config.num_slots - config.warmup_slots;
    let batch_len = measured.div_ceil(config.batches as u64);
    let mut tally = Tallies::new(config.batches);
    let half = config.warmup_slots + measured / 2;
    let mut trend_p = Trend::default();
    let mut trend_s = Trend::default();
    let saturated_p = config.dominance == Dominance::SaturatePrimary;
    let saturated_s = config.dominance == Dominance::SaturateSecondary;

    for t in 0..config.num_slots {
        // Fixed draw count per stream per slot.
        let u_arr_p: f64 = rng.arrivals.random();
        let u_arr_s: f64 = rng.arrivals.random();
        let u_arr_e: f64 = rng.arrivals.random();
        let u_sense: f64 = rng.sensing.random();
        let u_detect: f64 = rng.sensing.random();
        let u_access: f64 = rng.access.random();
        let u_rx_p: f64 = rng.reception.random();
        let u_rx_s: f64 = rng.reception.random();

        let queued_p = state.primary_queue.len() as u64;
        let pu_active = queued_p > 0 || saturated_p;
        let su_backlogged = state.secondary_queue > 0 || saturated_s;
        let has_energy = state.energy_queue > 0;
        let retx = state.retransmission && pu_active;

        let (access_prob, delayed) = if config.feedback_enabled && retx {
            (policy.p_r, false)
        } else if u_sense < policy.p_s {
            let sensed_busy = if pu_active {
                u_detect >= traffic.p_md
            } else {
                u_detect < traffic.p_fa
            };
            (if sensed_busy { policy.p_b } else { policy.p_f }, true)
        } else {
            (policy.p_t, false)
        };
        let su_tx = su_backlogged && has_energy && u_access < access_prob;

        let pu_ok = pu_active
            && u_rx_p
                < if su_tx {
                    probs.p_bar_p_c
                } else {
                    probs.p_bar_p
                };
        let su_ok = su_tx
            && u_rx_s
                < match (delayed, pu_active) {
                    (false, false) => probs.p_bar_0s,
                    (false, true) => probs.p_bar_0s_c,
                    (true, false) => probs.p_bar_1s,
                    (true, true) => probs.p_bar_1s_c,
                };

        let measuring = t >= config.warmup_slots;
        let batch = if measuring {
            (((t - config.warmup_slots) / batch_len) as usize).min(config.batches - 1)
        } else {
            0
        };
        if measuring {
            tally.queue_p.add(batch, queued_p as f64, 1.0);
            tally.empty_p.add(batch, indicator(queued_p == 0), 1.0);
            tally
                .empty_s
                .add(batch, indicator(state.secondary_queue == 0), 1.0);
            tally.energy.add(batch, indicator(has_energy), 1.0);
            tally.first.add(batch, indicator(pu_active && !retx), 1.0);
            tally.retx.add(batch, indicator(retx), 1.0);
            if pu_active {
                tally.mu_p.add(batch, indicator(pu_ok), 1.0);
            }
            if su_backlogged {
                tally.mu_s.add(batch, indicator(su_ok), 1.0);
            }
        }

        match config.energy_model {
            EnergyModel::Exact if su_tx => state.energy_queue -= 1,
            EnergyModel::Md1Approx if has_energy => state.energy_queue -= 1,
            _ => {}
        }

        let mut delivered_p = 0.0;
        if pu_active {
            if pu_ok {
                if let Some(arrived) = state.primary_queue.pop_front() {
                    delivered_p = 1.0;
                    if measuring {
                        tally.delay.add(batch, (t - arrived) as f64, 1.0);
                    }
                }
                state.retransmission = false;
            } else {
                state.retransmission = config.feedback_enabled;
            }
        } else {
            state.retransmission = false;
        }
        let mut delivered_s = 0.0;
        if su_ok && state.secondary_queue > 0 {
            state.secondary_queue -= 1;
            delivered_s = 1.0;
        }
        if measuring {
            tally.thr_p.add(batch, delivered_p, 1.0);
            tally.thr_s.add(batch, delivered_s, 1.0);
        }

        if u_arr_p < traffic.lambda_p {
            state.primary_queue.push_back(t);
        }
        if u_arr_s < traffic.lambda_s {
            state.secondary_queue += 1;
        }
        if u_arr_e < traffic.lambda_e {
            state.energy_queue += 1;
        }

        if t >= half {
            let x = (t - half) as f64;
            trend_p.push(x, state.primary_queue.len() as f64);
            trend_s.push(x, state.secondary_queue as f64);
        }
    }

    let mut report = SimReport {
        slots_measured: measured,
        batches: config.batches,
        mu_p: tally.mu_p.estimate(),
        mu_s: tally.mu_s.estimate(),
        throughput_p: tally.thr_p.estimate(),
        throughput_s: tally.thr_s.estimate(),
        mean_delay_p: tally.delay.estimate(),
        mean_queue_p: tally.queue_p.estimate(),
        empty_freq_p: tally.empty_p.estimate(),
        empty_freq_s: tally.empty_s.estimate(),
        energy_available: tally.energy.estimate(),
        first_transmission_freq: tally.first.estimate(),
        retransmission_freq: tally.retx.estimate(),
        slope_p: trend_p.slope(),
        slope_s: trend_s.slope(),
        final_queue_p: state.primary_queue.len() as u64,
        final_queue_s: state.secondary_queue,
        warnings: Vec::new(),
    };
    report.warnings = precision_warnings(&report);
    Ok(report)
}

fn precision_warnings(report: &SimReport) -> Vec<String> {
    let named = [
        ("mu_p", report.mu_p),
        ("mu_s", report.mu_s),
        ("throughput_p", report.throughput_p),
        ("throughput_s", report.throughput_s),
        ("mean_delay_p", report.mean_delay_p),
    ];
    named
        .iter()
        .filter(|(_, e)| e.mean.is_finite() && e.mean > 0.0 && e.half_width > 0.1 * e.mean)
        .map(|(name, e)| {
            format!(
                "{name}: 95% half-width {:.3e} exceeds 10% of the estimate {:.3e}",
                e.half_width, e.mean
            )
        })
        .collect()
}
