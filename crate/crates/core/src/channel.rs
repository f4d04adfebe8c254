//! Reception success probabilities over flat Rayleigh-fading links.
//!
//! A packet from transmitter `j` is decoded when the spectral efficiency
//! `R = b / (W (T - i tau))` stays below `log2(1 + SINR)`. With exponentially
//! distributed channel gains the decoding probability has a closed form,
//! both for a lone transmitter and under one concurrent interferer.
//!
//! The secondary spends a fixed energy `e` per packet, so a transmission that
//! starts after the sensing phase uses power `e / (T - tau)`. The primary
//! always starts at the slot boundary with fixed power.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `ln(1e-300)`: decoding probabilities never underflow below `1e-300`.
const MIN_LOG_PROB: f64 = -690.775_527_898_213_7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid link parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("start index must be 0 or 1, got {0}")]
    InvalidStartIndex(u8),
    #[error("the primary always starts transmitting at the slot boundary (index 0)")]
    PrimaryOffset,
    #[error("sender and interferer must be different nodes")]
    SameNode,
    #[error("probability `{name}` = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("`{interfered}` exceeds `{alone}`: interference cannot raise the success probability")]
    InterferenceOrder {
        alone: &'static str,
        interfered: &'static str,
    },
    #[error("no link model reproduces the target probabilities: {0}")]
    NoFit(String),
}

/// One of the two transmitters sharing the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Primary,
    Secondary,
}

/// Physical parameters of the two links and the two cross links.
///
/// Gains are the means of the exponentially distributed power gains
/// (Rayleigh amplitude fading). SNR figures are formed as transmit power over
/// receiver noise power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    /// Bits carried by one packet.
    pub bits_per_packet: f64,
    /// Slot duration `T` in seconds.
    pub slot_duration: f64,
    /// Channel bandwidth `W` in Hz.
    pub bandwidth: f64,
    /// Sensing phase duration `tau` in seconds, `0 < tau < T`.
    pub sensing_duration: f64,
    /// Primary transmitter to primary receiver.
    pub gain_pp: f64,
    /// Secondary transmitter to primary receiver.
    pub gain_sp: f64,
    /// Secondary transmitter to secondary receiver.
    pub gain_ss: f64,
    /// Primary transmitter to secondary receiver.
    pub gain_ps: f64,
    /// Noise power at the primary receiver (W).
    pub noise_primary_rx: f64,
    /// Noise power at the secondary receiver (W).
    pub noise_secondary_rx: f64,
    /// Fixed primary transmit power (W).
    pub primary_power: f64,
    /// Energy spent by the secondary on one packet (J).
    pub secondary_energy: f64,
}

fn positive(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ChannelError::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ChannelError::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

fn start_offset(i: u8) -> Result<f64, ChannelError> {
    match i {
        0 => Ok(0.0),
        1 => Ok(1.0),
        other => Err(ChannelError::InvalidStartIndex(other)),
    }
}

impl LinkModel {
    pub fn validate(&self) -> Result<(), ChannelError> {
        non_negative("bits_per_packet", self.bits_per_packet)?;
        positive("slot_duration", self.slot_duration)?;
        positive("bandwidth", self.bandwidth)?;
        positive("sensing_duration", self.sensing_duration)?;
        if self.sensing_duration >= self.slot_duration {
            return Err(ChannelError::InvalidParameter {
                name: "sensing_duration",
                value: self.sensing_duration,
                reason: "must be shorter than the slot",
            });
        }
        positive("gain_pp", self.gain_pp)?;
        positive("gain_sp", self.gain_sp)?;
        positive("gain_ss", self.gain_ss)?;
        positive("gain_ps", self.gain_ps)?;
        positive("noise_primary_rx", self.noise_primary_rx)?;
        positive("noise_secondary_rx", self.noise_secondary_rx)?;
        non_negative("primary_power", self.primary_power)?;
        non_negative("secondary_energy", self.secondary_energy)?;
        Ok(())
    }

    /// Transmission time of a packet that starts at `i * tau`.
    fn airtime(&self, i: f64) -> f64 {
        self.slot_duration - i * self.sensing_duration
    }

    /// `2^R - 1` for a transmission starting at `i * tau`.
    pub(crate) fn snr_threshold(&self, i: f64) -> f64 {
        let rate = self.bits_per_packet / (self.bandwidth * self.airtime(i));
        (rate * std::f64::consts::LN_2).exp_m1()
    }

    fn noise_at_receiver_of(&self, node: Node) -> f64 {
        match node {
            Node::Primary => self.noise_primary_rx,
            Node::Secondary => self.noise_secondary_rx,
        }
    }

    /// Transmit SNR `gamma` of `node` measured at `receiver_of`'s receiver,
    /// starting at `i * tau`.
    fn snr(&self, node: Node, receiver_of: Node, i: f64) -> f64 {
        let noise = self.noise_at_receiver_of(receiver_of);
        match node {
            Node::Primary => self.primary_power / noise,
            Node::Secondary => self.secondary_energy / (self.airtime(i) * noise),
        }
    }

    fn gain(&self, from: Node, receiver_of: Node) -> f64 {
        match (from, receiver_of) {
            (Node::Primary, Node::Primary) => self.gain_pp,
            (Node::Secondary, Node::Primary) => self.gain_sp,
            (Node::Secondary, Node::Secondary) => self.gain_ss,
            (Node::Primary, Node::Secondary) => self.gain_ps,
        }
    }

    /// Mean received SNR `gamma * sigma` of `from` at the receiver of `receiver_of`.
    pub(crate) fn mean_snr(&self, from: Node, receiver_of: Node, i: f64) -> f64 {
        self.snr(from, receiver_of, i) * self.gain(from, receiver_of)
    }
}

fn decay(threshold: f64, mean_snr: f64) -> f64 {
    if threshold <= 0.0 {
        return 1.0;
    }
    let exponent = if mean_snr > 0.0 {
        -(threshold / mean_snr)
    } else {
        f64::NEG_INFINITY
    };
    exponent.max(MIN_LOG_PROB).exp().clamp(0.0, 1.0)
}

/// Probability that `sender`'s packet is decoded with no concurrent
/// transmission, when it starts at `i * tau` (`i` in {0, 1}).
pub fn success_alone(link: &LinkModel, sender: Node, i: u8) -> Result<f64, ChannelError> {
    link.validate()?;
    let offset = start_offset(i)?;
    if sender == Node::Primary && i != 0 {
        return Err(ChannelError::PrimaryOffset);
    }
    Ok(decay(
        link.snr_threshold(offset),
        link.mean_snr(sender, sender, offset),
    ))
}

/// Probability that `sender`'s packet (starting at `i * tau`) is decoded while
/// `interferer` transmits concurrently from `n * tau`.
///
/// For a primary victim the interferer's start offset is ignored: with
/// `tau << T` the secondary power `e / (T - n tau)` is taken as `e / T`.
pub fn success_interfered(
    link: &LinkModel,
    sender: Node,
    interferer: Node,
    i: u8,
    n: u8,
) -> Result<f64, ChannelError> {
    if sender == interferer {
        return Err(ChannelError::SameNode);
    }
    let alone = success_alone(link, sender, i)?;
    start_offset(n)?;
    if interferer == Node::Primary && n != 0 {
        return Err(ChannelError::PrimaryOffset);
    }
    let offset = if i == 1 { 1.0 } else { 0.0 };
    let threshold = link.snr_threshold(offset);
    if threshold <= 0.0 {
        return Ok(alone);
    }
    let own = link.mean_snr(sender, sender, offset);
    let other = link.mean_snr(interferer, sender, 0.0);
    if own <= 0.0 {
        return Ok(alone);
    }
    Ok((alone / (1.0 + threshold * other / own)).clamp(0.0, 1.0))
}

/// The six reception probabilities the queueing analysis consumes.
///
/// Suffix `_c` marks a concurrent transmission by the other node; `0s`/`1s`
/// mark a secondary transmission over the full slot or after sensing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbs {
    pub p_bar_p: f64,
    pub p_bar_p_c: f64,
    pub p_bar_0s: f64,
    pub p_bar_1s: f64,
    pub p_bar_0s_c: f64,
    pub p_bar_1s_c: f64,
}

impl SuccessProbs {
    pub fn new(
        p_bar_p: f64,
        p_bar_p_c: f64,
        p_bar_0s: f64,
        p_bar_1s: f64,
        p_bar_0s_c: f64,
        p_bar_1s_c: f64,
    ) -> Result<Self, ChannelError> {
        let probs = Self {
            p_bar_p,
            p_bar_p_c,
            p_bar_0s,
            p_bar_1s,
            p_bar_0s_c,
            p_bar_1s_c,
        };
        probs.validate()?;
        Ok(probs)
    }

    /// Checks ranges and that interference never raises a success probability.
    ///
    /// The sensing-delay ordering (`p_bar_1s <= p_bar_0s`) is not enforced
    /// here because several published parameter sets violate it for the
    /// interfered pair; see [`SuccessProbs::is_sensing_delay_consistent`].
    pub fn validate(&self) -> Result<(), ChannelError> {
        for (name, value) in self.named() {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(ChannelError::OutOfRange { name, value });
            }
        }
        let pairs = [
            ("p_bar_p", self.p_bar_p, "p_bar_p_c", self.p_bar_p_c),
            ("p_bar_0s", self.p_bar_0s, "p_bar_0s_c", self.p_bar_0s_c),
            ("p_bar_1s", self.p_bar_1s, "p_bar_1s_c", self.p_bar_1s_c),
        ];
        for (alone, a, interfered, b) in pairs {
            if b > a {
                return Err(ChannelError::InterferenceOrder { alone, interfered });
            }
        }
        Ok(())
    }

    /// True when a shortened (post-sensing) transmission is never more
    /// reliable than a full-slot one, as any physical link guarantees.
    pub fn is_sensing_delay_consistent(&self) -> bool {
        self.p_bar_1s <= self.p_bar_0s && self.p_bar_1s_c <= self.p_bar_0s_c
    }

    /// Primary success loss caused by a concurrent secondary transmission.
    pub fn delta_p(&self) -> f64 {
        self.p_bar_p - self.p_bar_p_c
    }

    /// `p_bar_0s_c / p_bar_0s`, the full-slot MPR strength of the secondary receiver.
    pub fn delta_0s(&self) -> f64 {
        if self.p_bar_0s > 0.0 {
            self.p_bar_0s_c / self.p_bar_0s
        } else {
            1.0
        }
    }

    pub fn delta_1s(&self) -> f64 {
        if self.p_bar_1s > 0.0 {
            self.p_bar_1s_c / self.p_bar_1s
        } else {
            1.0
        }
    }

    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("p_bar_p", self.p_bar_p),
            ("p_bar_p_c", self.p_bar_p_c),
            ("p_bar_0s", self.p_bar_0s),
            ("p_bar_1s", self.p_bar_1s),
            ("p_bar_0s_c", self.p_bar_0s_c),
            ("p_bar_1s_c", self.p_bar_1s_c),
        ]
    }
}

/// Evaluates all six reception probabilities for a physical link.
pub fn derive_success_probs(link: &LinkModel) -> Result<SuccessProbs, ChannelError> {
    use Node::{Primary, Secondary};
    let p_bar_p = success_alone(link, Primary, 0)?;
    let p_bar_p_c = success_interfered(link, Primary, Secondary, 0, 0)?;
    let p_bar_0s = success_alone(link, Secondary, 0)?;
    let p_bar_1s = success_alone(link, Secondary, 1)?;
    let p_bar_0s_c = success_interfered(link, Secondary, Primary, 0, 0)?;
    let p_bar_1s_c = success_interfered(link, Secondary, Primary, 1, 0)?;
    SuccessProbs::new(
        p_bar_p, p_bar_p_c, p_bar_0s, p_bar_1s, p_bar_0s_c, p_bar_1s_c,
    )
}

/// Result of inverting the link model for a target probability set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkFit {
    pub link: LinkModel,
    pub achieved: SuccessProbs,
    pub max_abs_error: f64,
}

/// `(2^(c u) - 1) / u`, increasing in `u > 0`.
fn scaled_threshold(c: f64, u: f64) -> f64 {
    (c * u * std::f64::consts::LN_2).exp_m1() / u
}

/// Finds a link model whose derived probabilities match `target` within `tol`.
///
/// Five of the six probabilities can be matched exactly: the primary pair
/// fixes the primary SNR and the secondary-to-primary cross gain, the
/// secondary alone pair fixes the secondary SNR and `tau / T`, and the
/// full-slot interfered value fixes the primary-to-secondary cross gain. The
/// post-sensing interfered value is then determined; the fit fails when it
/// misses the target by more than `tol`.
pub fn fit_link(target: &SuccessProbs, tol: f64) -> Result<LinkFit, ChannelError> {
    target.validate()?;
    let open = |name: &str, v: f64| {
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(ChannelError::NoFit(format!(
                "{name} = {v} must lie strictly inside (0, 1)"
            )))
        }
    };
    open("p_bar_p", target.p_bar_p)?;
    open("p_bar_0s", target.p_bar_0s)?;
    open("p_bar_1s", target.p_bar_1s)?;
    if !(target.p_bar_p_c > 0.0 && target.p_bar_p_c < target.p_bar_p) {
        return Err(ChannelError::NoFit(
            "p_bar_p_c must lie strictly between 0 and p_bar_p".into(),
        ));
    }
    if !(target.p_bar_0s_c > 0.0 && target.p_bar_0s_c < target.p_bar_0s) {
        return Err(ChannelError::NoFit(
            "p_bar_0s_c must lie strictly between 0 and p_bar_0s".into(),
        ));
    }
    if target.p_bar_1s >= target.p_bar_0s {
        return Err(ChannelError::NoFit(
            "a post-sensing transmission must be less reliable than a full-slot one".into(),
        ));
    }

    // Unit slot, bandwidth and noise; one bit per packet.
    let load = 1.0;
    let base = scaled_threshold(load, 1.0);
    let primary_snr = base / -target.p_bar_p.ln();
    let secondary_snr = base / -target.p_bar_0s.ln();

    // Stretch factor u = T / (T - tau) from the alone pair.
    let ratio = target.p_bar_1s.ln() / target.p_bar_0s.ln();
    let goal = ratio * base;
    let mut hi = 2.0;
    while scaled_threshold(load, hi) < goal {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(ChannelError::NoFit(
                "sensing fraction does not converge".into(),
            ));
        }
    }
    let mut lo = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if scaled_threshold(load, mid) < goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let stretch = 0.5 * (lo + hi);

    let cross_at_primary = (target.p_bar_p / target.p_bar_p_c - 1.0) * primary_snr / base;
    let cross_at_secondary = (target.p_bar_0s / target.p_bar_0s_c - 1.0) * secondary_snr / base;

    let link = LinkModel {
        bits_per_packet: load,
        slot_duration: 1.0,
        bandwidth: 1.0,
        sensing_duration: 1.0 - 1.0 / stretch,
        gain_pp: 1.0,
        gain_sp: cross_at_primary / secondary_snr,
        gain_ss: 1.0,
        gain_ps: cross_at_secondary / primary_snr,
        noise_primary_rx: 1.0,
        noise_secondary_rx: 1.0,
        primary_power: primary_snr,
        secondary_energy: secondary_snr,
    };
    let achieved = derive_success_probs(&link)?;
    let max_abs_error = achieved
        .named()
        .iter()
        .zip(target.named().iter())
        .map(|((_, a), (_, b))| (a - b).abs())
        .fold(0.0, f64::max);
    if max_abs_error > tol {
        return Err(ChannelError::NoFit(format!(
            "closest link misses by {max_abs_error:.3e} (p_bar_1s_c = {:.6} vs target {:.6})",
            achieved.p_bar_1s_c, target.p_bar_1s_c
        )));
    }
    Ok(LinkFit {
        link,
        achieved,
        max_abs_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Link with unit bandwidth and slot so that `b` is the spectral load.
    pub(crate) fn unit_link(bits: f64, tau: f64) -> LinkModel {
        LinkModel {
            bits_per_packet: bits,
            slot_duration: 1.0,
            bandwidth: 1.0,
            sensing_duration: tau,
            gain_pp: 1.0,
            gain_sp: 1.0,
            gain_ss: 1.0,
            gain_ps: 1.0,
            noise_primary_rx: 1.0,
            noise_secondary_rx: 1.0,
            primary_power: 1.0,
            secondary_energy: 1.0,
        }
    }

    #[test]
    fn zero_rate_packet_always_decodes() {
        let link = unit_link(0.0, 0.05);
        assert_eq!(success_alone(&link, Node::Primary, 0).unwrap(), 1.0);
        assert_eq!(success_alone(&link, Node::Secondary, 1).unwrap(), 1.0);
    }

    #[test]
    fn hand_evaluated_alone_values() {
        let link = unit_link(1.0, 0.05);
        let full = success_alone(&link, Node::Secondary, 0).unwrap();
        assert!((full - (-1.0f64).exp()).abs() < 1e-12);
        let late = success_alone(&link, Node::Secondary, 1).unwrap();
        let expected = (-((2f64.powf(1.0 / 0.95) - 1.0) * 0.95)).exp();
        assert!((late - expected).abs() < 1e-12);
        assert!((late - 0.360_380_6).abs() < 1e-7);
        assert!(late < full);
    }

    #[test]
    fn hand_evaluated_interfered_value() {
        let link = unit_link(1.0, 0.05);
        let p = success_interfered(&link, Node::Secondary, Node::Primary, 0, 0).unwrap();
        assert!((p - 0.183_939_720_585_721_2).abs() < 1e-12);
    }

    #[test]
    fn silent_interferer_changes_nothing() {
        let mut link = unit_link(1.0, 0.05);
        link.primary_power = 0.0;
        let alone = success_alone(&link, Node::Secondary, 1).unwrap();
        let with = success_interfered(&link, Node::Secondary, Node::Primary, 1, 0).unwrap();
        assert_eq!(alone, with);
    }

    #[test]
    fn primary_victim_ignores_secondary_offset() {
        let link = unit_link(1.0, 0.05);
        let n0 = success_interfered(&link, Node::Primary, Node::Secondary, 0, 0).unwrap();
        let n1 = success_interfered(&link, Node::Primary, Node::Secondary, 0, 1).unwrap();
        assert_eq!(n0, n1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let link = unit_link(1.0, 0.05);
        assert_eq!(
            success_alone(&link, Node::Secondary, 2),
            Err(ChannelError::InvalidStartIndex(2))
        );
        assert_eq!(
            success_alone(&link, Node::Primary, 1),
            Err(ChannelError::PrimaryOffset)
        );
        assert_eq!(
            success_interfered(&link, Node::Primary, Node::Primary, 0, 0),
            Err(ChannelError::SameNode)
        );
        let long_sensing = unit_link(1.0, 1.0);
        assert!(matches!(
            success_alone(&long_sensing, Node::Secondary, 0),
            Err(ChannelError::InvalidParameter {
                name: "sensing_duration",
                ..
            })
        ));
    }

    #[test]
    fn underflow_is_clamped() {
        let mut link = unit_link(40.0, 0.05);
        link.secondary_energy = 1e-3;
        let p = success_alone(&link, Node::Secondary, 1).unwrap();
        assert!(p > 0.0 && p <= 1e-299);
    }

    #[test]
    fn degenerate_link_gives_all_ones() {
        let probs = derive_success_probs(&unit_link(0.0, 0.1)).unwrap();
        for (_, v) in probs.named() {
            assert_eq!(v, 1.0);
        }
        assert_eq!(probs.delta_p(), 0.0);
    }

    #[test]
    fn success_probs_validation() {
        assert!(SuccessProbs::new(0.7, 0.1, 0.8, 0.6, 0.1, 0.3).is_ok());
        assert!(!SuccessProbs::new(0.7, 0.1, 0.8, 0.6, 0.1, 0.3)
            .unwrap()
            .is_sensing_delay_consistent());
        assert!(matches!(
            SuccessProbs::new(0.7, 0.8, 0.8, 0.6, 0.1, 0.3),
            Err(ChannelError::InterferenceOrder { .. })
        ));
        assert!(matches!(
            SuccessProbs::new(1.2, 0.1, 0.8, 0.6, 0.1, 0.3),
            Err(ChannelError::OutOfRange {
                name: "p_bar_p",
                ..
            })
        ));
    }

    #[test]
    fn fit_recovers_a_physical_set() {
        let link = LinkModel {
            bits_per_packet: 2.0e3,
            slot_duration: 1e-3,
            bandwidth: 1.5e6,
            sensing_duration: 0.08e-3,
            gain_pp: 1.3,
            gain_sp: 0.4,
            gain_ss: 0.9,
            gain_ps: 0.25,
            noise_primary_rx: 1e-9,
            noise_secondary_rx: 2e-9,
            primary_power: 3e-9,
            secondary_energy: 4e-12,
        };
        let target = derive_success_probs(&link).unwrap();
        let fit = fit_link(&target, 1e-3).unwrap();
        assert!(fit.max_abs_error < 1e-9, "{}", fit.max_abs_error);
    }

    #[test]
    fn published_sets_are_not_physically_reachable() {
        // Equal MPR ratios at both start offsets cannot come from one link.
        let fig4 = SuccessProbs::new(0.7, 0.1, 0.8, 0.6, 0.1, 0.075).unwrap();
        assert!(matches!(fit_link(&fig4, 1e-3), Err(ChannelError::NoFit(_))));
        let fig3 = SuccessProbs::new(0.7, 0.1, 0.8, 0.6, 0.1, 0.3).unwrap();
        assert!(matches!(fit_link(&fig3, 1e-3), Err(ChannelError::NoFit(_))));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn any_link() -> impl Strategy<Value = LinkModel> {
            (
                (0.0..3.0f64, 0.001..0.5f64),
                (0.05..5.0f64, 0.05..5.0f64, 0.05..5.0f64, 0.05..5.0f64),
                (0.1..3.0f64, 0.1..3.0f64, 0.0..3.0f64, 0.0..3.0f64),
            )
                .prop_map(
                    |((bits, tau), (pp, sp, ss, ps), (n_p, n_s, power, energy))| LinkModel {
                        gain_pp: pp,
                        gain_sp: sp,
                        gain_ss: ss,
                        gain_ps: ps,
                        noise_primary_rx: n_p,
                        noise_secondary_rx: n_s,
                        primary_power: power,
                        secondary_energy: energy,
                        ..unit_link(bits, tau)
                    },
                )
        }

        proptest! {
            #[test]
            fn interference_never_helps(link in any_link()) {
                for (sender, other) in [(Node::Primary, Node::Secondary), (Node::Secondary, Node::Primary)] {
                    let starts: &[u8] = if sender == Node::Primary { &[0] } else { &[0, 1] };
                    for &i in starts {
                        let alone = success_alone(&link, sender, i).unwrap();
                        let hit = success_interfered(&link, sender, other, i, 0).unwrap();
                        prop_assert!(hit <= alone + 1e-12);
                        prop_assert!(alone > 0.0 && alone <= 1.0);
                    }
                }
            }

            #[test]
            fn late_start_never_helps(link in any_link()) {
                let a0 = success_alone(&link, Node::Secondary, 0).unwrap();
                let a1 = success_alone(&link, Node::Secondary, 1).unwrap();
                prop_assert!(a1 <= a0 + 1e-12);
                let c0 = success_interfered(&link, Node::Secondary, Node::Primary, 0, 0).unwrap();
                let c1 = success_interfered(&link, Node::Secondary, Node::Primary, 1, 0).unwrap();
                prop_assert!(c1 <= c0 + 1e-12);
            }

            #[test]
            fn derived_probabilities_satisfy_every_ordering(link in any_link()) {
                let p = derive_success_probs(&link).unwrap();
                prop_assert!(p.validate().is_ok());
                prop_assert!(p.is_sensing_delay_consistent());
                prop_assert!(p.delta_p() >= 0.0);
            }

            #[test]
            fn more_bits_lower_success(link in any_link(), extra in 0.01..1.0f64) {
                let heavier = LinkModel { bits_per_packet: link.bits_per_packet + extra, ..link };
                for (sender, i) in [(Node::Primary, 0), (Node::Secondary, 0), (Node::Secondary, 1)] {
                    let a = success_alone(&link, sender, i).unwrap();
                    let b = success_alone(&heavier, sender, i).unwrap();
                    prop_assert!(b <= a);
                }
            }
        }
    }
}
