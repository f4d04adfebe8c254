//! Named parameter sets for the figure families.
//!
//! These sets live directly in probability space. Several of them are not
//! realizable by a single physical link (see [`crate::channel::fit_link`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::SuccessProbs;
use crate::rates::Traffic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Stability regions with and without feedback.
    Fig3,
    /// Comparison with the conventional sense-then-access baseline.
    Fig4,
    /// Secondary receiver MPR strength sweep.
    Fig5,
    /// Primary receiver MPR strength sweep.
    Fig6,
    /// Energy arrival rate sweep at fixed primary load.
    Fig7,
    /// Primary delay constraint sweep.
    Fig8,
}

/// Secondary-receiver MPR ratios swept by [`Preset::Fig5`].
pub const FIG5_DELTAS: [f64; 4] = [0.0, 0.125, 0.25, 0.5];
/// Primary-receiver interfered success probabilities swept by [`Preset::Fig6`].
pub const FIG6_P_BAR_P_C: [f64; 5] = [0.0, 0.1, 0.2, 0.4, 0.6];
/// Delay bounds (slots) compared by [`Preset::Fig8`].
pub const FIG8_DELAYS: [f64; 2] = [2.0, 4.0];
/// Primary arrival rate held fixed by [`Preset::Fig7`].
pub const FIG7_LAMBDA_P: f64 = 0.4;

const FIG4_PROBS: SuccessProbs = SuccessProbs {
    p_bar_p: 0.7,
    p_bar_p_c: 0.1,
    p_bar_0s: 0.8,
    p_bar_1s: 0.6,
    p_bar_0s_c: 0.1,
    p_bar_1s_c: 0.075,
};

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
        }
    }

    /// Default reception probabilities. Sweeping presets return their
    /// default member: `delta = 1/8` for fig5 and `p_bar_p_c = 0.1` for fig6.
    pub fn probs(self) -> SuccessProbs {
        match self {
            Preset::Fig3 => SuccessProbs {
                p_bar_1s_c: 0.3,
                ..FIG4_PROBS
            },
            Preset::Fig5 => secondary_mpr(0.125),
            _ => FIG4_PROBS,
        }
    }

    /// Traffic template with `lambda_p` and `lambda_s` at zero (fig7 fixes
    /// `lambda_p`).
    pub fn traffic(self) -> Traffic {
        let (lambda_e, p_fa, p_md) = match self {
            Preset::Fig3 => (1.0, 0.01, 0.02),
            Preset::Fig6 => (0.8, 0.05, 0.01),
            _ => (0.4, 0.05, 0.01),
        };
        Traffic {
            lambda_p: if self == Preset::Fig7 {
                FIG7_LAMBDA_P
            } else {
                0.0
            },
            lambda_s: 0.0,
            lambda_e,
            p_fa,
            p_md,
        }
    }
}

/// Fig5 member with `p_bar_0s_c / p_bar_0s = p_bar_1s_c / p_bar_1s = delta`.
pub fn secondary_mpr(delta: f64) -> SuccessProbs {
    SuccessProbs {
        p_bar_0s_c: FIG4_PROBS.p_bar_0s * delta,
        p_bar_1s_c: FIG4_PROBS.p_bar_1s * delta,
        ..FIG4_PROBS
    }
}

/// Fig6 member with the given primary success probability under interference.
pub fn primary_mpr(p_bar_p_c: f64) -> SuccessProbs {
    SuccessProbs {
        p_bar_p_c,
        ..FIG4_PROBS
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown preset `{0}` (expected one of fig3, fig4, fig5, fig6, fig7, fig8)")]
pub struct UnknownPreset(pub String);

impl FromStr for Preset {
    type Err = UnknownPreset;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownPreset(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for preset in Preset::ALL {
            preset.probs().validate().unwrap();
            preset.traffic().validate().unwrap();
            assert_eq!(preset.name().parse::<Preset>().unwrap(), preset);
        }
        for delta in FIG5_DELTAS {
            secondary_mpr(delta).validate().unwrap();
        }
        for c in FIG6_P_BAR_P_C {
            primary_mpr(c).validate().unwrap();
        }
        assert!("fig9".parse::<Preset>().is_err());
    }

    #[test]
    fn fig3_values() {
        let p = Preset::Fig3.probs();
        assert_eq!(
            [
                p.p_bar_p,
                p.p_bar_p_c,
                p.p_bar_0s,
                p.p_bar_0s_c,
                p.p_bar_1s,
                p.p_bar_1s_c
            ],
            [0.7, 0.1, 0.8, 0.1, 0.6, 0.3]
        );
        let t = Preset::Fig3.traffic();
        assert_eq!((t.lambda_e, t.p_fa, t.p_md), (1.0, 0.01, 0.02));
    }

    #[test]
    fn fig5_default_member() {
        let p = Preset::Fig5.probs();
        assert!((p.delta_0s() - 0.125).abs() < 1e-15);
        assert!((p.delta_1s() - 0.125).abs() < 1e-15);
    }
}
