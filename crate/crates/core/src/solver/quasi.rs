//! Numeric quasiconcavity test on random segments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::programs::policy_at;
use crate::channel::SuccessProbs;
use crate::rates::{s1_secondary_rate, sf1_secondary_rate_inclusive, Traffic};

const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub value_x: f64,
    pub value_y: f64,
    pub value_mid: f64,
}

impl Counterexample {
    /// Amount by which the interior value falls below the endpoint minimum.
    pub fn violation(&self) -> f64 {
        self.value_x.min(self.value_y) - self.value_mid
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiReport {
    pub passed: bool,
    /// Segments with both endpoints and the interior point in the domain.
    pub segments_checked: usize,
    pub violations: usize,
    /// Worst violation found, if any.
    pub counterexample: Option<Counterexample>,
}

/// Samples `samples` random segments in the box `[lower, upper]` and checks
/// `V(t x + (1 - t) y) >= min(V(x), V(y)) - 1e-9`. `V` returns `None` outside
/// its domain; such segments are skipped.
pub fn check_quasiconcavity(
    v: impl Fn(&[f64]) -> Option<f64>,
    lower: &[f64],
    upper: &[f64],
    samples: usize,
    seed: u64,
) -> QuasiReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lower.len();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|i| lower[i] + (upper[i] - lower[i]) * rng.random::<f64>())
            .collect()
    };
    let mut checked = 0;
    let mut violations = 0;
    let mut worst: Option<Counterexample> = None;
    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let t: f64 = rng.random();
        let mid: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| t * a + (1.0 - t) * b)
            .collect();
        let (Some(vx), Some(vy), Some(vm)) = (v(&x), v(&y), v(&mid)) else {
            continue;
        };
        checked += 1;
        if vm < vx.min(vy) - SLACK {
            violations += 1;
            let candidate = Counterexample {
                x,
                y,
                t,
                value_x: vx,
                value_y: vy,
                value_mid: vm,
            };
            if worst
                .as_ref()
                .is_none_or(|w| candidate.violation() > w.violation())
            {
                worst = Some(candidate);
            }
        }
    }
    QuasiReport {
        passed: violations == 0,
        segments_checked: checked,
        violations,
        counterexample: worst,
    }
}

/// No-feedback secondary rate as a function of `(p_t, p_f, p_b)` at fixed
/// `p_s`, defined where the primary is stable.
pub fn s1_objective<'a>(
    probs: &'a SuccessProbs,
    traffic: &'a Traffic,
    p_s: f64,
) -> impl Fn(&[f64]) -> Option<f64> + 'a {
    move |x: &[f64]| {
        s1_secondary_rate(&policy_at(p_s, &[x[0], x[1], x[2], 0.0]), probs, traffic).ok()
    }
}

/// Feedback secondary rate as a function of `(p_t, p_f, p_b, p_r)` at fixed
/// `p_s`, defined where the primary is stable.
pub fn sf_objective<'a>(
    probs: &'a SuccessProbs,
    traffic: &'a Traffic,
    p_s: f64,
) -> impl Fn(&[f64]) -> Option<f64> + 'a {
    move |x: &[f64]| sf1_secondary_rate_inclusive(&policy_at(p_s, x), probs, traffic).ok()
}
