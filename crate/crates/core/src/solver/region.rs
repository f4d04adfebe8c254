//! Stability-region sweeps: for each primary arrival rate, the largest
//! secondary arrival rate that keeps both queues stable.

use serde::{Deserialize, Serialize};

use super::{optimize_s1, optimize_sf1, SolveResult, SolverOptions, SystemTag};
use crate::channel::SuccessProbs;
use crate::rates::{
    busy_success, delay_s1, delay_sf1, s1_delay_value, s1_primary_rate, s1_secondary_rate,
    AccessPolicy, Traffic,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub lambda_p: f64,
    pub lambda_s_max: f64,
    pub system: SystemTag,
    pub policy: AccessPolicy,
    pub mu_p: f64,
    pub mu_s: f64,
    /// Mean primary delay at the operating point (infinite on the boundary).
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionCurve {
    pub points: Vec<RegionPoint>,
}

impl RegionCurve {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda_s_max).collect()
    }

    /// Point at `lambda_p`, if present.
    pub fn at(&self, lambda_p: f64) -> Option<&RegionPoint> {
        self.points.iter().find(|p| p.lambda_p == lambda_p)
    }
}

impl RegionPoint {
    pub fn from_solve(lambda_p: f64, r: &SolveResult, delay: f64) -> Self {
        Self {
            lambda_p,
            lambda_s_max: r.best_value,
            system: r.system,
            policy: r.best_policy,
            mu_p: r.mu_p,
            mu_s: r.best_value,
            delay,
        }
    }
}

/// Largest stable `lambda_s` of the saturated-primary system for a given
/// policy: the secondary must be served (`lambda_s <= mu_s`) and the primary
/// must keep `mu_p >= lambda_p` while interfered in a fraction
/// `lambda_s / mu_s` of slots.
fn s2_capacity(policy: &AccessPolicy, probs: &SuccessProbs, traffic: &Traffic) -> Option<f64> {
    let lambda = traffic.lambda_p;
    if lambda > probs.p_bar_p {
        return None;
    }
    let busy = busy_success(policy, probs, traffic);
    let harm = probs.delta_p() * policy.busy_access(traffic.p_md);
    let served = traffic.lambda_e * busy;
    if harm == 0.0 {
        Some(served)
    } else {
        Some(served.min((probs.p_bar_p - lambda) * busy / harm))
    }
}

/// Boundary point of the saturated-primary system, which accesses at random
/// without sensing and treats retransmissions like any other slot.
pub fn s2_point(probs: &SuccessProbs, traffic: &Traffic, lambda_p: f64) -> Option<RegionPoint> {
    let t = traffic.with_lambda_p(lambda_p);
    let full = AccessPolicy {
        p_t: 1.0,
        p_r: 1.0,
        ..AccessPolicy::SILENT
    };
    let lambda_s = s2_capacity(&full, probs, &t)?;
    let capacity = t.lambda_e * probs.p_bar_0s_c;
    let p_t = if lambda_s > 0.0 {
        (lambda_s / capacity).min(1.0)
    } else {
        0.0
    };
    let policy = AccessPolicy {
        p_t,
        p_r: p_t,
        ..AccessPolicy::SILENT
    };
    let mu_p = if lambda_s > 0.0 {
        probs.p_bar_p - lambda_s * probs.delta_p() / probs.p_bar_0s_c
    } else {
        probs.p_bar_p
    };
    Some(RegionPoint {
        lambda_p,
        lambda_s_max: lambda_s,
        system: SystemTag::S2,
        policy,
        mu_p,
        mu_s: t.lambda_e * p_t * probs.p_bar_0s_c,
        delay: s1_delay_value(lambda_p, mu_p).d_p,
    })
}

/// Union of the two dominant systems at one primary arrival rate. The
/// saturated-secondary optimum wins ties.
pub fn region_point(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
    feedback: bool,
    opts: &SolverOptions,
) -> Option<RegionPoint> {
    let t = traffic.with_lambda_p(lambda_p);
    let first = if feedback {
        optimize_sf1(probs, traffic, lambda_p, opts).ok().map(|r| {
            RegionPoint::from_solve(lambda_p, &r, delay_sf1(&r.best_policy, probs, &t).d_p)
        })
    } else {
        optimize_s1(probs, traffic, lambda_p, opts)
            .ok()
            .map(|r| RegionPoint::from_solve(lambda_p, &r, delay_s1(&r.best_policy, probs, &t).d_p))
    };
    let second = s2_point(probs, traffic, lambda_p);
    match (first, second) {
        (Some(a), Some(b)) => Some(if b.lambda_s_max > a.lambda_s_max {
            b
        } else {
            a
        }),
        (a, b) => a.or(b),
    }
}

/// Stability-region boundary over a grid of primary arrival rates; points
/// where no system is feasible are omitted.
pub fn stability_region(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p_grid: &[f64],
    feedback: bool,
    opts: &SolverOptions,
) -> RegionCurve {
    RegionCurve {
        points: lambda_p_grid
            .iter()
            .filter_map(|&l| region_point(probs, traffic, l, feedback, opts))
            .collect(),
    }
}

/// Boundary of the saturated-primary system alone.
pub fn s2_curve(probs: &SuccessProbs, traffic: &Traffic, lambda_p_grid: &[f64]) -> RegionCurve {
    RegionCurve {
        points: lambda_p_grid
            .iter()
            .filter_map(|&l| s2_point(probs, traffic, l))
            .collect(),
    }
}

/// Boundary of the sense-every-slot baseline (union of its two dominant systems).
pub fn conventional_point(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p: f64,
) -> Option<RegionPoint> {
    let t = traffic.with_lambda_p(lambda_p);
    let policy = AccessPolicy::conventional();
    let mu_p = s1_primary_rate(&policy, probs, &t);
    let first = s1_secondary_rate(&policy, probs, &t).ok();
    let second = s2_capacity(&policy, probs, &t);
    let (lambda_s, mu_s) = match (first, second) {
        (Some(a), Some(b)) if b > a => (b, b),
        (Some(a), _) => (a, a),
        (None, Some(b)) => (b, b),
        (None, None) => return None,
    };
    Some(RegionPoint {
        lambda_p,
        lambda_s_max: lambda_s,
        system: SystemTag::Conventional,
        policy,
        mu_p,
        mu_s,
        delay: s1_delay_value(lambda_p, mu_p).d_p,
    })
}

pub fn conventional_curve(
    probs: &SuccessProbs,
    traffic: &Traffic,
    lambda_p_grid: &[f64],
) -> RegionCurve {
    RegionCurve {
        points: lambda_p_grid
            .iter()
            .filter_map(|&l| conventional_point(probs, traffic, l))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::uniform_grid;

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

    #[test]
    fn s2_bound_values() {
        let (probs, t) = fig4();
        let p = s2_point(&probs, &t, 0.0).unwrap();
        assert!((p.lambda_s_max - 0.04).abs() < 1e-15);
        let p = s2_point(&probs, &t, 0.69).unwrap();
        assert!((p.lambda_s_max - 0.01 * 0.1 / 0.6).abs() < 1e-12);
        assert!(p.mu_p >= 0.69 - 1e-12);
        assert!(s2_point(&probs, &t, 0.71).is_none());
    }

    #[test]
    fn empty_primary_gives_full_secondary_rate() {
        let (probs, t) = fig4();
        let opts = SolverOptions {
            ps_grid: uniform_grid(11),
            ..SolverOptions::default()
        };
        let p = region_point(&probs, &t, 0.0, false, &opts).unwrap();
        assert_eq!(p.system, SystemTag::S1);
        assert!((p.lambda_s_max - 0.32).abs() < 1e-9);
    }

    #[test]
    fn region_is_deterministic_and_ordered() {
        let (probs, t) = fig4();
        let opts = SolverOptions {
            ps_grid: uniform_grid(11),
            ..SolverOptions::default()
        };
        let grid = [0.0, 0.2, 0.4, 0.6, 0.69];
        let a = stability_region(&probs, &t, &grid, true, &opts);
        let b = stability_region(&probs, &t, &grid, true, &opts);
        assert_eq!(a, b);
        assert_eq!(a.points.len(), grid.len());
        let conv = conventional_curve(&probs, &t, &grid);
        for (x, y) in a.points.iter().zip(&conv.points) {
            assert!(x.lambda_s_max >= y.lambda_s_max - 1e-9);
        }
    }
}
