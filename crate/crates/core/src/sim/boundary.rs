//! Empirical stability boundary by bisection on an arrival rate.

use serde::{Deserialize, Serialize};

use super::{run, SimConfig, SimError, SimReport};
use crate::channel::SuccessProbs;
use crate::rates::{AccessPolicy, Traffic};

/// Queue growth (packets/slot) above which a run is declared unstable.
const GROWTH_LIMIT: f64 = 1e-3;
/// Growth band around the limit where the verdict is ambiguous.
const AMBIGUOUS: (f64, f64) = (0.5e-3, 2e-3);
const RESOLUTION: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryAxis {
    /// Bisect on `lambda_s` at the traffic's `lambda_p`.
    Secondary,
    /// Bisect on `lambda_p` at the traffic's `lambda_s`.
    Primary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEstimate {
    /// Midpoint of the final bracket.
    pub boundary: f64,
    pub lower: f64,
    pub upper: f64,
    /// Some verdict fell in the ambiguous growth band; re-run with more slots.
    pub inconclusive: bool,
    pub runs: usize,
}

fn growth(report: &SimReport) -> f64 {
    report.slope_p.max(report.slope_s)
}

/// Bisects the arrival rate on `axis` over `[0, 1]` until the bracket is
/// narrower than `5e-3`, declaring a run unstable when either data queue
/// grows faster than `1e-3` packets/slot over the last half of the run.
pub fn estimate_boundary(
    config: &SimConfig,
    probs: &SuccessProbs,
    traffic: &Traffic,
    policy: &AccessPolicy,
    axis: BoundaryAxis,
) -> Result<BoundaryEstimate, SimError> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut inconclusive = false;
    let mut runs = 0;
    while hi - lo > RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let t = match axis {
            BoundaryAxis::Secondary => traffic.with_lambda_s(mid),
            BoundaryAxis::Primary => traffic.with_lambda_p(mid),
        };
        let report = run(config, policy, probs, &t)?;
        runs += 1;
        let g = growth(&report);
        if g > AMBIGUOUS.0 && g < AMBIGUOUS.1 {
            inconclusive = true;
        }
        if g > GROWTH_LIMIT {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(BoundaryEstimate {
        boundary: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        inconclusive,
        runs,
    })
}
