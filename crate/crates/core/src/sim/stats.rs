//! Batch-means confidence intervals and least-squares trend estimates.

use serde::{Deserialize, Serialize};

/// Two-sided 97.5% Student-t quantiles for 1..=60 degrees of freedom.
const T_975: [f64; 60] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160,
    2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056,
    2.052, 2.048, 2.045, 2.042, 2.040, 2.037, 2.035, 2.032, 2.030, 2.028, 2.026, 2.024, 2.023,
    2.021, 2.020, 2.018, 2.017, 2.015, 2.014, 2.013, 2.012, 2.011, 2.010, 2.009, 2.008, 2.007,
    2.006, 2.005, 2.004, 2.003, 2.002, 2.002, 2.001, 2.000,
];

pub fn t_quantile_975(dof: usize) -> f64 {
    match dof {
        0 => f64::INFINITY,
        d if d <= T_975.len() => T_975[d - 1],
        _ => 1.96,
    }
}

/// Point estimate with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: f64,
}

impl Estimate {
    pub const UNDEFINED: Estimate = Estimate {
        mean: f64::NAN,
        half_width: f64::NAN,
    };

    /// Standard error implied by the half-width.
    pub fn std_error(&self, batches: usize) -> f64 {
        self.half_width / t_quantile_975(batches.saturating_sub(1))
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width
    }
}

/// Ratio estimator accumulated per batch: overall mean is `sum num / sum den`,
/// the half-width comes from the spread of per-batch ratios.
#[derive(Debug, Clone, Default)]
pub struct RatioBatches {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RatioBatches {
    pub fn new(batches: usize) -> Self {
        Self {
            num: vec![0.0; batches],
            den: vec![0.0; batches],
        }
    }

    pub fn add(&mut self, batch: usize, num: f64, den: f64) {
        self.num[batch] += num;
        self.den[batch] += den;
    }

    pub fn estimate(&self) -> Estimate {
        let total_den: f64 = self.den.iter().sum();
        if total_den == 0.0 {
            return Estimate::UNDEFINED;
        }
        let mean = self.num.iter().sum::<f64>() / total_den;
        let ratios: Vec<f64> = self
            .num
            .iter()
            .zip(&self.den)
            .filter(|(_, d)| **d > 0.0)
            .map(|(n, d)| n / d)
            .collect();
        let k = ratios.len();
        if k < 2 {
            return Estimate {
                mean,
                half_width: f64::INFINITY,
            };
        }
        let avg = ratios.iter().sum::<f64>() / k as f64;
        let var = ratios.iter().map(|r| (r - avg).powi(2)).sum::<f64>() / (k - 1) as f64;
        Estimate {
            mean,
            half_width: t_quantile_975(k - 1) * (var / k as f64).sqrt(),
        }
    }
}

/// Online least-squares slope of `y` against `x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Trend {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
}

impl Trend {
    pub fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
    }

    pub fn slope(&self) -> f64 {
        let den = self.n * self.sxx - self.sx * self.sx;
        if den == 0.0 {
            0.0
        } else {
            (self.n * self.sxy - self.sx * self.sy) / den
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_recovers_a_line() {
        let mut t = Trend::default();
        for i in 0..100 {
            t.push(i as f64 + 1e5, 3.0 + 0.25 * i as f64);
        }
        assert!((t.slope() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn ratio_batches() {
        let mut r = RatioBatches::new(4);
        for b in 0..4 {
            r.add(b, 1.0 + b as f64, 4.0);
        }
        let e = r.estimate();
        assert!((e.mean - 10.0 / 16.0).abs() < 1e-15);
        assert!(e.half_width > 0.0);
        assert!(RatioBatches::new(3).estimate().mean.is_nan());
    }

    #[test]
    fn quantiles() {
        assert_eq!(t_quantile_975(49), 2.010);
        assert_eq!(t_quantile_975(1000), 1.96);
    }
}
