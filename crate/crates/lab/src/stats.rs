//! Point estimates with 95% intervals.

use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

/// Two-sided 95% normal quantile.
pub fn z95() -> f64 {
    ea_core::rng::inverse_normal_cdf(0.975)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub lo95: f64,
    pub hi95: f64,
}

impl Estimate {
    /// Sample mean, `sd/sqrt(n)` with the `n-1` variance, normal interval.
    /// A single value gets a zero standard error.
    pub fn mean_of(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(LabError::EmptyAggregation);
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        let half = z95() * stderr;
        Ok(Self { mean, stderr, n, lo95: mean - half, hi95: mean + half })
    }

    /// Proportion with the Wilson score interval.
    pub fn proportion(successes: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::EmptyAggregation);
        }
        let nf = n as f64;
        let p = successes as f64 / nf;
        let z = z95();
        let z2 = z * z;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        Ok(Self {
            mean: p,
            stderr: (p * (1.0 - p) / nf).sqrt(),
            n,
            lo95: (center - half).clamp(0.0, p),
            hi95: (center + half).clamp(p, 1.0),
        })
    }

    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Result<Self> {
        let (hits, n) = flags.into_iter().fold((0, 0), |(h, n), f| (h + usize::from(f), n + 1));
        Self::proportion(hits, n)
    }
}

/// `sqrt(a.stderr^2 + b.stderr^2)`.
pub fn pooled_stderr(a: &Estimate, b: &Estimate) -> f64 {
    a.stderr.hypot(b.stderr)
}

/// Linear-interpolation quantile of a sample, `q` in [0, 1].
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(LabError::EmptyAggregation);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}
