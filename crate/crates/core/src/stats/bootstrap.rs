//! Percentile bootstrap.

use super::{replicate_rng, StatsError};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub n_resamples: usize,
    pub seed: u64,
    /// Set when resampling noise puts the point estimate outside the interval.
    pub point_outside_interval: bool,
}

/// Linear-interpolation quantile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Bootstrap over resampled indices `0..n`; the statistic sees the index
/// multiset of each resample and the identity `0..n` for the point value.
pub fn bootstrap_indices<F>(
    n: usize,
    statistic: F,
    n_resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapCI, StatsError>
where
    F: Fn(&[usize]) -> Option<f64> + Sync,
{
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    if n_resamples < 100 {
        return Err(StatsError::InvalidParameter(format!(
            "n_resamples must be at least 100, got {n_resamples}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(StatsError::InvalidParameter(format!(
            "confidence must be in (0, 1), got {confidence}"
        )));
    }
    let identity: Vec<usize> = (0..n).collect();
    let point = statistic(&identity)
        .filter(|v| !v.is_nan())
        .ok_or(StatsError::StatisticUndefined { replicate: None })?;
    let replicates: Vec<Result<f64, StatsError>> = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            statistic(&idx)
                .filter(|v| !v.is_nan())
                .ok_or(StatsError::StatisticUndefined { replicate: Some(r) })
        })
        .collect();
    let mut values = replicates.into_iter().collect::<Result<Vec<f64>, _>>()?;
    values.sort_by(f64::total_cmp);
    let alpha = 1.0 - confidence;
    let lower = percentile(&values, alpha / 2.0);
    let upper = percentile(&values, 1.0 - alpha / 2.0);
    Ok(BootstrapCI {
        point,
        lower,
        upper,
        confidence,
        n_resamples,
        seed,
        point_outside_interval: point < lower || point > upper,
    })
}

/// Bootstrap of a statistic of a real sample.
pub fn bootstrap_ci<F>(
    values: &[f64],
    statistic: F,
    n_resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapCI, StatsError>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    super::check_finite(values)?;
    bootstrap_indices(
        values.len(),
        |idx| {
            let sample: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
            statistic(&sample)
        },
        n_resamples,
        confidence,
        seed,
    )
}
