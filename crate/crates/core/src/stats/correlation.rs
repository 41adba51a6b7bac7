use super::special::t_two_sided;
use super::{check_finite, StatsError};
use crate::numeric::compensated_sum;
use serde::{Deserialize, Serialize};

/// 1-based ranks with ties sharing their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            out[k] = avg;
        }
        i = j;
    }
    out
}

fn centered(x: &[f64]) -> Vec<f64> {
    let m = compensated_sum(x.iter().copied()) / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFew {
            needed: 2,
            got: x.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let (xc, yc) = (centered(x), centered(y));
    let sxx = compensated_sum(xc.iter().map(|v| v * v));
    let syy = compensated_sum(yc.iter().map(|v| v * v));
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let sxy = compensated_sum(xc.iter().zip(&yc).map(|(a, b)| a * b));
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p for a correlation coefficient via the t approximation.
pub(crate) fn correlation_p(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    t_two_sided(t, df)
}

/// Spearman's rho and its two-sided p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFew {
            needed: 3,
            got: x.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let rho = pearson(&ranks(x), &ranks(y))?;
    Ok((rho, correlation_p(rho, x.len())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Simple least squares of `y` on `x`. A constant `y` is fit exactly by a
/// flat line and reported with `r2 = 0`.
pub fn ols_r2(x: &[f64], y: &[f64]) -> Result<OlsFit, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFew {
            needed: 3,
            got: x.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let n = x.len() as f64;
    let mx = compensated_sum(x.iter().copied()) / n;
    let my = compensated_sum(y.iter().copied()) / n;
    let sxx = compensated_sum(x.iter().map(|v| (v - mx) * (v - mx)));
    if sxx == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let slope = sxy / sxx;
    let r2 = match pearson(x, y) {
        Ok(r) => (r * r).clamp(0.0, 1.0),
        Err(StatsError::ConstantInput) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(OlsFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}
