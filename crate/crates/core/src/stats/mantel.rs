//! Mantel test between two distance matrices over the same labels.
//!
//! Both matrices are reduced to centred upper-triangle scores (ranks for
//! Spearman) once. Relabelling `d2` only permutes those scores, so each
//! permutation costs one dot product.

use super::correlation::ranks;
use super::{replicate_rng, Alternative, StatsError, TestResult};
use crate::numeric::compensated_sum;
use crate::store::DistanceMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Permutation statistics within this of the observed one count as ties.
const TIE_TOLERANCE: f64 = 1e-10;

/// Largest matrix accepted by [`mantel_exhaustive`].
const EXHAUSTIVE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Spearman,
    Pearson,
}

impl std::str::FromStr for CorrelationMethod {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spearman" => Ok(Self::Spearman),
            "pearson" => Ok(Self::Pearson),
            other => Err(StatsError::InvalidParameter(format!(
                "unknown correlation method {other:?}"
            ))),
        }
    }
}

struct Prepared {
    n: usize,
    /// Centred, scaled upper triangle of d1, row-major `i < j`.
    x: Vec<f64>,
    /// Centred, scaled full matrix of d2 scores (diagonal unused).
    y: Vec<f64>,
}

impl Prepared {
    fn new(d1: &DistanceMatrix, d2: &DistanceMatrix, method: CorrelationMethod) -> Result<Self, StatsError> {
        if d1.labels() != d2.labels() {
            return Err(StatsError::LabelMismatch);
        }
        let n = d1.len();
        if n < 4 {
            return Err(StatsError::TooFew { needed: 4, got: n });
        }
        let score = |v: Vec<f64>| match method {
            CorrelationMethod::Spearman => ranks(&v),
            CorrelationMethod::Pearson => v,
        };
        let x = standardize(score(d1.upper_triangle()))?;
        let y_tri = standardize(score(d2.upper_triangle()))?;
        let mut y = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                y[i * n + j] = y_tri[k];
                y[j * n + i] = y_tri[k];
                k += 1;
            }
        }
        Ok(Self { n, x, y })
    }

    /// Correlation after relabelling d2 by `perm`.
    fn statistic(&self, perm: &[usize]) -> f64 {
        let n = self.n;
        let mut k = 0;
        let terms = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| {
            let v = self.x[k] * self.y[perm[i] * n + perm[j]];
            k += 1;
            v
        });
        compensated_sum(terms).clamp(-1.0, 1.0)
    }
}

/// Centres and scales to unit length so the correlation is a dot product.
fn standardize(v: Vec<f64>) -> Result<Vec<f64>, StatsError> {
    let m = compensated_sum(v.iter().copied()) / v.len() as f64;
    let c: Vec<f64> = v.iter().map(|x| x - m).collect();
    let ss = compensated_sum(c.iter().map(|x| x * x)).sqrt();
    if ss == 0.0 || !ss.is_finite() {
        return Err(StatsError::ConstantInput);
    }
    Ok(c.into_iter().map(|x| x / ss).collect())
}

fn method_tag(method: CorrelationMethod, exhaustive: bool) -> String {
    let m = match method {
        CorrelationMethod::Spearman => "spearman",
        CorrelationMethod::Pearson => "pearson",
    };
    if exhaustive {
        format!("mantel_{m}_exhaustive")
    } else {
        format!("mantel_{m}")
    }
}

/// One-sided (greater) Mantel permutation test.
///
/// `p = (1 + #{perm ≥ observed}) / (n_perm + 1)`; permutation `r` shuffles
/// labels with the generator seeded by `seed ^ r`.
pub fn mantel(
    d1: &DistanceMatrix,
    d2: &DistanceMatrix,
    n_perm: usize,
    seed: u64,
    method: CorrelationMethod,
) -> Result<TestResult, StatsError> {
    if n_perm < 1 {
        return Err(StatsError::InvalidParameter("n_perm must be at least 1".into()));
    }
    let prep = Prepared::new(d1, d2, method)?;
    let n = prep.n;
    let identity: Vec<usize> = (0..n).collect();
    let observed = prep.statistic(&identity);
    let perm_stats: Vec<f64> = (0..n_perm)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r as u64);
            let mut perm = identity.clone();
            perm.shuffle(&mut rng);
            prep.statistic(&perm)
        })
        .collect();
    let hits = perm_stats
        .iter()
        .filter(|&&s| s >= observed - TIE_TOLERANCE)
        .count();
    Ok(TestResult {
        statistic: observed,
        p_value: (1 + hits) as f64 / (n_perm + 1) as f64,
        effect_size: None,
        n: vec![n],
        method: method_tag(method, false),
        alternative: Alternative::Greater,
        seed: Some(seed),
        n_resamples: Some(n_perm),
    })
}

/// Exact Mantel test over all `n!` relabellings (`n ≤ 8`); `p` is the
/// fraction of relabellings, identity included, at least as extreme.
pub fn mantel_exhaustive(
    d1: &DistanceMatrix,
    d2: &DistanceMatrix,
    method: CorrelationMethod,
) -> Result<TestResult, StatsError> {
    let prep = Prepared::new(d1, d2, method)?;
    let n = prep.n;
    if n > EXHAUSTIVE_LIMIT {
        return Err(StatsError::InvalidParameter(format!(
            "exhaustive Mantel supports n ≤ {EXHAUSTIVE_LIMIT}, got {n}"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let observed = prep.statistic(&perm);
    let (mut hits, mut total) = (0usize, 0usize);
    // Heap's algorithm, iterative form
    let mut c = vec![0usize; n];
    let mut visit = |p: &[usize]| {
        total += 1;
        if prep.statistic(p) >= observed - TIE_TOLERANCE {
            hits += 1;
        }
    };
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(TestResult {
        statistic: observed,
        p_value: hits as f64 / total as f64,
        effect_size: None,
        n: vec![n],
        method: method_tag(method, true),
        alternative: Alternative::Greater,
        seed: None,
        n_resamples: Some(total),
    })
}
