//! Rank correlation, permutation and rank tests, effect sizes and bootstrap.
//!
//! Randomized procedures key every replicate's generator by
//! `seed ^ replicate`, so results do not depend on scheduling.

mod bootstrap;
mod correlation;
mod mantel;
pub mod special;

pub use bootstrap::{bootstrap_ci, bootstrap_indices, percentile, BootstrapCI};
pub use correlation::{ols_r2, pearson, ranks, spearman, OlsFit};
pub use mantel::{mantel, mantel_exhaustive, CorrelationMethod};
pub use rank_tests::{
    cohens_d, mann_whitney_u, mann_whitney_u_exact, mann_whitney_u_normal, paired_t, paired_t_with,
    EXACT_LIMIT,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("constant input")]
    ConstantInput,
    #[error("non-finite input")]
    NonFinite,
    #[error("label mismatch between distance matrices")]
    LabelMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty group")]
    EmptyGroup,
    #[error("zero pooled variance")]
    ZeroPooledVariance,
    #[error("zero difference variance")]
    ZeroDifferenceVariance,
    #[error("statistic undefined on {}", match .replicate { Some(r) => format!("resample {r}"), None => "the original sample".to_string() })]
    StatisticUndefined { replicate: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    Greater,
    Less,
}

impl std::fmt::Display for Alternative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::TwoSided => "two_sided",
            Self::Greater => "greater",
            Self::Less => "less",
        })
    }
}

impl std::str::FromStr for Alternative {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two_sided" | "two-sided" => Ok(Self::TwoSided),
            "greater" => Ok(Self::Greater),
            "less" => Ok(Self::Less),
            other => Err(StatsError::InvalidParameter(format!(
                "unknown alternative {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub effect_size: Option<f64>,
    /// Sample sizes: one entry per group, or the number of items.
    pub n: Vec<usize>,
    pub method: String,
    pub alternative: Alternative,
    pub seed: Option<u64>,
    pub n_resamples: Option<usize>,
}

/// Generator for replicate `r` of a randomized procedure.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ replicate)
}

pub(crate) fn check_finite(x: &[f64]) -> Result<(), StatsError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}
