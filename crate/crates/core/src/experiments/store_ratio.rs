//! Between-concept over within-concept cosine distance.
//!
//! With unit vectors `u` and per-concept sums `S_c` over `n_c` valid
//! languages, the mean distance between concepts `c` and `d` over all
//! language pairs is `1 − S_c·S_d / (n_c n_d)`, and the within-concept mean
//! distance is `1 − convergence`.

use super::report::{ExperimentReport, FigureSeries, Real, StoreInfo};
use super::{base_config, ExperimentError, Excluded};
use crate::geometry::{center_languages, correct_layer, CorrectionConfig, GeometryError, LayerSlice};
use crate::numeric::{compensated_sum, dot, norm};
use crate::stats::{bootstrap_indices, BootstrapCI};
use crate::store::EmbeddingStore;
use serde::Serialize;
use serde_json::json;

/// Within-concept distances at or below this count as zero.
const ZERO_WITHIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioParts {
    pub within: f64,
    pub between: f64,
    /// `+inf` when `within` is zero.
    pub ratio: f64,
}

/// Per-concept unit sums and the derived distance tables.
struct Tables {
    /// Concepts with at least 2 valid languages.
    concepts: Vec<usize>,
    within: Vec<f64>,
    /// `between[i][j]` for positions in `concepts`.
    between: Vec<Vec<f64>>,
}

impl Tables {
    fn new(slice: &LayerSlice) -> Result<Self, GeometryError> {
        let mut concepts = Vec::new();
        let mut sums = Vec::new();
        let mut within = Vec::new();
        for c in 0..slice.n_concepts() {
            let langs: Vec<usize> = slice.valid_languages(c).collect();
            if langs.len() < 2 {
                continue;
            }
            let mut s = vec![0.0; slice.dim()];
            for &l in &langs {
                let v = slice.vector(c, l);
                let n = norm(v);
                if n == 0.0 || !n.is_finite() {
                    return Err(GeometryError::ZeroNorm);
                }
                s.iter_mut().zip(v).for_each(|(a, x)| *a += x / n);
            }
            let n = langs.len() as f64;
            let conv = ((dot(&s, &s) - n) / (n * (n - 1.0))).clamp(-1.0, 1.0);
            s.iter_mut().for_each(|a| *a /= n);
            concepts.push(c);
            sums.push(s);
            within.push(1.0 - conv);
        }
        let k = concepts.len();
        let mut between = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in (i + 1)..k {
                let d = (1.0 - dot(&sums[i], &sums[j])).clamp(0.0, 2.0);
                between[i][j] = d;
                between[j][i] = d;
            }
        }
        Ok(Self {
            concepts,
            within,
            between,
        })
    }

    /// Ratio over a multiset of concept positions; pairs of the same
    /// concept are skipped.
    fn parts(&self, idx: &[usize]) -> Option<RatioParts> {
        let within = compensated_sum(idx.iter().map(|&i| self.within[i])) / idx.len() as f64;
        let mut count = 0usize;
        let mut terms = Vec::with_capacity(idx.len() * idx.len() / 2);
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                if i != j {
                    terms.push(self.between[i][j]);
                    count += 1;
                }
            }
        }
        if count == 0 {
            return None;
        }
        let between = compensated_sum(terms) / count as f64;
        let ratio = if within <= ZERO_WITHIN {
            f64::INFINITY
        } else {
            between / within
        };
        Some(RatioParts {
            within,
            between,
            ratio,
        })
    }
}

/// Conceptual-store ratio of a slice over concepts valid in at least 2 languages.
pub fn store_ratio(slice: &LayerSlice) -> Result<RatioParts, GeometryError> {
    let t = Tables::new(slice)?;
    let all: Vec<usize> = (0..t.concepts.len()).collect();
    t.parts(&all).ok_or(GeometryError::TooFewRows {
        needed: 2,
        got: t.concepts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub within: f64,
    pub between: f64,
    pub ratio: Real,
    pub ci: Option<BootstrapCI>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoreRatioResults {
    /// Isotropy-corrected vectors.
    pub raw: RatioReport,
    /// Corrected, then per-language centered.
    pub centered: RatioReport,
    pub improvement: Real,
    pub ci_overlap: Option<bool>,
    pub n_concepts: usize,
    pub diagnostics: Vec<String>,
    pub excluded: Vec<Excluded>,
}

fn bootstrap(t: &Tables, n_boot: usize, seed: u64) -> Result<BootstrapCI, crate::stats::StatsError> {
    bootstrap_indices(
        t.concepts.len(),
        |idx| t.parts(idx).map(|p| p.ratio).filter(|r| r.is_finite()),
        n_boot,
        0.95,
        seed,
    )
}

/// Ratio before and after per-language centering, with percentile
/// bootstrap intervals over concepts. Both intervals use the same resamples.
pub fn exp_conceptual_store(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
    n_boot: usize,
    seed: u64,
) -> Result<ExperimentReport<StoreRatioResults>, ExperimentError> {
    if store.n_concepts() < 2 || store.n_languages() < 2 {
        return Err(ExperimentError::Insufficient(
            "need at least 2 concepts and 2 languages".into(),
        ));
    }
    let mut config = base_config(store, layer, correction)?;
    config.insert("n_boot".into(), json!(n_boot));
    config.insert("seed".into(), json!(seed));
    config.insert("confidence".into(), json!(0.95));

    let mut slice = correct_layer(store, layer, correction)?;
    let raw_t = Tables::new(&slice)?;
    center_languages(&mut slice).map_err(|e| crate::geometry::distance::name_language(e, store))?;
    let cen_t = Tables::new(&slice)?;
    let excluded: Vec<Excluded> = (0..store.n_concepts())
        .filter(|c| !raw_t.concepts.contains(c))
        .map(|c| Excluded {
            item: store.concepts()[c].gloss.clone(),
            reason: "valid in fewer than 2 languages".into(),
        })
        .collect();
    let all: Vec<usize> = (0..raw_t.concepts.len()).collect();
    let too_few = || ExperimentError::Insufficient("fewer than 2 concepts with 2 valid languages".into());
    let raw = raw_t.parts(&all).ok_or_else(too_few)?;
    let cen = cen_t.parts(&all).ok_or_else(too_few)?;

    let mut diagnostics = Vec::new();
    for (name, p) in [("raw", &raw), ("centered", &cen)] {
        if p.ratio.is_infinite() {
            diagnostics.push(format!(
                "{name}: within-concept distance is zero, ratio reported as +inf"
            ));
        }
    }
    let mut ci = |name: &str, t: &Tables, p: &RatioParts| {
        if p.ratio.is_infinite() {
            return None;
        }
        match bootstrap(t, n_boot, seed) {
            Ok(ci) => Some(ci),
            Err(e) => {
                diagnostics.push(format!("{name}: bootstrap failed ({e})"));
                None
            }
        }
    };
    let raw_ci = ci("raw", &raw_t, &raw);
    let cen_ci = ci("centered", &cen_t, &cen);
    let ci_overlap = match (&raw_ci, &cen_ci) {
        (Some(a), Some(b)) => Some(a.lower <= b.upper && b.lower <= a.upper),
        _ => None,
    };
    let improvement = cen.ratio / raw.ratio;

    let mut bars = FigureSeries::new(&["condition", "within", "between", "ratio", "ci_lower", "ci_upper"]);
    for (name, p, c) in [("raw", &raw, &raw_ci), ("centered", &cen, &cen_ci)] {
        let (lo, hi) = c.as_ref().map_or((f64::NAN, f64::NAN), |c| (c.lower, c.upper));
        bars.push(vec![name.into(), p.within.into(), p.between.into(), p.ratio.into(), lo.into(), hi.into()]);
    }
    let report = |p: RatioParts, ci| RatioReport {
        within: p.within,
        between: p.between,
        ratio: Real(p.ratio),
        ci,
    };
    let results = StoreRatioResults {
        raw: report(raw, raw_ci),
        centered: report(cen, cen_ci),
        improvement: Real(improvement),
        ci_overlap,
        n_concepts: raw_t.concepts.len(),
        diagnostics,
        excluded,
    };
    Ok(ExperimentReport::new(
        "conceptual_store",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("ratios", bars))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct double loop over concept and language pairs.
    fn brute(slice: &LayerSlice) -> (f64, f64) {
        let cos = |a: &[f64], b: &[f64]| dot(a, b) / (norm(a) * norm(b));
        let nc = slice.n_concepts();
        let mut within = Vec::new();
        for c in 0..nc {
            let ls: Vec<usize> = slice.valid_languages(c).collect();
            let mut d = Vec::new();
            for i in 0..ls.len() {
                for j in (i + 1)..ls.len() {
                    d.push(1.0 - cos(slice.vector(c, ls[i]), slice.vector(c, ls[j])));
                }
            }
            within.push(d.iter().sum::<f64>() / d.len() as f64);
        }
        let mut between = Vec::new();
        for c in 0..nc {
            for e in (c + 1)..nc {
                let mut d = Vec::new();
                for l in slice.valid_languages(c) {
                    for m in slice.valid_languages(e) {
                        d.push(1.0 - cos(slice.vector(c, l), slice.vector(e, m)));
                    }
                }
                between.push(d.iter().sum::<f64>() / d.len() as f64);
            }
        }
        (
            within.iter().sum::<f64>() / nc as f64,
            between.iter().sum::<f64>() / between.len() as f64,
        )
    }

    #[test]
    fn matches_double_loop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let cells: Vec<Vec<Option<Vec<f64>>>> = (0..5)
            .map(|c| {
                (0..4)
                    .map(|l| {
                        (c + l != 4 || c == 0)
                            .then(|| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
                    })
                    .collect()
            })
            .collect();
        let slice = LayerSlice::from_vectors(&cells).unwrap();
        let p = store_ratio(&slice).unwrap();
        let (w, b) = brute(&slice);
        assert!((p.within - w).abs() < 1e-12);
        assert!((p.between - b).abs() < 1e-12);
    }

    #[test]
    fn identical_within_is_infinite() {
        let cells: Vec<Vec<Option<Vec<f64>>>> = vec![
            vec![Some(vec![1.0, 0.0]); 3],
            vec![Some(vec![0.0, 1.0]); 3],
        ];
        let slice = LayerSlice::from_vectors(&cells).unwrap();
        let p = store_ratio(&slice).unwrap();
        assert_eq!(p.ratio, f64::INFINITY);
        assert!((p.between - 1.0).abs() < 1e-12);
    }
}
