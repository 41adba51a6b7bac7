//! Concept-pair similarity against cross-family colexification counts.

use super::report::{ExperimentReport, FigureSeries, StoreInfo};
use super::{base_config, ExperimentError, Excluded};
use crate::geometry::{correct_layer, cosine_similarity, CorrectionConfig, LayerSlice};
use crate::stats::{cohens_d, mann_whitney_u, spearman, Alternative, TestResult};
use crate::store::{ColexEdgeList, EmbeddingStore};
use serde::{Deserialize, Serialize};
use serde_json::json;

/// How a concept pair's similarity is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColexSimilarity {
    /// Cosine of the two concepts' language-mean vectors.
    #[default]
    Centroid,
    /// Mean over shared languages of the per-language cosine.
    PerLanguage,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpearmanSummary {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColexResults {
    pub n_pairs: usize,
    pub n_colexified: usize,
    pub n_other: usize,
    pub spearman: Option<SpearmanSummary>,
    pub mann_whitney: Option<TestResult>,
    pub cohens_d: Option<f64>,
    pub mean_similarity_colexified: Option<f64>,
    pub mean_similarity_other: Option<f64>,
    pub diagnostics: Vec<String>,
    pub excluded: Vec<Excluded>,
}

fn pair_similarity(
    slice: &LayerSlice,
    a: usize,
    b: usize,
    mode: ColexSimilarity,
) -> Result<f64, String> {
    match mode {
        ColexSimilarity::Centroid => {
            let ca = slice.concept_centroid(a).ok_or("first concept has no valid cells")?;
            let cb = slice.concept_centroid(b).ok_or("second concept has no valid cells")?;
            cosine_similarity(&ca, &cb).map_err(|e| format!("centroid similarity: {e}"))
        }
        ColexSimilarity::PerLanguage => {
            let sims = (0..slice.n_languages())
                .filter(|&l| slice.is_valid(a, l) && slice.is_valid(b, l))
                .map(|l| cosine_similarity(slice.vector(a, l), slice.vector(b, l)))
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| format!("per-language similarity: {e}"))?;
            crate::numeric::mean(sims).ok_or_else(|| "no shared valid language".to_string())
        }
    }
}

/// Continuous and thresholded tests of colexification against similarity.
///
/// Statistical failures (constant counts, an empty group) are reported as
/// diagnostics; a missing concept is an error.
#[allow(clippy::too_many_arguments)]
pub fn exp_colexification(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
    edges: &ColexEdgeList,
    pair_universe: &[(String, String)],
    binary_threshold: u32,
    mode: ColexSimilarity,
) -> Result<ExperimentReport<ColexResults>, ExperimentError> {
    if pair_universe.is_empty() {
        return Err(ExperimentError::Insufficient("pair universe is empty".into()));
    }
    let alternative = Alternative::Greater;
    let mut config = base_config(store, layer, correction)?;
    config.insert("binary_threshold".into(), json!(binary_threshold));
    config.insert("similarity".into(), json!(mode));
    config.insert("alternative".into(), json!(alternative));
    config.insert("n_universe_pairs".into(), json!(pair_universe.len()));

    let mut idx = Vec::with_capacity(pair_universe.len());
    for (a, b) in pair_universe {
        let ia = store
            .concept_index(a)
            .ok_or_else(|| ExperimentError::MissingConcept(a.clone()))?;
        let ib = store
            .concept_index(b)
            .ok_or_else(|| ExperimentError::MissingConcept(b.clone()))?;
        idx.push((ia, ib));
    }
    let slice = correct_layer(store, layer, correction)?;

    let mut excluded = Vec::new();
    let mut counts = Vec::new();
    let mut sims = Vec::new();
    let mut scatter = FigureSeries::new(&["concept_a", "concept_b", "family_count", "similarity", "colexified"]);
    for ((a, b), &(ia, ib)) in pair_universe.iter().zip(&idx) {
        match pair_similarity(&slice, ia, ib, mode) {
            Ok(s) => {
                let count = edges.family_count(a, b);
                counts.push(count as f64);
                sims.push(s);
                scatter.push(vec![
                    a.as_str().into(),
                    b.as_str().into(),
                    count.into(),
                    s.into(),
                    usize::from(count >= binary_threshold).into(),
                ]);
            }
            Err(reason) => excluded.push(Excluded {
                item: format!("{a}/{b}"),
                reason,
            }),
        }
    }

    let mut diagnostics = Vec::new();
    let spearman = match spearman(&counts, &sims) {
        Ok((rho, p_value)) => Some(SpearmanSummary {
            rho,
            p_value,
            n: counts.len(),
        }),
        Err(e) => {
            diagnostics.push(format!("spearman: {e}"));
            None
        }
    };
    let (colex, other): (Vec<f64>, Vec<f64>) = {
        let mut c = Vec::new();
        let mut o = Vec::new();
        for (&n, &s) in counts.iter().zip(&sims) {
            if n >= binary_threshold as f64 {
                c.push(s);
            } else {
                o.push(s);
            }
        }
        (c, o)
    };
    let mann_whitney = match mann_whitney_u(&colex, &other, alternative) {
        Ok(t) => Some(t),
        Err(e) => {
            diagnostics.push(format!("mann-whitney: {e}"));
            None
        }
    };
    let d = match cohens_d(&colex, &other) {
        Ok(d) => Some(d),
        Err(e) => {
            diagnostics.push(format!("cohen's d: {e}"));
            None
        }
    };
    let results = ColexResults {
        n_pairs: sims.len(),
        n_colexified: colex.len(),
        n_other: other.len(),
        spearman,
        mann_whitney,
        cohens_d: d,
        mean_similarity_colexified: crate::numeric::mean(colex.iter().copied()),
        mean_similarity_other: crate::numeric::mean(other.iter().copied()),
        diagnostics,
        excluded,
    };
    Ok(ExperimentReport::new(
        "colexification",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("pairs", scatter))
}
