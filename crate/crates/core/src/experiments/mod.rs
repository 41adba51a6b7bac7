//! Experiment drivers. Each returns an [`ExperimentReport`] holding a
//! config echo, typed results, tabular figure data and provenance.

mod colex;
mod colors;
mod concept_map;
mod convergence;
mod offsets;
mod phylo;
mod report;
mod store_ratio;
mod surface;

pub use colex::{exp_colexification, ColexResults, ColexSimilarity};
pub use colors::{convex_hull, exp_color_circle, ColorResults};
pub use concept_map::{exp_concept_map, ConceptMapResults};
pub use convergence::{
    exp_carrier_robustness, exp_category_summary, exp_convergence_ranking, exp_group_comparison,
    exp_isotropy_validation, exp_layerwise, CarrierResults, CategoryResults, ConceptScore,
    ConvergenceResults, GroupComparisonResults, IsotropyResults, LayerwiseResults,
};
pub use offsets::{default_offset_pairs, exp_offset_invariance, OffsetPairSpec, OffsetResults};
pub use phylo::{exp_phylogenetic, PhyloResults, Tier};
pub use report::{
    Cell, ExperimentReport, FigureSeries, Provenance, Real, StoreInfo, to_canonical_json,
};
pub use store_ratio::{exp_conceptual_store, store_ratio, RatioParts, StoreRatioResults};
pub use surface::{
    exp_surface_regression, levenshtein_similarity, phonetic_normalize, SurfaceResults,
    SurfaceSimilarityConfig,
};

use crate::geometry::{concept_convergence, correct_layer, CorrectionConfig, GeometryError, LayerSlice};
use crate::stats::StatsError;
use crate::store::{EmbeddingStore, StoreError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{context}: {source}")]
    Stats {
        context: String,
        #[source]
        source: StatsError,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("missing concept {0:?}")]
    MissingConcept(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl ExperimentError {
    pub(crate) fn stats(context: impl Into<String>) -> impl FnOnce(StatsError) -> Self {
        let context = context.into();
        move |source| Self::Stats { context, source }
    }
}

/// A concept or pair left out of an experiment, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Excluded {
    pub item: String,
    pub reason: String,
}

/// Layer position plus correction, echoed into every report.
pub(crate) fn base_config(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
) -> Result<serde_json::Map<String, serde_json::Value>, ExperimentError> {
    let value = store
        .layers()
        .get(layer)
        .ok_or(GeometryError::LayerOutOfRange(layer))?;
    let mut m = serde_json::Map::new();
    m.insert("layer".into(), (*value).into());
    m.insert("correction".into(), serde_json::to_value(correction).expect("plain struct"));
    Ok(m)
}

/// Corrected slice with per-concept convergence; failing concepts are
/// listed instead of aborting.
pub(crate) fn scored_slice(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
) -> Result<(LayerSlice, Vec<Option<f64>>, Vec<Excluded>), ExperimentError> {
    let slice = correct_layer(store, layer, correction)?;
    let (scores, excluded) = convergence_of(&slice, store);
    Ok((slice, scores, excluded))
}

pub(crate) fn convergence_of(
    slice: &LayerSlice,
    store: &EmbeddingStore,
) -> (Vec<Option<f64>>, Vec<Excluded>) {
    use rayon::prelude::*;
    let results: Vec<Result<f64, GeometryError>> = (0..slice.n_concepts())
        .into_par_iter()
        .map(|c| concept_convergence(slice, c))
        .collect();
    let mut excluded = Vec::new();
    let scores = results
        .into_iter()
        .enumerate()
        .map(|(c, r)| match r {
            Ok(v) => Some(v),
            Err(e) => {
                excluded.push(Excluded {
                    item: store.concepts()[c].gloss.clone(),
                    reason: crate::geometry::distance::name_language(e, store).to_string(),
                });
                None
            }
        })
        .collect();
    (scores, excluded)
}

/// Indices of scored concepts, highest score first, ties by position.
pub(crate) fn rank_order(scores: &[Option<f64>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].is_some()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .unwrap()
            .total_cmp(&scores[a].unwrap())
            .then(a.cmp(&b))
    });
    idx
}

pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    (
        crate::numeric::mean(values.iter().copied()).unwrap_or(f64::NAN),
        crate::numeric::sample_sd(values),
    )
}
