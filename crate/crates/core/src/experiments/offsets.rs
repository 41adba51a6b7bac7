//! Cross-language consistency of concept-pair offset vectors.

use super::report::{ExperimentReport, FigureSeries, StoreInfo};
use super::{base_config, ExperimentError, Excluded};
use crate::geometry::{correct_layer, cosine_similarity, CorrectionConfig};
use crate::numeric::norm;
use crate::store::EmbeddingStore;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;

const DEFAULT_PAIRS: &str = include_str!("../../data/offset_pairs.csv");

/// Centroid offsets shorter than this fraction of the mean per-language
/// offset length count as degenerate.
const DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetPairSpec {
    pub concept_a: String,
    pub concept_b: String,
}

impl OffsetPairSpec {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        Self {
            concept_a: a.into(),
            concept_b: b.into(),
        }
    }
}

/// The shipped list of 22 antonym and associate pairs.
pub fn default_offset_pairs() -> Vec<OffsetPairSpec> {
    csv::Reader::from_reader(DEFAULT_PAIRS.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .expect("bundled pair list parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairConsistency {
    pub concept_a: String,
    pub concept_b: String,
    pub consistency: f64,
    pub n_languages: usize,
    /// Family to (consistency, languages).
    pub by_family: BTreeMap<String, (f64, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffsetResults {
    pub pairs: Vec<PairConsistency>,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub best_pair: Option<String>,
    pub diagnostics: Vec<String>,
    pub excluded: Vec<Excluded>,
}

/// Mean cosine between each language's offset `a − b` and the offset
/// averaged over languages.
pub fn exp_offset_invariance(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
    pairs: &[OffsetPairSpec],
) -> Result<ExperimentReport<OffsetResults>, ExperimentError> {
    let mut config = base_config(store, layer, correction)?;
    config.insert("pairs".into(), json!(pairs));
    let mut idx = Vec::with_capacity(pairs.len());
    for p in pairs {
        let a = store
            .concept_index(&p.concept_a)
            .ok_or_else(|| ExperimentError::MissingConcept(p.concept_a.clone()))?;
        let b = store
            .concept_index(&p.concept_b)
            .ok_or_else(|| ExperimentError::MissingConcept(p.concept_b.clone()))?;
        if a == b {
            return Err(ExperimentError::Config(format!(
                "pair {}/{} names one concept twice",
                p.concept_a, p.concept_b
            )));
        }
        let shared = (0..store.n_languages())
            .filter(|&l| store.is_valid(a, l) && store.is_valid(b, l))
            .count();
        if shared < 2 {
            return Err(ExperimentError::Insufficient(format!(
                "pair {}/{} is valid in {shared} shared languages, need at least 2",
                p.concept_a, p.concept_b
            )));
        }
        idx.push((a, b));
    }
    let slice = correct_layer(store, layer, correction)?;

    let mut results = Vec::new();
    let mut diagnostics = Vec::new();
    let mut excluded = Vec::new();
    let mut per_lang = FigureSeries::new(&["pair", "language", "family", "cosine"]);
    for (p, &(a, b)) in pairs.iter().zip(&idx) {
        let name = format!("{}-{}", p.concept_a, p.concept_b);
        let mut offsets = Vec::new();
        for l in 0..slice.n_languages() {
            if !(slice.is_valid(a, l) && slice.is_valid(b, l)) {
                continue;
            }
            let off: Vec<f64> = slice
                .vector(a, l)
                .iter()
                .zip(slice.vector(b, l))
                .map(|(x, y)| x - y)
                .collect();
            if norm(&off) == 0.0 {
                diagnostics.push(format!(
                    "{name}: zero offset in {}, language skipped",
                    store.languages()[l].code
                ));
                continue;
            }
            offsets.push((l, off));
        }
        if offsets.len() < 2 {
            excluded.push(Excluded {
                item: name,
                reason: "fewer than 2 languages with a nonzero offset".into(),
            });
            continue;
        }
        let n = offsets.len() as f64;
        let mut centroid = vec![0.0; slice.dim()];
        for (_, o) in &offsets {
            centroid.iter_mut().zip(o).for_each(|(c, x)| *c += x / n);
        }
        let mean_len = offsets.iter().map(|(_, o)| norm(o)).sum::<f64>() / n;
        if norm(&centroid) <= DEGENERATE * mean_len {
            diagnostics.push(format!("{name}: degenerate centroid"));
            excluded.push(Excluded {
                item: name,
                reason: "degenerate centroid".into(),
            });
            continue;
        }
        let mut cosines = Vec::with_capacity(offsets.len());
        let mut fam: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (l, o) in &offsets {
            let c = cosine_similarity(o, &centroid)?;
            let lang = &store.languages()[*l];
            fam.entry(lang.family.clone()).or_default().push(c);
            per_lang.push(vec![
                name.as_str().into(),
                lang.code.as_str().into(),
                lang.family.as_str().into(),
                c.into(),
            ]);
            cosines.push(c);
        }
        results.push(PairConsistency {
            concept_a: p.concept_a.clone(),
            concept_b: p.concept_b.clone(),
            consistency: super::mean_sd(&cosines).0,
            n_languages: cosines.len(),
            by_family: fam
                .into_iter()
                .map(|(f, v)| (f, (super::mean_sd(&v).0, v.len())))
                .collect(),
        });
    }

    let values: Vec<f64> = results.iter().map(|r| r.consistency).collect();
    let best = results
        .iter()
        .fold(None::<&PairConsistency>, |best, r| match best {
            Some(b) if b.consistency >= r.consistency => Some(b),
            _ => Some(r),
        })
        .map(|r| format!("{}-{}", r.concept_a, r.concept_b));
    let mut summary = FigureSeries::new(&["concept_a", "concept_b", "consistency", "n_languages"]);
    let mut family_rows = FigureSeries::new(&["pair", "family", "consistency", "n_languages"]);
    for r in &results {
        summary.push(vec![
            r.concept_a.as_str().into(),
            r.concept_b.as_str().into(),
            r.consistency.into(),
            r.n_languages.into(),
        ]);
        for (f, (c, n)) in &r.by_family {
            family_rows.push(vec![
                format!("{}-{}", r.concept_a, r.concept_b).into(),
                f.as_str().into(),
                (*c).into(),
                (*n).into(),
            ]);
        }
    }
    let results = OffsetResults {
        mean: crate::numeric::mean(values.iter().copied()),
        min: values.iter().copied().reduce(f64::min),
        max: values.iter().copied().reduce(f64::max),
        best_pair: best,
        pairs: results,
        diagnostics,
        excluded,
    };
    Ok(ExperimentReport::new(
        "offset_invariance",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("pairs", summary)
    .figure("families", family_rows)
    .figure("languages", per_lang))
}
