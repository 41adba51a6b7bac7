//! Orthographic and phonetic surface similarity as predictors of convergence.

use super::report::{ExperimentReport, FigureSeries, StoreInfo};
use super::{base_config, scored_slice, ExperimentError, Excluded};
use crate::geometry::CorrectionConfig;
use crate::stats::{ols_r2, OlsFit, StatsError};
use crate::store::{EmbeddingStore, WordFormTable};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// `1 − d / max(|a|, |b|)` with `d` the code-point edit distance.
pub fn levenshtein_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    1.0 - prev[b.len()] as f64 / longest as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSimilarityConfig {
    /// Script subtags whose forms are compared.
    pub scripts: BTreeSet<String>,
    /// Single-character substitutions, closed under composition.
    pub phonetic_map: BTreeMap<char, char>,
    pub strip_diacritics: bool,
}

impl Default for SurfaceSimilarityConfig {
    fn default() -> Self {
        let raw = [
            ('b', 'p'),
            ('d', 't'),
            ('g', 'k'),
            ('v', 'f'),
            ('z', 's'),
            ('w', 'v'),
            ('ʒ', 'š'),
            ('ž', 'š'),
            ('š', 's'),
            ('đ', 't'),
        ];
        Self {
            scripts: ["Latn".to_string()].into(),
            phonetic_map: close_map(raw.into_iter().collect()).expect("default map is acyclic"),
            strip_diacritics: true,
        }
    }
}

impl SurfaceSimilarityConfig {
    /// Copy with the phonetic map closed to a fixed point.
    pub fn closed(&self) -> Result<Self, ExperimentError> {
        Ok(Self {
            phonetic_map: close_map(self.phonetic_map.clone())?,
            ..self.clone()
        })
    }
}

/// Follows every chain `x → y → …` to its end, so one pass of substitution
/// is idempotent. Cycles are rejected.
fn close_map(map: BTreeMap<char, char>) -> Result<BTreeMap<char, char>, ExperimentError> {
    let mut out = BTreeMap::new();
    for (&from, &to) in &map {
        let mut seen = BTreeSet::from([from]);
        let mut end = to;
        while let Some(&next) = map.get(&end) {
            if !seen.insert(end) {
                return Err(ExperimentError::Config(format!(
                    "phonetic map has a cycle through {from:?}"
                )));
            }
            end = next;
        }
        if end == from {
            return Err(ExperimentError::Config(format!(
                "phonetic map has a cycle through {from:?}"
            )));
        }
        out.insert(from, end);
    }
    Ok(out)
}

/// Lowercase, decompose, optionally drop combining marks, then substitute.
pub fn phonetic_normalize(s: &str, config: &SurfaceSimilarityConfig) -> String {
    let decomposed: String = s.to_lowercase().nfd().collect();
    let stripped: String = if config.strip_diacritics {
        decomposed.chars().filter(|c| !is_combining_mark(*c)).collect()
    } else {
        decomposed
    };
    let mapped: String = stripped
        .chars()
        .map(|c| config.phonetic_map.get(&c).copied().unwrap_or(c))
        .collect();
    mapped.nfc().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub gloss: String,
    pub convergence: f64,
    pub orthographic: f64,
    pub phonetic: f64,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceResults {
    pub orthographic: OlsFit,
    pub phonetic: OlsFit,
    pub n_concepts: usize,
    pub points: Vec<SurfacePoint>,
    pub excluded: Vec<Excluded>,
}

fn fit(x: &[f64], y: &[f64], name: &str) -> Result<OlsFit, ExperimentError> {
    ols_r2(x, y).map_err(|e| match e {
        StatsError::ConstantInput => ExperimentError::Insufficient(format!(
            "constant predictor: {name} similarity is the same for every concept"
        )),
        e => ExperimentError::stats(format!("{name} regression"))(e),
    })
}

/// Regresses convergence on mean pairwise orthographic and phonetic
/// similarity of word forms across comparable-script languages.
pub fn exp_surface_regression(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
    forms: &WordFormTable,
    surface: &SurfaceSimilarityConfig,
) -> Result<ExperimentReport<SurfaceResults>, ExperimentError> {
    let surface = surface.closed()?;
    let mut config = base_config(store, layer, correction)?;
    config.insert("surface".into(), json!(surface));
    let comparable: Vec<usize> = (0..store.n_languages())
        .filter(|&l| surface.scripts.contains(&store.languages()[l].script))
        .collect();
    if comparable.len() < 2 {
        return Err(ExperimentError::Insufficient(
            "no comparable-script language pairs".into(),
        ));
    }
    let (_, scores, mut excluded) = scored_slice(store, layer, correction)?;
    let mut points = Vec::new();
    for (c, concept) in store.concepts().iter().enumerate() {
        let Some(conv) = scores[c] else { continue };
        let present: Vec<&str> = comparable
            .iter()
            .filter_map(|&l| forms.get(&concept.gloss, &store.languages()[l].code))
            .collect();
        if present.len() < 2 {
            excluded.push(Excluded {
                item: concept.gloss.clone(),
                reason: "word forms in fewer than 2 comparable languages".into(),
            });
            continue;
        }
        let orth_forms: Vec<String> = present.iter().map(|f| f.to_lowercase().nfc().collect()).collect();
        let phon_forms: Vec<String> = present.iter().map(|f| phonetic_normalize(f, &surface)).collect();
        let (mut orth, mut phon) = (Vec::new(), Vec::new());
        for i in 0..present.len() {
            for j in (i + 1)..present.len() {
                orth.push(levenshtein_similarity(&orth_forms[i], &orth_forms[j]));
                phon.push(levenshtein_similarity(&phon_forms[i], &phon_forms[j]));
            }
        }
        points.push(SurfacePoint {
            gloss: concept.gloss.clone(),
            convergence: conv,
            orthographic: super::mean_sd(&orth).0,
            phonetic: super::mean_sd(&phon).0,
            n_pairs: orth.len(),
        });
    }
    if points.is_empty() {
        return Err(ExperimentError::Insufficient(
            "no comparable-script pairs with word forms".into(),
        ));
    }
    if points.len() < 3 {
        return Err(ExperimentError::Insufficient(format!(
            "{} concepts with word forms, need at least 3",
            points.len()
        )));
    }
    let y: Vec<f64> = points.iter().map(|p| p.convergence).collect();
    let xo: Vec<f64> = points.iter().map(|p| p.orthographic).collect();
    let xp: Vec<f64> = points.iter().map(|p| p.phonetic).collect();
    let orthographic = fit(&xo, &y, "orthographic")?;
    let phonetic = fit(&xp, &y, "phonetic")?;
    let mut scatter = FigureSeries::new(&["gloss", "convergence", "orthographic", "phonetic"]);
    for p in &points {
        scatter.push(vec![
            p.gloss.as_str().into(),
            p.convergence.into(),
            p.orthographic.into(),
            p.phonetic.into(),
        ]);
    }
    let results = SurfaceResults {
        orthographic,
        phonetic,
        n_concepts: points.len(),
        points,
        excluded,
    };
    Ok(ExperimentReport::new(
        "surface_regression",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("scatter", scatter))
}
