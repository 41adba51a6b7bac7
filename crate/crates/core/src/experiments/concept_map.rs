//! Two-dimensional map of concept centroids.

use super::colors::convex_hull;
use super::report::{ExperimentReport, FigureSeries, StoreInfo};
use super::{base_config, ExperimentError, Excluded};
use crate::geometry::{correct_layer, pca_project, CorrectionConfig};
use crate::store::EmbeddingStore;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappedConcept {
    pub gloss: String,
    pub category: String,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptMapResults {
    pub n_components: usize,
    /// Set when only one component is available.
    pub fallback: bool,
    pub explained_variance_ratio: Vec<f64>,
    pub concepts: Vec<MappedConcept>,
    pub excluded: Vec<Excluded>,
}

/// PCA of cross-lingual concept centroids, with per-family centroids
/// projected into the same plane and category hulls.
pub fn exp_concept_map(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
) -> Result<ExperimentReport<ConceptMapResults>, ExperimentError> {
    let mut config = base_config(store, layer, correction)?;
    let slice = correct_layer(store, layer, correction)?;
    let mut kept = Vec::new();
    let mut centroids = Vec::new();
    let mut excluded = Vec::new();
    for c in 0..store.n_concepts() {
        match slice.concept_centroid(c) {
            Some(v) => {
                kept.push(c);
                centroids.push(v);
            }
            None => excluded.push(Excluded {
                item: store.concepts()[c].gloss.clone(),
                reason: "no valid cells".into(),
            }),
        }
    }
    if kept.len() < 2 {
        return Err(ExperimentError::Insufficient(format!(
            "{} concepts with valid cells, need at least 2",
            kept.len()
        )));
    }
    let n_components = if kept.len() - 1 >= 2 && store.dim() >= 2 { 2 } else { 1 };
    config.insert("n_components".into(), json!(n_components));
    let pca = pca_project(&centroids, n_components)?;
    let coord = |p: &[f64], j: usize| p.get(j).copied().unwrap_or(0.0);

    let mut points = FigureSeries::new(&["gloss", "category", "pc1", "pc2"]);
    let mut by_category: BTreeMap<&str, Vec<[f64; 2]>> = BTreeMap::new();
    let mut concepts = Vec::new();
    for (&c, p) in kept.iter().zip(&pca.projected) {
        let meta = &store.concepts()[c];
        points.push(vec![
            meta.gloss.as_str().into(),
            meta.category.as_str().into(),
            coord(p, 0).into(),
            coord(p, 1).into(),
        ]);
        by_category
            .entry(meta.category.as_str())
            .or_default()
            .push([coord(p, 0), coord(p, 1)]);
        concepts.push(MappedConcept {
            gloss: meta.gloss.clone(),
            category: meta.category.clone(),
            coords: p.clone(),
        });
    }
    let mut hulls = FigureSeries::new(&["category", "vertex", "pc1", "pc2"]);
    for (cat, pts) in &by_category {
        for (v, p) in convex_hull(pts).iter().enumerate() {
            hulls.push(vec![(*cat).into(), v.into(), p[0].into(), p[1].into()]);
        }
    }
    let mut families: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (l, lang) in store.languages().iter().enumerate() {
        families.entry(lang.family.as_str()).or_default().push(l);
    }
    let mut family_points = FigureSeries::new(&["family", "gloss", "pc1", "pc2"]);
    for (fam, langs) in &families {
        for &c in &kept {
            if let Some(v) = slice.centroid_over(c, langs.iter().copied()) {
                let p = pca.transform(&v);
                family_points.push(vec![
                    (*fam).into(),
                    store.concepts()[c].gloss.as_str().into(),
                    coord(&p, 0).into(),
                    coord(&p, 1).into(),
                ]);
            }
        }
    }
    let results = ConceptMapResults {
        n_components,
        fallback: n_components == 1,
        explained_variance_ratio: pca.explained_variance_ratio.clone(),
        concepts,
        excluded,
    };
    Ok(ExperimentReport::new(
        "concept_map",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("concepts", points)
    .figure("category_hulls", hulls)
    .figure("family_points", family_points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Condition, ConceptMeta, LanguageMeta};

    fn store(centroids: &[[f32; 3]]) -> EmbeddingStore {
        let nl = 2;
        let tensor: Vec<f32> = centroids
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.to_vec(), nl).flatten())
            .collect();
        EmbeddingStore::new(
            (0..centroids.len()).map(|i| ConceptMeta::new(format!("c{i}"), "x")).collect(),
            vec![LanguageMeta::new("aaa_Latn", "f"), LanguageMeta::new("bbb_Latn", "g")],
            vec![0],
            Condition::Contextual,
            3,
            tensor,
            vec![true; centroids.len() * nl],
        )
        .unwrap()
    }

    #[test]
    fn triangle_is_isometric() {
        let h = 1.5f32.sqrt();
        let s = store(&[[1.0, 0.0, 2.0], [0.0, 1.0, 2.0], [0.5, 0.5, 2.0 + h]]);
        let rep = exp_concept_map(&s, 0, &CorrectionConfig::RAW).unwrap();
        let pts: Vec<&Vec<f64>> = rep.results.concepts.iter().map(|c| &c.coords).collect();
        let orig: Vec<Vec<f64>> = (0..3)
            .map(|c| s.vector(0, c, 0).iter().map(|&x| x as f64).collect())
            .collect();
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        for i in 0..3 {
            for j in 0..3 {
                assert!((dist(pts[i], pts[j]) - dist(&orig[i], &orig[j])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_concepts_fall_back() {
        let s = store(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let rep = exp_concept_map(&s, 0, &CorrectionConfig::RAW).unwrap();
        assert!(rep.results.fallback);
        assert_eq!(rep.results.n_components, 1);
    }
}
