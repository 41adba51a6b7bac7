//! Embedding distances against external genetic distances.

use super::report::{ExperimentReport, FigureSeries, StoreInfo};
use super::{base_config, ExperimentError};
use crate::geometry::{pairwise_language_distance, upgma_cluster, CorrectionConfig, Merge};
use crate::stats::{mantel, CorrelationMethod, TestResult};
use crate::store::{align_languages, DistanceMatrix, EmbeddingStore, LanguageMapping};
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    SameSubfamily,
    CrossBranch,
    /// Same family, at least one language without a subfamily entry.
    SameFamilyUnclassified,
    CrossFamily,
}

impl Tier {
    fn name(self) -> &'static str {
        match self {
            Tier::SameSubfamily => "same_subfamily",
            Tier::CrossBranch => "cross_branch",
            Tier::SameFamilyUnclassified => "same_family_unclassified",
            Tier::CrossFamily => "cross_family",
        }
    }

    fn classify(
        (fa, sa): (&str, Option<&String>),
        (fb, sb): (&str, Option<&String>),
    ) -> Tier {
        if fa != fb {
            return Tier::CrossFamily;
        }
        match (sa, sb) {
            (Some(a), Some(b)) if a == b => Tier::SameSubfamily,
            (Some(_), Some(_)) => Tier::CrossBranch,
            _ => Tier::SameFamilyUnclassified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TierSummary {
    pub tier: Tier,
    pub n_pairs: usize,
    pub mean_embedding_distance: f64,
    pub mean_reference_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DendrogramReport {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
    pub leaf_order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhyloResults {
    pub n_languages: usize,
    pub languages: Vec<String>,
    pub mantel: TestResult,
    pub dendrogram: DendrogramReport,
    pub tiers: Vec<TierSummary>,
    /// Store languages with no row in the reference matrix.
    pub unmatched: Vec<String>,
}

/// Mantel test of corrected embedding distances against a reference matrix,
/// plus a UPGMA tree and a tiered scatter of language pairs.
#[allow(clippy::too_many_arguments)]
pub fn exp_phylogenetic(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
    reference: &DistanceMatrix,
    mapping: &LanguageMapping,
    subfamilies: &BTreeMap<String, String>,
    n_perm: usize,
    seed: u64,
) -> Result<ExperimentReport<PhyloResults>, ExperimentError> {
    let method = CorrelationMethod::Spearman;
    let mut config = base_config(store, layer, correction)?;
    config.insert("n_perm".into(), json!(n_perm));
    config.insert("seed".into(), json!(seed));
    config.insert("method".into(), json!(method));
    config.insert("distance_source".into(), json!("corrected"));

    let (aligned, reference) = align_languages(store, reference, mapping)?;
    if aligned.n_languages() < 4 {
        return Err(ExperimentError::Insufficient(format!(
            "{} languages shared with the reference matrix, need at least 4",
            aligned.n_languages()
        )));
    }
    let unmatched = store
        .languages()
        .iter()
        .filter(|l| aligned.language_index(&l.code).is_none())
        .map(|l| l.code.clone())
        .collect();
    let embedding = pairwise_language_distance(&aligned, layer, correction)?;
    let test = mantel(&embedding, &reference, n_perm, seed, method)
        .map_err(ExperimentError::stats("mantel"))?;
    let tree = upgma_cluster(&embedding)?;
    let labels = embedding.labels().to_vec();

    let mut scatter = FigureSeries::new(&[
        "language_a",
        "language_b",
        "embedding_distance",
        "reference_distance",
        "tier",
    ]);
    let mut by_tier: BTreeMap<Tier, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let langs = aligned.languages();
    for i in 0..langs.len() {
        for j in (i + 1)..langs.len() {
            let tier = Tier::classify(
                (&langs[i].family, subfamilies.get(&langs[i].code)),
                (&langs[j].family, subfamilies.get(&langs[j].code)),
            );
            let (e, r) = (embedding.get(i, j), reference.get(i, j));
            let entry = by_tier.entry(tier).or_default();
            entry.0.push(e);
            entry.1.push(r);
            scatter.push(vec![
                langs[i].code.as_str().into(),
                langs[j].code.as_str().into(),
                e.into(),
                r.into(),
                tier.name().into(),
            ]);
        }
    }
    let tiers = by_tier
        .into_iter()
        .map(|(tier, (e, r))| TierSummary {
            tier,
            n_pairs: e.len(),
            mean_embedding_distance: super::mean_sd(&e).0,
            mean_reference_distance: super::mean_sd(&r).0,
        })
        .collect();

    let mut merges = FigureSeries::new(&["id", "left", "right", "height", "size"]);
    for (k, m) in tree.merges.iter().enumerate() {
        merges.push(vec![
            (labels.len() + k).into(),
            m.a.into(),
            m.b.into(),
            m.height.into(),
            m.size.into(),
        ]);
    }
    let results = PhyloResults {
        n_languages: labels.len(),
        dendrogram: DendrogramReport {
            leaf_order: tree.leaf_order().into_iter().map(|i| labels[i].clone()).collect(),
            merges: tree.merges.clone(),
            labels: labels.clone(),
        },
        languages: labels,
        mantel: test,
        tiers,
        unmatched,
    };
    Ok(ExperimentReport::new(
        "phylogenetic",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("tiers", scatter)
    .figure("dendrogram", merges))
}
