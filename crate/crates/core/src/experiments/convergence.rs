//! Convergence rankings and the analyses built directly on them.

use super::report::{Cell, ExperimentReport, FigureSeries, Real, StoreInfo};
use super::store_ratio::store_ratio;
use super::{base_config, convergence_of, mean_sd, rank_order, scored_slice, ExperimentError, Excluded};
use crate::geometry::{center_languages, layer_basis, CorrectionConfig, LayerSlice};
use crate::stats::{cohens_d, mann_whitney_u, paired_t, spearman, Alternative, StatsError, TestResult};
use crate::store::EmbeddingStore;
use serde::Serialize;
use serde_json::json;

const LIST_LEN: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptScore {
    pub rank: usize,
    pub gloss: String,
    pub category: String,
    pub score: f64,
    pub n_languages: usize,
}

fn ranking(store: &EmbeddingStore, slice: &LayerSlice, scores: &[Option<f64>]) -> Vec<ConceptScore> {
    rank_order(scores)
        .into_iter()
        .enumerate()
        .map(|(r, c)| ConceptScore {
            rank: r + 1,
            gloss: store.concepts()[c].gloss.clone(),
            category: store.concepts()[c].category.clone(),
            score: scores[c].expect("ranked concepts are scored"),
            n_languages: slice.valid_languages(c).count(),
        })
        .collect()
}

fn head_tail(ranking: &[ConceptScore]) -> (Vec<String>, Vec<String>) {
    let top = ranking.iter().take(LIST_LEN).map(|s| s.gloss.clone()).collect();
    let bottom = ranking
        .iter()
        .rev()
        .take(LIST_LEN)
        .map(|s| s.gloss.clone())
        .collect();
    (top, bottom)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceResults {
    pub ranking: Vec<ConceptScore>,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub top: Vec<String>,
    /// Lowest first.
    pub bottom: Vec<String>,
    pub excluded: Vec<Excluded>,
}

pub fn exp_convergence_ranking(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
) -> Result<ExperimentReport<ConvergenceResults>, ExperimentError> {
    let config = base_config(store, layer, correction)?;
    let (slice, scores, excluded) = scored_slice(store, layer, correction)?;
    let ranking = ranking(store, &slice, &scores);
    if ranking.is_empty() {
        return Err(ExperimentError::Insufficient(
            "no concept is valid in at least 2 languages".into(),
        ));
    }
    let values: Vec<f64> = ranking.iter().map(|s| s.score).collect();
    let (mean, sd) = mean_sd(&values);
    let (top, bottom) = head_tail(&ranking);
    let mut series = FigureSeries::new(&["rank", "gloss", "category", "score"]);
    for s in &ranking {
        series.push(vec![
            s.rank.into(),
            s.gloss.as_str().into(),
            s.category.as_str().into(),
            s.score.into(),
        ]);
    }
    let results = ConvergenceResults {
        mean,
        sd,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        top,
        bottom,
        ranking,
        excluded,
    };
    Ok(ExperimentReport::new(
        "convergence_ranking",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("ranking", series))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryGroup {
    pub category: String,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
    /// Members, highest score first.
    pub concepts: Vec<ConceptScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryResults {
    /// Highest category mean first.
    pub categories: Vec<CategoryGroup>,
    pub overall_mean: f64,
    pub excluded: Vec<Excluded>,
}

pub fn exp_category_summary(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
) -> Result<ExperimentReport<CategoryResults>, ExperimentError> {
    let config = base_config(store, layer, correction)?;
    let (slice, scores, excluded) = scored_slice(store, layer, correction)?;
    let ranking = ranking(store, &slice, &scores);
    let mut groups: std::collections::BTreeMap<String, Vec<ConceptScore>> = Default::default();
    for s in &ranking {
        groups.entry(s.category.clone()).or_default().push(s.clone());
    }
    let mut categories: Vec<CategoryGroup> = groups
        .into_iter()
        .map(|(category, concepts)| {
            let values: Vec<f64> = concepts.iter().map(|s| s.score).collect();
            let (mean, sd) = mean_sd(&values);
            CategoryGroup {
                category,
                mean,
                sd,
                n: concepts.len(),
                concepts,
            }
        })
        .collect();
    categories.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.category.cmp(&b.category)));
    let all: Vec<f64> = ranking.iter().map(|s| s.score).collect();
    let mut bars = FigureSeries::new(&["category", "mean", "sd", "n"]);
    let mut points = FigureSeries::new(&["category", "gloss", "score"]);
    for g in &categories {
        bars.push(vec![g.category.as_str().into(), g.mean.into(), g.sd.into(), g.n.into()]);
        for s in &g.concepts {
            points.push(vec![g.category.as_str().into(), s.gloss.as_str().into(), s.score.into()]);
        }
    }
    let results = CategoryResults {
        categories,
        overall_mean: mean_sd(&all).0,
        excluded,
    };
    Ok(ExperimentReport::new(
        "category_summary",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("categories", bars)
    .figure("concepts", points))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparisonResults {
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub mann_whitney: TestResult,
    pub cohens_d: f64,
    pub excluded_a: Vec<Excluded>,
    pub excluded_b: Vec<Excluded>,
}

/// Compares the convergence distributions of two concept sets embedded over
/// the same languages.
pub fn exp_group_comparison(
    store_a: &EmbeddingStore,
    store_b: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
    alternative: Alternative,
) -> Result<ExperimentReport<GroupComparisonResults>, ExperimentError> {
    let codes = |s: &EmbeddingStore| s.languages().iter().map(|l| l.code.clone()).collect::<Vec<_>>();
    if codes(store_a) != codes(store_b) {
        return Err(ExperimentError::Mismatch("language lists differ".into()));
    }
    let mut config = base_config(store_a, layer, correction)?;
    config.insert("alternative".into(), json!(alternative));
    let (_, sa, excluded_a) = scored_slice(store_a, layer, correction)?;
    let (_, sb, excluded_b) = scored_slice(store_b, layer, correction)?;
    let a: Vec<f64> = sa.into_iter().flatten().collect();
    let b: Vec<f64> = sb.into_iter().flatten().collect();
    let mw = mann_whitney_u(&a, &b, alternative).map_err(ExperimentError::stats("mann-whitney"))?;
    let d = cohens_d(&a, &b).map_err(ExperimentError::stats("cohen's d"))?;
    let mut series = FigureSeries::new(&["group", "score"]);
    for (g, v) in [("a", &a), ("b", &b)] {
        for &x in v.iter() {
            series.push(vec![g.into(), x.into()]);
        }
    }
    let results = GroupComparisonResults {
        mean_a: mean_sd(&a).0,
        mean_b: mean_sd(&b).0,
        n_a: a.len(),
        n_b: b.len(),
        mann_whitney: mw,
        cohens_d: d,
        excluded_a,
        excluded_b,
    };
    Ok(ExperimentReport::new(
        "group_comparison",
        config,
        results,
        vec![StoreInfo::of("store_a", store_a), StoreInfo::of("store_b", store_b)],
    )
    .figure("scores", series))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regime {
    /// `"raw"` or `"k=<k>"`.
    pub name: String,
    pub k: usize,
    pub apply_global_mean: bool,
    pub mean: f64,
    /// Spearman ρ against the reference regime; `None` when undefined.
    pub rho_vs_reference: Option<f64>,
    pub top: Vec<String>,
    pub bottom: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsotropyResults {
    pub reference_k: usize,
    pub regimes: Vec<Regime>,
    /// Spearman ρ between the raw and reference rankings.
    pub raw_vs_corrected: Option<f64>,
    pub min_rho: Option<f64>,
    pub diagnostics: Vec<String>,
    pub excluded: Vec<Excluded>,
}

/// Spearman ρ over concepts scored in both vectors.
fn paired_rho(a: &[Option<f64>], b: &[Option<f64>]) -> Result<f64, StatsError> {
    let (x, y): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .unzip();
    if x == y && x.len() >= 2 {
        // identical orderings, including the all-tied case
        return Ok(1.0);
    }
    spearman(&x, &y).map(|(rho, _)| rho)
}

/// Re-ranks concepts under a sweep of correction strengths.
///
/// The reference regime is `k = 3` when listed, else the largest `k`.
pub fn exp_isotropy_validation(
    store: &EmbeddingStore,
    layer: usize,
    k_values: &[usize],
) -> Result<ExperimentReport<IsotropyResults>, ExperimentError> {
    if k_values.is_empty() {
        return Err(ExperimentError::Config("k_values is empty".into()));
    }
    let mut ks = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let max_k = *ks.last().expect("nonempty");
    let reference_k = if ks.contains(&3) { 3 } else { max_k };
    let mut config = base_config(store, layer, &CorrectionConfig::with_k(reference_k))?;
    config.remove("correction");
    config.insert("k_values".into(), json!(ks));
    config.insert("reference_k".into(), json!(reference_k));

    let basis = layer_basis(store, layer, max_k)?;
    let raw = LayerSlice::from_store(store, layer)?;
    let mut regimes_scores = vec![("raw".to_string(), CorrectionConfig::RAW, {
        let (s, _) = convergence_of(&raw, store);
        s
    })];
    let mut excluded = Vec::new();
    for &k in &ks {
        let cfg = CorrectionConfig::with_k(k);
        let mut slice = raw.clone();
        basis.apply_slice(&mut slice, &cfg)?;
        let (s, ex) = convergence_of(&slice, store);
        if k == reference_k {
            excluded = ex;
        }
        regimes_scores.push((format!("k={k}"), cfg, s));
    }
    let reference = regimes_scores
        .iter()
        .find(|(_, c, _)| c.apply_global_mean && c.k == reference_k)
        .map(|(_, _, s)| s.clone())
        .expect("reference regime computed");

    let mut diagnostics = Vec::new();
    let mut regimes = Vec::new();
    let mut rows = FigureSeries::new(&["regime", "gloss", "rank", "score"]);
    for (name, cfg, scores) in &regimes_scores {
        let rho = match paired_rho(scores, &reference) {
            Ok(r) => Some(r),
            Err(e) => {
                diagnostics.push(format!("{name}: spearman undefined ({e})"));
                None
            }
        };
        let order = rank_order(scores);
        for (r, &c) in order.iter().enumerate() {
            rows.push(vec![
                name.as_str().into(),
                store.concepts()[c].gloss.as_str().into(),
                (r + 1).into(),
                scores[c].expect("ranked").into(),
            ]);
        }
        let gloss = |c: &usize| store.concepts()[*c].gloss.clone();
        let values: Vec<f64> = scores.iter().flatten().copied().collect();
        regimes.push(Regime {
            name: name.clone(),
            k: cfg.k,
            apply_global_mean: cfg.apply_global_mean,
            mean: mean_sd(&values).0,
            rho_vs_reference: rho,
            top: order.iter().take(LIST_LEN).map(gloss).collect(),
            bottom: order.iter().rev().take(LIST_LEN).map(gloss).collect(),
        });
    }
    let raw_vs_corrected = regimes[0].rho_vs_reference;
    let min_rho = regimes
        .iter()
        .skip(1)
        .map(|r| r.rho_vs_reference)
        .try_fold(f64::INFINITY, |m, r| r.map(|r| m.min(r)));
    let results = IsotropyResults {
        reference_k,
        regimes,
        raw_vs_corrected,
        min_rho,
        diagnostics,
        excluded,
    };
    Ok(ExperimentReport::new(
        "isotropy_validation",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("rankings", rows))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarrierResults {
    pub n_concepts: usize,
    pub spearman_rho: f64,
    pub spearman_p: f64,
    pub mean_abs_diff: f64,
    /// `None` when the two score vectors are exactly equal.
    pub paired_t: Option<TestResult>,
    pub exact_equality: bool,
    pub excluded: Vec<Excluded>,
}

/// Compares convergence with and without the carrier sentence.
pub fn exp_carrier_robustness(
    store_ctx: &EmbeddingStore,
    store_dectx: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
) -> Result<ExperimentReport<CarrierResults>, ExperimentError> {
    use crate::store::Condition;
    if store_ctx.condition() != Condition::Contextual {
        return Err(ExperimentError::Mismatch(format!(
            "first store has condition {}, expected contextual",
            store_ctx.condition()
        )));
    }
    if store_dectx.condition() != Condition::Decontextual {
        return Err(ExperimentError::Mismatch(format!(
            "second store has condition {}, expected decontextual",
            store_dectx.condition()
        )));
    }
    let glosses = |s: &EmbeddingStore| s.concepts().iter().map(|c| c.gloss.clone()).collect::<Vec<_>>();
    let codes = |s: &EmbeddingStore| s.languages().iter().map(|l| l.code.clone()).collect::<Vec<_>>();
    if glosses(store_ctx) != glosses(store_dectx) {
        return Err(ExperimentError::Mismatch("concept lists differ".into()));
    }
    if codes(store_ctx) != codes(store_dectx) {
        return Err(ExperimentError::Mismatch("language lists differ".into()));
    }
    let config = base_config(store_ctx, layer, correction)?;
    let (_, sc, mut excluded) = scored_slice(store_ctx, layer, correction)?;
    let (_, sd, ex_d) = scored_slice(store_dectx, layer, correction)?;
    for e in ex_d {
        if !excluded.iter().any(|x| x.item == e.item) {
            excluded.push(e);
        }
    }
    let both: Vec<(usize, f64, f64)> = (0..sc.len())
        .filter_map(|c| Some((c, sc[c]?, sd[c]?)))
        .collect();
    let x: Vec<f64> = both.iter().map(|t| t.1).collect();
    let y: Vec<f64> = both.iter().map(|t| t.2).collect();
    let (rho, p) = if x == y && x.len() >= 3 {
        (1.0, 0.0)
    } else {
        spearman(&x, &y).map_err(ExperimentError::stats("spearman"))?
    };
    let mean_abs_diff =
        crate::numeric::mean(x.iter().zip(&y).map(|(a, b)| (a - b).abs())).unwrap_or(f64::NAN);
    let (paired, exact_equality) = match paired_t(&x, &y) {
        Ok(t) => (Some(t), false),
        Err(StatsError::ZeroDifferenceVariance) if x == y => (None, true),
        Err(e) => return Err(ExperimentError::stats("paired t")(e)),
    };

    let rank_of = |v: &[f64]| {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        let mut rank = vec![0; v.len()];
        for (r, i) in order.iter().enumerate() {
            rank[*i] = r + 1;
        }
        rank
    };
    let (rx, ry) = (rank_of(&x), rank_of(&y));
    let mut top: Vec<usize> = (0..x.len()).collect();
    top.sort_by_key(|&i| rx[i]);
    let mut slope = FigureSeries::new(&[
        "gloss",
        "contextual",
        "decontextual",
        "rank_contextual",
        "rank_decontextual",
    ]);
    for &i in top.iter().take(20) {
        slope.push(vec![
            store_ctx.concepts()[both[i].0].gloss.as_str().into(),
            x[i].into(),
            y[i].into(),
            rx[i].into(),
            ry[i].into(),
        ]);
    }
    let mut scatter = FigureSeries::new(&["gloss", "contextual", "decontextual"]);
    for &(c, a, b) in &both {
        scatter.push(vec![store_ctx.concepts()[c].gloss.as_str().into(), a.into(), b.into()]);
    }
    let results = CarrierResults {
        n_concepts: x.len(),
        spearman_rho: rho,
        spearman_p: p,
        mean_abs_diff,
        paired_t: paired,
        exact_equality,
        excluded,
    };
    Ok(ExperimentReport::new(
        "carrier_robustness",
        config,
        results,
        vec![
            StoreInfo::of("contextual", store_ctx),
            StoreInfo::of("decontextual", store_dectx),
        ],
    )
    .figure("slopegraph", slope)
    .figure("scatter", scatter))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerSummary {
    pub layer: u32,
    pub mean_convergence: f64,
    pub raw_ratio: Real,
    pub centered_ratio: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerwiseResults {
    pub layers: Vec<LayerSummary>,
    /// Layer at the largest increase of the centered ratio.
    pub transition_layer: u32,
    pub transition_increase: Real,
}

/// Per-layer convergence and conceptual-store ratios.
pub fn exp_layerwise(
    store: &EmbeddingStore,
    correction: &CorrectionConfig,
) -> Result<ExperimentReport<LayerwiseResults>, ExperimentError> {
    if store.n_layers() < 2 {
        return Err(ExperimentError::Insufficient(format!(
            "need at least 2 layers, store has {}",
            store.n_layers()
        )));
    }
    let mut config = serde_json::Map::new();
    config.insert("correction".into(), json!(correction));
    config.insert("layers".into(), json!(store.layers()));
    let mut layers = Vec::new();
    let mut heat = FigureSeries::new(&["layer", "gloss", "score"]);
    for pos in 0..store.n_layers() {
        let layer = store.layers()[pos];
        let (mut slice, scores, _) = scored_slice(store, pos, correction)?;
        for (c, s) in scores.iter().enumerate() {
            if let Some(s) = s {
                heat.push(vec![layer.into(), store.concepts()[c].gloss.as_str().into(), (*s).into()]);
            }
        }
        let values: Vec<f64> = scores.iter().flatten().copied().collect();
        let raw = store_ratio(&slice)?;
        center_languages(&mut slice)
            .map_err(|e| crate::geometry::distance::name_language(e, store))?;
        let centered = store_ratio(&slice)?;
        layers.push(LayerSummary {
            layer,
            mean_convergence: mean_sd(&values).0,
            raw_ratio: Real(raw.ratio),
            centered_ratio: Real(centered.ratio),
        });
    }
    let (mut best, mut best_diff) = (1, f64::NEG_INFINITY);
    for i in 1..layers.len() {
        let d = layers[i].centered_ratio.0 - layers[i - 1].centered_ratio.0;
        let d = if d.is_nan() { f64::NEG_INFINITY } else { d };
        if d > best_diff {
            best = i;
            best_diff = d;
        }
    }
    let mut traj = FigureSeries::new(&["layer", "mean_convergence", "raw_ratio", "centered_ratio"]);
    for l in &layers {
        traj.push(vec![
            l.layer.into(),
            l.mean_convergence.into(),
            Cell::Num(l.raw_ratio),
            Cell::Num(l.centered_ratio),
        ]);
    }
    let results = LayerwiseResults {
        transition_layer: layers[best].layer,
        transition_increase: Real(best_diff),
        layers,
    };
    Ok(ExperimentReport::new(
        "layerwise",
        config,
        results,
        vec![StoreInfo::of("store", store)],
    )
    .figure("trajectory", traj)
    .figure("heatmap", heat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Condition, ConceptMeta, LanguageMeta};

    fn codes(n: usize) -> Vec<LanguageMeta> {
        (0..n)
            .map(|l| LanguageMeta::new(format!("a{}{}_Latn", (b'a' + (l / 26) as u8) as char, (b'a' + (l % 26) as u8) as char), "f"))
            .collect()
    }

    fn planted(n_c: usize, n_l: usize, seed: u64) -> EmbeddingStore {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = 8;
        let mut tensor = Vec::new();
        for c in 0..n_c {
            let g: Vec<f32> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            // concept c gets noise that grows with its index
            let noise = 0.05 * c as f32;
            for _ in 0..n_l {
                for j in 0..dim {
                    let e: f32 = StandardNormal.sample(&mut rng);
                    tensor.push(g[j] + noise * e);
                }
            }
        }
        let concepts = (0..n_c)
            .map(|c| ConceptMeta::new(format!("c{c}"), if c < n_c / 2 { "hi" } else { "lo" }))
            .collect();
        EmbeddingStore::new(
            concepts,
            codes(n_l),
            vec![0],
            Condition::Contextual,
            dim,
            tensor,
            vec![true; n_c * n_l],
        )
        .unwrap()
    }

    #[test]
    fn identical_concept_ranks_first() {
        let store = planted(6, 5, 1);
        let rep = exp_convergence_ranking(&store, 0, &CorrectionConfig::RAW).unwrap();
        assert_eq!(rep.results.ranking[0].gloss, "c0");
        assert!((rep.results.ranking[0].score - 1.0).abs() < 1e-6);
        assert_eq!(rep.results.ranking.len(), 6);
    }

    #[test]
    fn single_concept_ranking() {
        let store = planted(1, 4, 2).select_concepts(&[0]).unwrap();
        let rep = exp_convergence_ranking(&store, 0, &CorrectionConfig::RAW).unwrap();
        assert_eq!(rep.results.ranking.len(), 1);
        assert_eq!(rep.results.mean, rep.results.ranking[0].score);
    }

    #[test]
    fn categories_follow_plant() {
        let store = planted(8, 6, 3);
        let rep = exp_category_summary(&store, 0, &CorrectionConfig::RAW).unwrap();
        let names: Vec<&str> = rep.results.categories.iter().map(|g| g.category.as_str()).collect();
        assert_eq!(names, ["hi", "lo"]);
    }

    #[test]
    fn self_comparison() {
        let store = planted(10, 5, 4);
        let rep = exp_group_comparison(&store, &store, 0, &CorrectionConfig::RAW, Alternative::TwoSided)
            .unwrap();
        assert_eq!(rep.results.cohens_d, 0.0);
        assert_eq!(rep.results.mann_whitney.statistic, 50.0);
    }

    #[test]
    fn carrier_self_is_exact_equality() {
        let store = planted(10, 5, 5);
        let d = store.clone().with_condition(Condition::Decontextual);
        let rep = exp_carrier_robustness(&store, &d, 0, &CorrectionConfig::default()).unwrap();
        assert!(rep.results.exact_equality);
        assert_eq!(rep.results.spearman_rho, 1.0);
        assert_eq!(rep.results.mean_abs_diff, 0.0);
        assert!(exp_carrier_robustness(&d, &store, 0, &CorrectionConfig::default()).is_err());
    }

    #[test]
    fn isotropy_single_k_zero() {
        let store = planted(10, 5, 6);
        let rep = exp_isotropy_validation(&store, 0, &[0]).unwrap();
        assert_eq!(rep.results.reference_k, 0);
        assert_eq!(rep.results.regimes.len(), 2);
        assert_eq!(rep.results.regimes[1].rho_vs_reference, Some(1.0));
    }

    #[test]
    fn flat_layers_pick_first_transition() {
        let base = planted(6, 4, 7);
        let one = base.tensor().to_vec();
        let two: Vec<f32> = one.iter().chain(one.iter()).copied().collect();
        let three: Vec<f32> = two.iter().chain(one.iter()).copied().collect();
        let store = EmbeddingStore::new(
            base.concepts().to_vec(),
            base.languages().to_vec(),
            vec![0, 1, 2],
            Condition::Contextual,
            base.dim(),
            three,
            base.mask().to_vec(),
        )
        .unwrap();
        let rep = exp_layerwise(&store, &CorrectionConfig::default()).unwrap();
        assert_eq!(rep.results.transition_layer, 1);
        let m: Vec<f64> = rep.results.layers.iter().map(|l| l.mean_convergence).collect();
        assert!(m.iter().all(|&x| x == m[0]));
    }
}
