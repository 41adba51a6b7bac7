//! Companion resources for planted stores: colexification edges, word
//! forms, offset pairs, a color-term store and a full on-disk fixture set.

use super::{
    gen_planted, language_code, tree_path_distances, GroundTruth, PhyloTree,
    PlantSpec, SynthError,
};
use crate::store::{
    save_store, ColexEdge, ColexEdgeList, Condition, ConceptMeta, EmbeddingStore, LanguageMeta,
    StoreError, WordFormTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const BERLIN_KAY_TERMS: [&str; 11] = [
    "white", "black", "red", "green", "yellow", "blue", "brown", "purple", "pink", "orange",
    "grey",
];

/// Chromatic terms in the order they are placed around the circle.
const HUE_ORDER: [&str; 8] = [
    "red", "orange", "yellow", "green", "blue", "purple", "pink", "brown",
];

/// Family count given to planted colexification pairs.
pub const PLANTED_FAMILY_COUNT: u32 = 5;

/// Edges for every planted pair (count [`PLANTED_FAMILY_COUNT`]) plus
/// background edges with counts 1 or 2, and the full pair universe.
pub fn planted_colex_edges(
    truth: &GroundTruth,
    seed: u64,
) -> Result<(ColexEdgeList, Vec<(String, String)>), StoreError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: std::collections::HashSet<(&str, &str)> = truth
        .colex_pairs
        .iter()
        .flat_map(|p| {
            [
                (p.concept_a.as_str(), p.concept_b.as_str()),
                (p.concept_b.as_str(), p.concept_a.as_str()),
            ]
        })
        .collect();
    let mut edges = Vec::new();
    let mut universe = Vec::new();
    for (i, a) in truth.concepts.iter().enumerate() {
        for b in &truth.concepts[i + 1..] {
            universe.push((a.clone(), b.clone()));
            let count = if planted.contains(&(a.as_str(), b.as_str())) {
                PLANTED_FAMILY_COUNT
            } else {
                match rng.random_range(0..10) {
                    0 => 2,
                    1 | 2 => 1,
                    _ => 0,
                }
            };
            if count > 0 {
                edges.push(ColexEdge {
                    concept_a: a.clone(),
                    concept_b: b.clone(),
                    family_count: count,
                });
            }
        }
    }
    Ok((ColexEdgeList::from_edges(edges)?, universe))
}

/// Disjoint consecutive concept pairs `(c0, c1), (c2, c3), …`, at most `n`.
pub fn planted_offset_pairs(truth: &GroundTruth, n: usize) -> Vec<(String, String)> {
    truth
        .concepts
        .chunks_exact(2)
        .take(n)
        .map(|p| (p[0].clone(), p[1].clone()))
        .collect()
}

/// Random Latin word forms: one base form per concept, mutated per
/// language with a concept-specific substitution rate.
pub fn planted_word_forms(store: &EmbeddingStore, seed: u64) -> Result<WordFormTable, StoreError> {
    const LETTERS: &[u8] = b"abdefgiklmnoprstuvwz";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = WordFormTable::default();
    for (c, concept) in store.concepts().iter().enumerate() {
        let len = rng.random_range(3..8);
        let base: Vec<u8> = (0..len)
            .map(|_| LETTERS[rng.random_range(0..LETTERS.len())])
            .collect();
        let rate = 0.6 * c as f64 / store.n_concepts().max(1) as f64;
        for (l, lang) in store.languages().iter().enumerate() {
            if !store.is_valid(c, l) {
                continue;
            }
            let form: String = base
                .iter()
                .map(|&ch| {
                    if rng.random::<f64>() < rate {
                        LETTERS[rng.random_range(0..LETTERS.len())] as char
                    } else {
                        ch as char
                    }
                })
                .collect();
            table.insert(&concept.gloss, &lang.code, &form)?;
        }
    }
    Ok(table)
}

/// Store with the 11 basic color terms. Chromatic centroids sit on the
/// unit circle in the first two coordinates in hue order; white, black and
/// grey sit at the circle's centre, lifted by `achromatic_lift` along the
/// third coordinate. `dim` must be at least 3.
pub fn color_store(
    n_languages: usize,
    dim: usize,
    achromatic_lift: f64,
    offset_scale: f64,
    noise_scale: f64,
    seed: u64,
) -> Result<EmbeddingStore, SynthError> {
    if dim < 3 || n_languages == 0 {
        return Err(SynthError::InvalidSpec(
            "color store needs dim ≥ 3 and at least one language".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centroid = |term: &str| -> Vec<f64> {
        let mut v = vec![0.0; dim];
        if let Some(k) = HUE_ORDER.iter().position(|t| *t == term) {
            let angle = std::f64::consts::TAU * k as f64 / HUE_ORDER.len() as f64;
            v[0] = angle.cos();
            v[1] = angle.sin();
        } else {
            v[2] = achromatic_lift;
        }
        v
    };
    let offsets: Vec<Vec<f64>> = (0..n_languages)
        .map(|_| (0..dim).map(|_| offset_scale * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut tensor = Vec::with_capacity(BERLIN_KAY_TERMS.len() * n_languages * dim);
    for term in BERLIN_KAY_TERMS {
        let c = centroid(term);
        for off in &offsets {
            for j in 0..dim {
                let eps: f64 = rng.sample(StandardNormal);
                tensor.push((c[j] + off[j] + noise_scale * eps) as f32);
            }
        }
    }
    let concepts = BERLIN_KAY_TERMS
        .iter()
        .map(|t| {
            let cat = if HUE_ORDER.contains(t) { "chromatic" } else { "achromatic" };
            ConceptMeta::new(*t, cat)
        })
        .collect();
    let languages = (0..n_languages)
        .map(|l| LanguageMeta::new(language_code(l), format!("fam{}", l % 3)))
        .collect();
    Ok(EmbeddingStore::new(
        concepts,
        languages,
        vec![0],
        Condition::Contextual,
        dim,
        tensor,
        vec![true; BERLIN_KAY_TERMS.len() * n_languages],
    )?)
}

/// Paths of a fixture set written by [`write_fixture_set`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureSet {
    pub contextual: PathBuf,
    pub decontextual: PathBuf,
    pub comparison: PathBuf,
    pub colors: PathBuf,
    pub asjp: PathBuf,
    pub colex_edges: PathBuf,
    pub pair_universe: PathBuf,
    pub word_forms: PathBuf,
    pub offset_pairs: PathBuf,
    pub subfamilies: PathBuf,
    pub ground_truth: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv<R: IntoIterator<Item = Vec<String>>>(path: &Path, rows: R) -> Result<(), SynthError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| SynthError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    for row in rows {
        w.write_record(&row).map_err(|e| SynthError::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes stores and resources generated from `spec` into `dir`.
///
/// A random tree is used when the spec has none, so the ASJP stand-in
/// always carries phylogenetic signal.
pub fn write_fixture_set(dir: &Path, spec: &PlantSpec) -> Result<FixtureSet, SynthError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut spec = spec.clone();
    if spec.tree.is_none() {
        spec.tree = Some(PhyloTree::random(spec.n_languages, spec.seed ^ 0x7eee));
    }
    let set = FixtureSet {
        contextual: dir.join("contextual.lgeo"),
        decontextual: dir.join("decontextual.lgeo"),
        comparison: dir.join("comparison.lgeo"),
        colors: dir.join("colors.lgeo"),
        asjp: dir.join("asjp.csv"),
        colex_edges: dir.join("colex.csv"),
        pair_universe: dir.join("pairs.csv"),
        word_forms: dir.join("wordforms.csv"),
        offset_pairs: dir.join("offset_pairs.csv"),
        subfamilies: dir.join("subfamilies.csv"),
        ground_truth: dir.join("ground_truth.json"),
    };

    let (store, truth) = gen_planted(&spec)?;
    save_store(&store, &set.contextual)?;

    let mut dectx = spec.clone();
    dectx.condition = Condition::Decontextual;
    dectx.noise_seed = Some(spec.seed ^ 0xdec0);
    save_store(&gen_planted(&dectx)?.0, &set.decontextual)?;

    let mut other = spec.clone();
    other.seed = spec.seed ^ 0xc0ffee;
    other.offset_scale *= 2.0;
    other.colex_pairs.clear();
    save_store(&gen_planted(&other)?.0, &set.comparison)?;

    let colors = color_store(spec.n_languages, spec.dim.max(3), 1.0, 0.3, 0.05, spec.seed ^ 0xc0105)?;
    save_store(&colors, &set.colors)?;

    let tree = spec.tree.as_ref().expect("tree set above");
    let dist = tree_path_distances(tree, truth.languages.clone())?;
    let n = dist.len();
    let header = std::iter::once("language".to_string()).chain(truth.languages.iter().cloned());
    let body = (0..n).map(|i| {
        std::iter::once(truth.languages[i].clone())
            .chain(dist.row(i).iter().map(|v| format!("{v:.17e}")))
            .collect::<Vec<_>>()
    });
    write_csv(&set.asjp, std::iter::once(header.collect()).chain(body))?;

    let (edges, universe) = planted_colex_edges(&truth, spec.seed ^ 0xc01e)?;
    write_csv(
        &set.colex_edges,
        std::iter::once(vec!["concept_a".into(), "concept_b".into(), "family_count".into()]).chain(
            edges
                .edges()
                .iter()
                .map(|e| vec![e.concept_a.clone(), e.concept_b.clone(), e.family_count.to_string()]),
        ),
    )?;
    write_csv(
        &set.pair_universe,
        std::iter::once(vec!["concept_a".into(), "concept_b".into()])
            .chain(universe.into_iter().map(|(a, b)| vec![a, b])),
    )?;

    let forms = planted_word_forms(&store, spec.seed ^ 0xf0f0)?;
    write_csv(
        &set.word_forms,
        std::iter::once(vec!["gloss".into(), "language_code".into(), "form".into()])
            .chain(forms.iter().map(|(g, l, f)| vec![g.into(), l.into(), f.into()])),
    )?;

    let pairs = planted_offset_pairs(&truth, 22);
    write_csv(
        &set.offset_pairs,
        std::iter::once(vec!["concept_a".into(), "concept_b".into()])
            .chain(pairs.into_iter().map(|(a, b)| vec![a, b])),
    )?;

    let subs = truth.subfamilies.clone().unwrap_or_else(|| truth.families.clone());
    write_csv(
        &set.subfamilies,
        std::iter::once(vec!["language_code".into(), "subfamily".into()]).chain(
            truth
                .languages
                .iter()
                .zip(subs)
                .map(|(l, s)| vec![l.clone(), s]),
        ),
    )?;

    let json = serde_json::to_string_pretty(&truth).map_err(|e| SynthError::Io {
        path: set.ground_truth.clone(),
        source: e.into(),
    })?;
    std::fs::write(&set.ground_truth, json).map_err(io_err(&set.ground_truth))?;
    Ok(set)
}
