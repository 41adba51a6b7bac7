//! Synthetic stores with planted structure.
//!
//! Cell `(ℓ, c, l)` is
//! `concept_scale·g_c + decay^ℓ·offset_scale·λ_c·o_l + noise_scale·ε`
//! with standard Gaussian `g`, `o`, `ε`. `g` is centred across concepts so
//! per-language centering recovers `concept_scale·g_c` when noise is zero.

mod fixtures;
mod tree;

pub use fixtures::{
    color_store, planted_colex_edges, planted_offset_pairs, planted_word_forms, write_fixture_set,
    FixtureSet, BERLIN_KAY_TERMS,
};
pub use tree::{tree_path_distances, PhyloTree, TreeNode};

use crate::store::{
    Condition, ConceptMeta, DistanceMatrix, EmbeddingStore, LanguageMeta, StoreError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid plant spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A planted colexification: concept `b` is redrawn as
/// `ρ·g_a + √(1−ρ²)·z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColexPlant {
    pub concept_a: usize,
    pub concept_b: usize,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub n_concepts: usize,
    pub n_languages: usize,
    pub dim: usize,
    #[serde(default = "one")]
    pub n_layers: usize,
    pub concept_scale: f64,
    pub offset_scale: f64,
    pub noise_scale: f64,
    #[serde(default)]
    pub tree: Option<PhyloTree>,
    #[serde(default)]
    pub colex_pairs: Vec<ColexPlant>,
    /// Offsets at layer position `ℓ` are scaled by `decay^ℓ`.
    #[serde(default)]
    pub layer_offset_decay: Option<f64>,
    /// Per-concept multiplier `λ_c` on the language offset.
    #[serde(default)]
    pub concept_dispersion: Option<Vec<f64>>,
    /// Probability that a cell is absent. Concept 0 and languages 0 and 1
    /// are always present.
    #[serde(default)]
    pub missing_fraction: f64,
    #[serde(default = "default_categories")]
    pub n_categories: usize,
    /// Used when there is no tree to take families from.
    #[serde(default = "default_families")]
    pub n_families: usize,
    #[serde(default = "default_condition")]
    pub condition: Condition,
    pub seed: u64,
    /// Seed of the noise stream; defaults to a value derived from `seed`.
    #[serde(default)]
    pub noise_seed: Option<u64>,
}

fn one() -> usize {
    1
}

fn default_categories() -> usize {
    4
}

fn default_families() -> usize {
    3
}

fn default_condition() -> Condition {
    Condition::Contextual
}

impl PlantSpec {
    /// Plant with the given shape and scales and no tree, colex pairs or decay.
    pub fn new(
        n_concepts: usize,
        n_languages: usize,
        dim: usize,
        concept_scale: f64,
        offset_scale: f64,
        noise_scale: f64,
        seed: u64,
    ) -> Self {
        Self {
            n_concepts,
            n_languages,
            dim,
            n_layers: 1,
            concept_scale,
            offset_scale,
            noise_scale,
            tree: None,
            colex_pairs: Vec::new(),
            layer_offset_decay: None,
            concept_dispersion: None,
            missing_fraction: 0.0,
            n_categories: default_categories(),
            n_families: default_families(),
            condition: Condition::Contextual,
            seed,
            noise_seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.n_concepts == 0 || self.n_languages == 0 || self.dim == 0 || self.n_layers == 0 {
            return bad("n_concepts, n_languages, dim and n_layers must be positive".into());
        }
        if !(self.concept_scale.is_finite() && self.concept_scale > 0.0) {
            return bad("concept_scale must be finite and > 0".into());
        }
        for (name, v) in [("offset_scale", self.offset_scale), ("noise_scale", self.noise_scale)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and ≥ 0"));
            }
        }
        if let Some(d) = self.layer_offset_decay {
            if !(0.0..=1.0).contains(&d) {
                return bad("layer_offset_decay must be in [0, 1]".into());
            }
        }
        if let Some(t) = &self.tree {
            if t.n_leaves() != self.n_languages {
                return bad(format!(
                    "tree has {} leaves for {} languages",
                    t.n_leaves(),
                    self.n_languages
                ));
            }
        }
        if let Some(l) = &self.concept_dispersion {
            if l.len() != self.n_concepts || l.iter().any(|x| !x.is_finite()) {
                return bad("concept_dispersion needs one finite value per concept".into());
            }
        }
        if !(0.0..1.0).contains(&self.missing_fraction) {
            return bad("missing_fraction must be in [0, 1)".into());
        }
        if self.n_categories == 0 || self.n_families == 0 {
            return bad("n_categories and n_families must be positive".into());
        }
        let mut redrawn = std::collections::HashSet::new();
        for p in &self.colex_pairs {
            if p.concept_a >= self.n_concepts || p.concept_b >= self.n_concepts || p.concept_a == p.concept_b {
                return bad(format!("colex pair ({}, {}) out of range", p.concept_a, p.concept_b));
            }
            if !(0.0..=1.0).contains(&p.correlation) {
                return bad("colex correlation must be in [0, 1]".into());
            }
            if !redrawn.insert(p.concept_b) {
                return bad(format!("concept {} is the second member of two colex pairs", p.concept_b));
            }
        }
        Ok(())
    }
}

/// Language code for index `i`: `aaa_Latn`, `aab_Latn`, …
pub fn language_code(i: usize) -> String {
    let mut s = [b'a'; 3];
    let mut v = i;
    for k in (0..3).rev() {
        s[k] = b'a' + (v % 26) as u8;
        v /= 26;
    }
    format!("{}_Latn", std::str::from_utf8(&s).expect("ascii"))
}

pub fn concept_gloss(i: usize) -> String {
    format!("c{i:03}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedColex {
    pub concept_a: String,
    pub concept_b: String,
    pub correlation: f64,
}

/// What the generator planted, written beside the store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: PlantSpec,
    pub languages: Vec<String>,
    pub concepts: Vec<String>,
    pub families: Vec<String>,
    /// Present when the plant has a tree.
    pub subfamilies: Option<Vec<String>>,
    /// Row-major leaf path distances, present with a tree.
    pub tree_distances: Option<Vec<f64>>,
    pub colex_pairs: Vec<PlantedColex>,
    /// `concept_scale·g_c`, after centering across concepts.
    pub concept_vectors: Vec<Vec<f64>>,
    /// `offset_scale·o_l`, before layer decay and dispersion.
    pub offsets: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn tree_distance_matrix(&self) -> Option<DistanceMatrix> {
        let values = self.tree_distances.clone()?;
        DistanceMatrix::new(self.languages.clone(), values).ok()
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Generates the store and its ground truth. Deterministic in the spec.
pub fn gen_planted(spec: &PlantSpec) -> Result<(EmbeddingStore, GroundTruth), SynthError> {
    spec.validate()?;
    let (nc, nl, dim) = (spec.n_concepts, spec.n_languages, spec.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut g: Vec<Vec<f64>> = (0..nc).map(|_| gaussian_vec(&mut rng, dim)).collect();
    for p in &spec.colex_pairs {
        let z = gaussian_vec(&mut rng, dim);
        let rho = p.correlation;
        let s = (1.0 - rho * rho).sqrt();
        g[p.concept_b] = g[p.concept_a]
            .iter()
            .zip(&z)
            .map(|(a, z)| rho * a + s * z)
            .collect();
    }
    for j in 0..dim {
        let m = crate::numeric::compensated_sum(g.iter().map(|v| v[j])) / nc as f64;
        g.iter_mut().for_each(|v| v[j] -= m);
    }

    let offsets: Vec<Vec<f64>> = match &spec.tree {
        Some(tree) => brownian_offsets(tree, dim, &mut rng),
        None => (0..nl).map(|_| gaussian_vec(&mut rng, dim)).collect(),
    };

    let mut mask = vec![true; nc * nl];
    if spec.missing_fraction > 0.0 {
        for c in 1..nc {
            for l in 2..nl {
                mask[c * nl + l] = rng.random::<f64>() >= spec.missing_fraction;
            }
        }
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(
        spec.noise_seed
            .unwrap_or(spec.seed ^ 0x9e37_79b9_7f4a_7c15),
    );
    let decay = spec.layer_offset_decay.unwrap_or(1.0);
    let mut tensor = Vec::with_capacity(spec.n_layers * nc * nl * dim);
    for layer in 0..spec.n_layers {
        let layer_scale = decay.powi(layer as i32) * spec.offset_scale;
        for c in 0..nc {
            let lambda = spec.concept_dispersion.as_ref().map_or(1.0, |d| d[c]);
            for l in 0..nl {
                for j in 0..dim {
                    let eps = if spec.noise_scale > 0.0 {
                        noise_rng.sample::<f64, _>(StandardNormal)
                    } else {
                        0.0
                    };
                    let v = spec.concept_scale * g[c][j]
                        + layer_scale * lambda * offsets[l][j]
                        + spec.noise_scale * eps;
                    tensor.push(v as f32);
                }
            }
        }
    }

    let languages: Vec<String> = (0..nl).map(language_code).collect();
    let concepts: Vec<String> = (0..nc).map(concept_gloss).collect();
    let (families, subfamilies) = match &spec.tree {
        Some(tree) => (
            tree.clades_at_depth(2).iter().map(|i| format!("fam{i}")).collect(),
            Some(tree.clades_at_depth(3).iter().map(|i| format!("sub{i}")).collect()),
        ),
        None => (
            (0..nl).map(|l| format!("fam{}", l % spec.n_families)).collect::<Vec<_>>(),
            None,
        ),
    };
    let store = EmbeddingStore::new(
        concepts
            .iter()
            .enumerate()
            .map(|(i, c)| ConceptMeta::new(c.clone(), format!("cat{}", i % spec.n_categories)))
            .collect(),
        languages
            .iter()
            .zip(&families)
            .map(|(code, fam)| LanguageMeta::new(code.clone(), fam.clone()))
            .collect(),
        (0..spec.n_layers as u32).collect(),
        spec.condition,
        dim,
        tensor,
        mask,
    )?;
    let tree_distances = spec
        .tree
        .as_ref()
        .map(|t| tree_path_distances(t, languages.clone()).map(|d| d.values().to_vec()))
        .transpose()?;
    let truth = GroundTruth {
        spec: spec.clone(),
        languages,
        concepts: concepts.clone(),
        families,
        subfamilies,
        tree_distances,
        colex_pairs: spec
            .colex_pairs
            .iter()
            .map(|p| PlantedColex {
                concept_a: concepts[p.concept_a].clone(),
                concept_b: concepts[p.concept_b].clone(),
                correlation: p.correlation,
            })
            .collect(),
        concept_vectors: g
            .iter()
            .map(|v| v.iter().map(|x| spec.concept_scale * x).collect())
            .collect(),
        offsets: offsets
            .iter()
            .map(|v| v.iter().map(|x| spec.offset_scale * x).collect())
            .collect(),
    };
    Ok((store, truth))
}

/// Offsets from Gaussian steps along each root-to-leaf path. Step variance
/// is the branch length over the mean leaf depth, so leaves have unit
/// variance per coordinate on average.
fn brownian_offsets(tree: &PhyloTree, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let h = tree.mean_leaf_depth();
    let h = if h > 0.0 { h } else { 1.0 };
    let nodes = tree.nodes();
    let mut value = vec![vec![0.0; dim]; nodes.len()];
    // parents always precede children in a root-first traversal
    let mut order = Vec::with_capacity(nodes.len());
    let mut stack = vec![tree.root()];
    while let Some(i) = stack.pop() {
        order.push(i);
        stack.extend(nodes[i].children.iter().rev());
    }
    for &i in &order {
        if let Some(p) = nodes[i].parent {
            let sd = (nodes[i].branch_length / h).sqrt();
            let step = gaussian_vec(rng, dim);
            value[i] = value[p].iter().zip(&step).map(|(a, s)| a + sd * s).collect();
        }
    }
    (0..tree.n_leaves())
        .map(|l| value[tree.leaf_node(l)].clone())
        .collect()
}
