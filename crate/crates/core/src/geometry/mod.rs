//! Vector-space operations over one layer of an embedding store.
//!
//! Everything here works on [`LayerSlice`], an `f64` copy of a single layer
//! with the store's validity mask. Isotropy correction ([`abtt`]) and
//! per-language centering transform slices in place; similarity, distance
//! and convergence functions read them.

pub mod abtt;
pub mod distance;
pub mod pca;
pub mod upgma;

pub use abtt::{abtt_correct, correct_layer, layer_basis, AbttBasis, CorrectionConfig};
pub use distance::{
    center_languages, concept_convergence, convergence_score, convergence_scores,
    cosine_distance, cosine_similarity, language_distance_matrix, pairwise_language_distance,
    per_language_center,
};
pub use pca::{pca_project, PcaResult};
pub use upgma::{upgma_cluster, Dendrogram, Merge};

use crate::store::{EmbeddingStore, StoreError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("zero-norm input vector")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("k too large: k = {k} must be below {limit}")]
    KTooLarge { k: usize, limit: usize },
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("language {0} has no valid concepts")]
    NoValidConcepts(String),
    #[error("languages {0} and {1} share no valid concepts")]
    NoSharedConcepts(String, String),
    #[error("concept {0:?} is valid in fewer than 2 languages")]
    TooFewLanguages(String),
    #[error("n_components = {requested} must be in 1..={limit}")]
    NComponents { requested: usize, limit: usize },
    #[error("all points identical")]
    IdenticalPoints,
    #[error("non-finite entry in input")]
    NonFinite,
    #[error("layer position {0} out of range")]
    LayerOutOfRange(usize),
    #[error("need at least 2 leaves")]
    TooFewLeaves,
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// One layer of a store as `f64`, laid out `[concept][language][dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSlice {
    n_concepts: usize,
    n_languages: usize,
    dim: usize,
    data: Vec<f64>,
    mask: Vec<bool>,
}

impl LayerSlice {
    /// Copies layer position `layer` out of the store.
    pub fn from_store(store: &EmbeddingStore, layer: usize) -> Result<Self, GeometryError> {
        if layer >= store.n_layers() {
            return Err(GeometryError::LayerOutOfRange(layer));
        }
        let cells = store.n_concepts() * store.n_languages();
        let start = layer * cells * store.dim();
        let data = store.tensor()[start..start + cells * store.dim()]
            .iter()
            .map(|&x| x as f64)
            .collect();
        Ok(Self {
            n_concepts: store.n_concepts(),
            n_languages: store.n_languages(),
            dim: store.dim(),
            data,
            mask: store.mask().to_vec(),
        })
    }

    /// Builds a slice from explicit vectors, `vectors[c][l]`, `None` for masked cells.
    pub fn from_vectors(vectors: &[Vec<Option<Vec<f64>>>]) -> Result<Self, GeometryError> {
        let n_concepts = vectors.len();
        let n_languages = vectors.first().map_or(0, Vec::len);
        let dim = vectors
            .iter()
            .flatten()
            .flatten()
            .map(Vec::len)
            .next()
            .unwrap_or(0);
        let mut data = Vec::with_capacity(n_concepts * n_languages * dim);
        let mut mask = Vec::with_capacity(n_concepts * n_languages);
        for row in vectors {
            if row.len() != n_languages {
                return Err(GeometryError::DimMismatch(row.len(), n_languages));
            }
            for cell in row {
                match cell {
                    Some(v) if v.len() == dim => {
                        data.extend_from_slice(v);
                        mask.push(true);
                    }
                    Some(v) => return Err(GeometryError::DimMismatch(v.len(), dim)),
                    None => {
                        data.extend(std::iter::repeat_n(0.0, dim));
                        mask.push(false);
                    }
                }
            }
        }
        Ok(Self {
            n_concepts,
            n_languages,
            dim,
            data,
            mask,
        })
    }

    pub fn n_concepts(&self) -> usize {
        self.n_concepts
    }

    pub fn n_languages(&self) -> usize {
        self.n_languages
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_valid(&self, concept: usize, language: usize) -> bool {
        self.mask[concept * self.n_languages + language]
    }

    pub fn vector(&self, concept: usize, language: usize) -> &[f64] {
        let cell = concept * self.n_languages + language;
        &self.data[cell * self.dim..(cell + 1) * self.dim]
    }

    pub fn vector_mut(&mut self, concept: usize, language: usize) -> &mut [f64] {
        let cell = concept * self.n_languages + language;
        &mut self.data[cell * self.dim..(cell + 1) * self.dim]
    }

    /// Number of masked-true cells.
    pub fn n_valid(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Languages valid for a concept.
    pub fn valid_languages(&self, concept: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_languages).filter(move |&l| self.is_valid(concept, l))
    }

    /// Mean of a concept's valid language vectors; `None` when no cell is valid.
    pub fn concept_centroid(&self, concept: usize) -> Option<Vec<f64>> {
        self.centroid_over(concept, self.valid_languages(concept))
    }

    /// Mean over the given languages that are valid for `concept`.
    pub fn centroid_over(
        &self,
        concept: usize,
        languages: impl IntoIterator<Item = usize>,
    ) -> Option<Vec<f64>> {
        let mut acc = vec![0.0; self.dim];
        let mut n = 0usize;
        for l in languages {
            if !self.is_valid(concept, l) {
                continue;
            }
            for (a, x) in acc.iter_mut().zip(self.vector(concept, l)) {
                *a += x;
            }
            n += 1;
        }
        (n > 0).then(|| {
            acc.iter_mut().for_each(|a| *a /= n as f64);
            acc
        })
    }
}
