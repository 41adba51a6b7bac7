//! Embedding store data model, the LGEO binary format and loaders for the
//! external resources (ASJP distances, CLICS colexification edges, word forms).

mod lgeo;
mod resources;

pub use lgeo::{
    decode_store, encode_store, load_store, read_store_header, save_store, StoreHeader,
    FORMAT_VERSION, MAGIC,
};
pub use resources::{
    align_languages, load_asjp_matrix, load_colex_edges, load_gloss_pairs, load_language_map,
    load_subfamilies, load_word_forms, ColexEdge, ColexEdgeList, LanguageMapping, WordFormTable,
};

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated {0}")]
    Truncated(Section),
    #[error("checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("{0} trailing bytes after checksum")]
    TrailingBytes(usize),
    #[error("malformed metadata: {0}")]
    Metadata(String),
    #[error("invalid store: {0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("non-square matrix: {0}")]
    NonSquare(String),
    #[error("asymmetric entries ({a}, {b}): {ab} vs {ba}")]
    Asymmetric {
        a: String,
        b: String,
        ab: f64,
        ba: f64,
    },
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("unparseable number {value:?} at line {line}")]
    BadNumber { value: String, line: usize },
    #[error("self-loop edge on {0:?} at line {1}")]
    SelfLoop(String, usize),
    #[error("duplicate pair ({0}, {1}) at line {2}")]
    DuplicatePair(String, String, usize),
    #[error("negative count {0} at line {1}")]
    NegativeCount(i64, usize),
    #[error("mapping is not injective: label {0:?} used twice")]
    MappingNotInjective(String),
    #[error("empty intersection between store languages and matrix labels")]
    EmptyIntersection,
}

/// Which part of an LGEO file ran short.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Header,
    Metadata,
    Tensor,
}

impl std::fmt::Display for Section {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Section::Header => "header",
            Section::Metadata => "metadata",
            Section::Tensor => "tensor",
        })
    }
}

/// Lowercase + trim; the join key for glosses across resources.
pub fn normalize_gloss(gloss: &str) -> String {
    gloss.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptMeta {
    pub gloss: String,
    pub category: String,
    #[serde(default)]
    pub polysemous: bool,
}

impl ConceptMeta {
    pub fn new(gloss: impl Into<String>, category: impl Into<String>) -> Self {
        Self {
            gloss: gloss.into(),
            category: category.into(),
            polysemous: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageMeta {
    pub code: String,
    pub family: String,
    pub script: String,
}

impl LanguageMeta {
    /// Builds the metadata, taking the script from the code's subtag.
    pub fn new(code: impl Into<String>, family: impl Into<String>) -> Self {
        let code = code.into();
        let script = code.split_once('_').map(|(_, s)| s.to_string()).unwrap_or_default();
        Self {
            code,
            family: family.into(),
            script,
        }
    }
}

/// `xxx_Yyyy`: three lowercase ASCII letters, underscore, capitalised four-letter script.
pub fn is_valid_language_code(code: &str) -> bool {
    let b = code.as_bytes();
    b.len() == 8
        && b[..3].iter().all(u8::is_ascii_lowercase)
        && b[3] == b'_'
        && b[4].is_ascii_uppercase()
        && b[5..].iter().all(u8::is_ascii_lowercase)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Contextual,
    Decontextual,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Condition::Contextual => "contextual",
            Condition::Decontextual => "decontextual",
        })
    }
}

/// The `[layer × concept × language × dim]` tensor plus metadata and the
/// `[concept × language]` validity mask.
///
/// Masked-false cells always hold zero vectors; the constructor zero-fills
/// them. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    concepts: Vec<ConceptMeta>,
    languages: Vec<LanguageMeta>,
    layers: Vec<u32>,
    condition: Condition,
    dim: usize,
    tensor: Vec<f32>,
    mask: Vec<bool>,
    checksum: u64,
}

impl EmbeddingStore {
    pub fn new(
        concepts: Vec<ConceptMeta>,
        languages: Vec<LanguageMeta>,
        layers: Vec<u32>,
        condition: Condition,
        dim: usize,
        mut tensor: Vec<f32>,
        mask: Vec<bool>,
    ) -> Result<Self, StoreError> {
        if layers.is_empty() {
            return Err(StoreError::Invalid("at least one layer is required".into()));
        }
        if dim == 0 {
            return Err(StoreError::Invalid("dim must be positive".into()));
        }
        let mut seen = HashSet::new();
        for l in &layers {
            if !seen.insert(*l) {
                return Err(StoreError::Invalid(format!("duplicate layer {l}")));
            }
        }
        let mut glosses = HashSet::new();
        for c in &concepts {
            if c.gloss.trim().is_empty() {
                return Err(StoreError::Invalid("empty gloss".into()));
            }
            if c.category.trim().is_empty() {
                return Err(StoreError::Invalid(format!("empty category for {:?}", c.gloss)));
            }
            if !glosses.insert(normalize_gloss(&c.gloss)) {
                return Err(StoreError::Invalid(format!("duplicate gloss {:?}", c.gloss)));
            }
        }
        let mut codes = HashSet::new();
        for l in &languages {
            if !is_valid_language_code(&l.code) {
                return Err(StoreError::Invalid(format!("malformed language code {:?}", l.code)));
            }
            if !codes.insert(l.code.as_str()) {
                return Err(StoreError::Invalid(format!("duplicate language code {:?}", l.code)));
            }
        }
        let cells = concepts
            .len()
            .checked_mul(languages.len())
            .ok_or_else(|| StoreError::Invalid("shape overflow".into()))?;
        if mask.len() != cells {
            return Err(StoreError::Invalid(format!(
                "mask has {} cells, expected {cells}",
                mask.len()
            )));
        }
        let expected = cells
            .checked_mul(dim)
            .and_then(|x| x.checked_mul(layers.len()))
            .ok_or_else(|| StoreError::Invalid("shape overflow".into()))?;
        if tensor.len() != expected {
            return Err(StoreError::Invalid(format!(
                "tensor has {} values, expected {expected}",
                tensor.len()
            )));
        }
        for layer in 0..layers.len() {
            for (cell, &valid) in mask.iter().enumerate() {
                let start = (layer * cells + cell) * dim;
                let v = &mut tensor[start..start + dim];
                if valid {
                    if v.iter().any(|x| !x.is_finite()) {
                        let (c, l) = (cell / languages.len(), cell % languages.len());
                        return Err(StoreError::Invalid(format!(
                            "non-finite value at layer {}, concept {:?}, language {}",
                            layers[layer], concepts[c].gloss, languages[l].code
                        )));
                    }
                    if v.iter().all(|&x| x == 0.0) {
                        let (c, l) = (cell / languages.len(), cell % languages.len());
                        return Err(StoreError::Invalid(format!(
                            "zero-norm vector at layer {}, concept {:?}, language {}",
                            layers[layer], concepts[c].gloss, languages[l].code
                        )));
                    }
                } else {
                    v.fill(0.0);
                }
            }
        }
        let checksum = lgeo::tensor_crc(&tensor);
        Ok(Self {
            concepts,
            languages,
            layers,
            condition,
            dim,
            tensor,
            mask,
            checksum,
        })
    }

    pub fn concepts(&self) -> &[ConceptMeta] {
        &self.concepts
    }

    pub fn languages(&self) -> &[LanguageMeta] {
        &self.languages
    }

    pub fn layers(&self) -> &[u32] {
        &self.layers
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_concepts(&self) -> usize {
        self.concepts.len()
    }

    pub fn n_languages(&self) -> usize {
        self.languages.len()
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Flat row-major tensor, `[layer][concept][language][dim]`.
    pub fn tensor(&self) -> &[f32] {
        &self.tensor
    }

    /// Row-major `[concept][language]` mask.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_valid(&self, concept: usize, language: usize) -> bool {
        self.mask[concept * self.languages.len() + language]
    }

    /// Vector at a layer *position* (not layer value).
    pub fn vector(&self, layer: usize, concept: usize, language: usize) -> &[f32] {
        let cell = (layer * self.concepts.len() + concept) * self.languages.len() + language;
        &self.tensor[cell * self.dim..(cell + 1) * self.dim]
    }

    pub fn concept_index(&self, gloss: &str) -> Option<usize> {
        let key = normalize_gloss(gloss);
        self.concepts.iter().position(|c| normalize_gloss(&c.gloss) == key)
    }

    pub fn language_index(&self, code: &str) -> Option<usize> {
        self.languages.iter().position(|l| l.code == code)
    }

    /// Position of a layer value in the layer list.
    pub fn layer_position(&self, layer: u32) -> Option<usize> {
        self.layers.iter().position(|&l| l == layer)
    }

    /// CRC-64 of the tensor block as written to disk.
    pub fn tensor_checksum(&self) -> u64 {
        self.checksum
    }

    /// Restricts the store to the given language positions, in that order.
    pub fn select_languages(&self, indices: &[usize]) -> Result<Self, StoreError> {
        let n_lang = self.languages.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n_lang) {
            return Err(StoreError::Invalid(format!("language index {bad} out of range")));
        }
        let languages = indices.iter().map(|&i| self.languages[i].clone()).collect();
        let mut mask = Vec::with_capacity(self.concepts.len() * indices.len());
        for c in 0..self.concepts.len() {
            mask.extend(indices.iter().map(|&l| self.is_valid(c, l)));
        }
        let mut tensor = Vec::with_capacity(self.n_layers() * mask.len() * self.dim);
        for layer in 0..self.n_layers() {
            for c in 0..self.concepts.len() {
                for &l in indices {
                    tensor.extend_from_slice(self.vector(layer, c, l));
                }
            }
        }
        Self::new(
            self.concepts.clone(),
            languages,
            self.layers.clone(),
            self.condition,
            self.dim,
            tensor,
            mask,
        )
    }

    /// Restricts the store to the given concept positions, in that order.
    pub fn select_concepts(&self, indices: &[usize]) -> Result<Self, StoreError> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.concepts.len()) {
            return Err(StoreError::Invalid(format!("concept index {bad} out of range")));
        }
        let n_lang = self.languages.len();
        let concepts = indices.iter().map(|&i| self.concepts[i].clone()).collect();
        let mut mask = Vec::with_capacity(indices.len() * n_lang);
        for &c in indices {
            mask.extend_from_slice(&self.mask[c * n_lang..(c + 1) * n_lang]);
        }
        let mut tensor = Vec::with_capacity(self.n_layers() * mask.len() * self.dim);
        for layer in 0..self.n_layers() {
            for &c in indices {
                for l in 0..n_lang {
                    tensor.extend_from_slice(self.vector(layer, c, l));
                }
            }
        }
        Self::new(
            concepts,
            self.languages.clone(),
            self.layers.clone(),
            self.condition,
            self.dim,
            tensor,
            mask,
        )
    }

    /// Same data under another condition tag.
    pub fn with_condition(mut self, condition: Condition) -> Self {
        self.condition = condition;
        self
    }
}

/// Labelled symmetric matrix with zero diagonal and finite, non-negative entries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
}

/// Absolute tolerance for the symmetry check.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

impl DistanceMatrix {
    /// Validates and symmetrises (averaging the two triangles) a row-major matrix.
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self, StoreError> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(StoreError::NonSquare(format!(
                "{} labels but {} values",
                n,
                values.len()
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(StoreError::InvalidMatrix(format!("duplicate label {l:?}")));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(StoreError::InvalidMatrix(format!("non-finite entry {v}")));
        }
        if let Some(v) = values.iter().find(|&&v| v < 0.0) {
            return Err(StoreError::InvalidMatrix(format!("negative entry {v}")));
        }
        let mut sym = values;
        for i in 0..n {
            for j in (i + 1)..n {
                let (ab, ba) = (sym[i * n + j], sym[j * n + i]);
                if (ab - ba).abs() > SYMMETRY_TOLERANCE {
                    return Err(StoreError::Asymmetric {
                        a: labels[i].clone(),
                        b: labels[j].clone(),
                        ab,
                        ba,
                    });
                }
                let m = 0.5 * (ab + ba);
                sym[i * n + j] = m;
                sym[j * n + i] = m;
            }
            if sym[i * n + i].abs() > SYMMETRY_TOLERANCE {
                return Err(StoreError::InvalidMatrix(format!(
                    "nonzero diagonal {} at {:?}",
                    sym[i * n + i],
                    labels[i]
                )));
            }
            sym[i * n + i] = 0.0;
        }
        Ok(Self { labels, values: sym })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.labels.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.labels.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Strict upper triangle in row-major order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            out.extend_from_slice(&self.row(i)[i + 1..]);
        }
        out
    }

    /// Sub-matrix over the given positions, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let values = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self { labels, values }
    }

    /// Same values under new labels.
    pub fn relabel(&self, labels: Vec<String>) -> Result<Self, StoreError> {
        if labels.len() != self.len() {
            return Err(StoreError::InvalidMatrix("relabel length mismatch".into()));
        }
        Self::new(labels, self.values.clone())
    }
}
