//! Cosine similarity, per-language centering, language distance matrices
//! and concept convergence.

use super::{correct_layer, CorrectionConfig, GeometryError, LayerSlice};
use crate::numeric::{compensated_sum, dot, norm};
use crate::store::{DistanceMatrix, EmbeddingStore};
use rayon::prelude::*;

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, GeometryError> {
    if u.len() != v.len() {
        return Err(GeometryError::DimMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 || !nu.is_finite() || !nv.is_finite() {
        return Err(GeometryError::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// `1 − cosine_similarity`, in `[0, 2]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64, GeometryError> {
    cosine_similarity(u, v).map(|s| 1.0 - s)
}

/// Copy of the slice with every valid cell scaled to unit length.
pub(crate) fn unit_slice(slice: &LayerSlice) -> Result<LayerSlice, GeometryError> {
    let mut out = slice.clone();
    for c in 0..out.n_concepts() {
        for l in 0..out.n_languages() {
            if !out.is_valid(c, l) {
                continue;
            }
            let v = out.vector_mut(c, l);
            let n = norm(v);
            if n == 0.0 || !n.is_finite() {
                return Err(GeometryError::ZeroNorm);
            }
            v.iter_mut().for_each(|x| *x /= n);
        }
    }
    Ok(out)
}

/// Subtracts from each language its mean over valid concepts.
///
/// The error names the language by position (`#3`).
pub fn center_languages(slice: &mut LayerSlice) -> Result<(), GeometryError> {
    let dim = slice.dim();
    for l in 0..slice.n_languages() {
        let rows: Vec<usize> = (0..slice.n_concepts())
            .filter(|&c| slice.is_valid(c, l))
            .collect();
        if rows.is_empty() {
            return Err(GeometryError::NoValidConcepts(format!("#{l}")));
        }
        let mean: Vec<f64> = (0..dim)
            .map(|j| compensated_sum(rows.iter().map(|&c| slice.vector(c, l)[j])) / rows.len() as f64)
            .collect();
        for &c in &rows {
            slice
                .vector_mut(c, l)
                .iter_mut()
                .zip(&mean)
                .for_each(|(x, m)| *x -= m);
        }
    }
    Ok(())
}

/// Per-language mean-centering of one raw layer.
pub fn per_language_center(store: &EmbeddingStore, layer: usize) -> Result<LayerSlice, GeometryError> {
    let mut slice = LayerSlice::from_store(store, layer)?;
    center_languages(&mut slice).map_err(|e| name_language(e, store))?;
    Ok(slice)
}

pub(crate) fn name_language(err: GeometryError, store: &EmbeddingStore) -> GeometryError {
    match err {
        GeometryError::NoValidConcepts(pos) => {
            let name = pos
                .strip_prefix('#')
                .and_then(|p| p.parse::<usize>().ok())
                .and_then(|i| store.languages().get(i))
                .map_or(pos.clone(), |m| m.code.clone());
            GeometryError::NoValidConcepts(name)
        }
        GeometryError::TooFewLanguages(pos) => {
            let name = pos
                .strip_prefix('#')
                .and_then(|p| p.parse::<usize>().ok())
                .and_then(|i| store.concepts().get(i))
                .map_or(pos.clone(), |m| m.gloss.clone());
            GeometryError::TooFewLanguages(name)
        }
        GeometryError::NoSharedConcepts(a, b) => {
            let look = |s: &str| {
                s.strip_prefix('#')
                    .and_then(|p| p.parse::<usize>().ok())
                    .and_then(|i| store.languages().get(i))
                    .map_or(s.to_string(), |m| m.code.clone())
            };
            GeometryError::NoSharedConcepts(look(&a), look(&b))
        }
        other => other,
    }
}

/// Mean pairwise cosine similarity of a concept across its valid languages.
///
/// Uses `Σ_{i<j} cos(u_i, u_j) = (‖Σ u_i‖² − n) / 2` on unit vectors.
pub fn concept_convergence(slice: &LayerSlice, concept: usize) -> Result<f64, GeometryError> {
    let langs: Vec<usize> = slice.valid_languages(concept).collect();
    let n = langs.len();
    if n < 2 {
        return Err(GeometryError::TooFewLanguages(format!("#{concept}")));
    }
    let mut sum = vec![0.0; slice.dim()];
    for &l in &langs {
        let v = slice.vector(concept, l);
        let nv = norm(v);
        if nv == 0.0 || !nv.is_finite() {
            return Err(GeometryError::ZeroNorm);
        }
        sum.iter_mut().zip(v).for_each(|(s, x)| *s += x / nv);
    }
    let sq = dot(&sum, &sum);
    let nf = n as f64;
    Ok(((sq - nf) / (nf * (nf - 1.0))).clamp(-1.0, 1.0))
}

/// Convergence of every concept; `Err` entries for concepts that fail.
pub fn convergence_scores(slice: &LayerSlice) -> Vec<Result<f64, GeometryError>> {
    (0..slice.n_concepts())
        .into_par_iter()
        .map(|c| concept_convergence(slice, c))
        .collect()
}

pub fn convergence_score(
    store: &EmbeddingStore,
    layer: usize,
    concept: usize,
    correction: &CorrectionConfig,
) -> Result<f64, GeometryError> {
    if concept >= store.n_concepts() {
        return Err(GeometryError::TooFewLanguages(format!("#{concept}")));
    }
    let slice = correct_layer(store, layer, correction)?;
    concept_convergence(&slice, concept).map_err(|e| name_language(e, store))
}

/// Mean cosine distance over jointly valid concepts for every language pair.
pub fn language_distance_matrix(
    slice: &LayerSlice,
    labels: Vec<String>,
) -> Result<DistanceMatrix, GeometryError> {
    let n = slice.n_languages();
    if labels.len() != n {
        return Err(GeometryError::DimMismatch(labels.len(), n));
    }
    let unit = unit_slice(slice)?;
    let rows: Vec<Result<Vec<f64>, GeometryError>> = (0..n)
        .into_par_iter()
        .map(|a| {
            ((a + 1)..n)
                .map(|b| {
                    let mut count = 0usize;
                    let total = compensated_sum(
                        (0..unit.n_concepts())
                            .filter(|&c| unit.is_valid(c, a) && unit.is_valid(c, b))
                            .map(|c| {
                                count += 1;
                                1.0 - dot(unit.vector(c, a), unit.vector(c, b)).clamp(-1.0, 1.0)
                            }),
                    );
                    if count == 0 {
                        Err(GeometryError::NoSharedConcepts(
                            labels[a].clone(),
                            labels[b].clone(),
                        ))
                    } else {
                        Ok((total / count as f64).clamp(0.0, 2.0))
                    }
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for (a, row) in rows.into_iter().enumerate() {
        for (off, d) in row?.into_iter().enumerate() {
            let b = a + 1 + off;
            values[a * n + b] = d;
            values[b * n + a] = d;
        }
    }
    Ok(DistanceMatrix::new(labels, values)?)
}

/// Language distance matrix of one corrected layer, labelled by language code.
pub fn pairwise_language_distance(
    store: &EmbeddingStore,
    layer: usize,
    correction: &CorrectionConfig,
) -> Result<DistanceMatrix, GeometryError> {
    let slice = correct_layer(store, layer, correction)?;
    let labels = store.languages().iter().map(|l| l.code.clone()).collect();
    language_distance_matrix(&slice, labels)
}
