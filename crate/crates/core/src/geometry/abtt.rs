//! All-but-the-top isotropy correction: subtract the global mean, then
//! remove the leading principal directions.

use super::pca::principal_axes;
use super::{GeometryError, LayerSlice};
use crate::store::EmbeddingStore;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionConfig {
    pub k: usize,
    pub apply_global_mean: bool,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        Self {
            k: 3,
            apply_global_mean: true,
        }
    }
}

impl CorrectionConfig {
    /// Leaves vectors untouched.
    pub const RAW: Self = Self {
        k: 0,
        apply_global_mean: false,
    };

    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            apply_global_mean: true,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.k == 0 && !self.apply_global_mean
    }
}

/// Mean and leading principal axes of a set of rows.
///
/// Fitting once and applying with several `k` values avoids repeating the
/// eigendecomposition in a sweep.
#[derive(Debug, Clone)]
pub struct AbttBasis {
    mean: Vec<f64>,
    axes: Vec<Vec<f64>>,
    rows: usize,
    dim: usize,
}

impl AbttBasis {
    /// Fits on the rows of `matrix`, keeping up to `max_k` axes.
    pub fn fit(matrix: &DMatrix<f64>, max_k: usize) -> Result<Self, GeometryError> {
        let (rows, dim) = matrix.shape();
        if rows < 2 {
            return Err(GeometryError::TooFewRows { needed: 2, got: rows });
        }
        check_k(max_k, rows, dim)?;
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mean: Vec<f64> = (0..dim)
            .map(|j| crate::numeric::compensated_sum(matrix.column(j).iter().copied()) / rows as f64)
            .collect();
        let axes = if max_k == 0 {
            Vec::new()
        } else {
            let centered = DMatrix::from_fn(rows, dim, |i, j| matrix[(i, j)] - mean[j]);
            principal_axes(&centered, max_k).axes
        };
        Ok(Self {
            mean,
            axes,
            rows,
            dim,
        })
    }

    /// Fits on the valid cells of a layer slice.
    pub fn fit_slice(slice: &LayerSlice, max_k: usize) -> Result<Self, GeometryError> {
        Self::fit(&valid_rows(slice), max_k)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Fitted axes; fewer than requested when the data has lower rank.
    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// Applies the correction to one vector in place.
    pub fn apply(&self, v: &mut [f64], config: &CorrectionConfig) -> Result<(), GeometryError> {
        if v.len() != self.dim {
            return Err(GeometryError::DimMismatch(v.len(), self.dim));
        }
        check_k(config.k, self.rows, self.dim)?;
        if config.apply_global_mean {
            v.iter_mut().zip(&self.mean).for_each(|(x, m)| *x -= m);
        }
        self.remove_top(v, config.k);
        Ok(())
    }

    /// The projection step alone: removes the top `k` fitted directions.
    pub fn remove_top(&self, v: &mut [f64], k: usize) {
        for axis in self.axes.iter().take(k) {
            let d = crate::numeric::dot(v, axis);
            v.iter_mut().zip(axis).for_each(|(x, a)| *x -= d * a);
        }
    }

    /// Applies the correction to every valid cell of a slice; masked cells stay zero.
    pub fn apply_slice(
        &self,
        slice: &mut LayerSlice,
        config: &CorrectionConfig,
    ) -> Result<(), GeometryError> {
        check_k(config.k, self.rows, self.dim)?;
        for c in 0..slice.n_concepts() {
            for l in 0..slice.n_languages() {
                if slice.is_valid(c, l) {
                    self.apply(slice.vector_mut(c, l), config)?;
                }
            }
        }
        Ok(())
    }
}

fn check_k(k: usize, rows: usize, dim: usize) -> Result<(), GeometryError> {
    let limit = rows.min(dim);
    if k > 0 && k >= limit {
        return Err(GeometryError::KTooLarge { k, limit });
    }
    Ok(())
}

fn valid_rows(slice: &LayerSlice) -> DMatrix<f64> {
    let cells: Vec<(usize, usize)> = (0..slice.n_concepts())
        .flat_map(|c| (0..slice.n_languages()).map(move |l| (c, l)))
        .filter(|&(c, l)| slice.is_valid(c, l))
        .collect();
    DMatrix::from_fn(cells.len(), slice.dim(), |i, j| {
        let (c, l) = cells[i];
        slice.vector(c, l)[j]
    })
}

/// Corrects every row of `matrix`.
///
/// Identical rows give the all-zero matrix when the mean is subtracted.
pub fn abtt_correct(
    matrix: &DMatrix<f64>,
    config: &CorrectionConfig,
) -> Result<DMatrix<f64>, GeometryError> {
    if config.is_identity() {
        return Ok(matrix.clone());
    }
    let basis = AbttBasis::fit(matrix, config.k)?;
    let mut out = matrix.clone();
    let mut row = vec![0.0; matrix.ncols()];
    for i in 0..out.nrows() {
        row.iter_mut()
            .zip(out.row(i).iter())
            .for_each(|(r, x)| *r = *x);
        basis.apply(&mut row, config)?;
        out.row_mut(i)
            .iter_mut()
            .zip(&row)
            .for_each(|(x, r)| *x = *r);
    }
    Ok(out)
}

/// Store identity (tensor checksum, mask hash, shape), layer position and `max_k`.
type BasisKey = (u64, u64, usize, usize, usize, usize, usize);

/// Recently fitted bases. Fitting is the dominant cost for wide stores and
/// several experiments correct the same layer.
static BASIS_CACHE: Mutex<Vec<(BasisKey, Arc<AbttBasis>)>> = Mutex::new(Vec::new());
const BASIS_CACHE_SIZE: usize = 8;

/// Basis for a store layer with at least `max_k` axes, reusing a cached fit.
pub fn layer_basis(
    store: &EmbeddingStore,
    layer: usize,
    max_k: usize,
) -> Result<Arc<AbttBasis>, GeometryError> {
    let mask_hash = {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        store.mask().hash(&mut h);
        h.finish()
    };
    let key = (
        store.tensor_checksum(),
        mask_hash,
        store.n_concepts(),
        store.n_languages(),
        store.dim(),
        layer,
        max_k,
    );
    if let Some(hit) = BASIS_CACHE
        .lock()
        .expect("basis cache poisoned")
        .iter()
        .find(|(k, _)| *k == key)
    {
        return Ok(hit.1.clone());
    }
    let slice = LayerSlice::from_store(store, layer)?;
    let basis = Arc::new(AbttBasis::fit_slice(&slice, max_k)?);
    let mut cache = BASIS_CACHE.lock().expect("basis cache poisoned");
    if cache.len() >= BASIS_CACHE_SIZE {
        cache.remove(0);
    }
    cache.push((key, basis.clone()));
    Ok(basis)
}

/// One layer of the store, corrected with a basis fit on its valid cells.
pub fn correct_layer(
    store: &EmbeddingStore,
    layer: usize,
    config: &CorrectionConfig,
) -> Result<LayerSlice, GeometryError> {
    let mut slice = LayerSlice::from_store(store, layer)?;
    if !config.is_identity() {
        let basis = layer_basis(store, layer, config.k)?;
        basis.apply_slice(&mut slice, config)?;
    }
    Ok(slice)
}
