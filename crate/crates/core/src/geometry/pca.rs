//! Exact PCA through a symmetric eigendecomposition.
//!
//! The decomposition runs on whichever of the covariance (`dim × dim`) or
//! Gram (`n × n`) matrix is smaller; both give the same nonzero spectrum.

use super::GeometryError;
use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenvalues below this fraction of the largest one count as zero.
const RANK_TOLERANCE: f64 = 1e-12;

/// Full descending spectrum of the scatter matrix plus the leading axes.
#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    /// All eigenvalues of `XᵀX / (n − 1)`, descending, clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Unit axes for the leading nonzero eigenvalues.
    pub axes: Vec<Vec<f64>>,
}

/// Flips `v` so its largest-magnitude coordinate is positive (lowest index on ties).
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Principal axes of already-centred rows. Returns at most `count` axes and
/// never an axis for a zero-variance direction.
pub(crate) fn principal_axes(centered: &DMatrix<f64>, count: usize) -> Spectrum {
    let (n, dim) = centered.shape();
    let denom = (n.max(2) - 1) as f64;
    let (raw_values, axes_of) = if n >= dim {
        // the explicit transpose routes through the blocked matrix product;
        // `tr_mul` is a naive column-dot loop and ~20× slower at 1024 dims
        let mut cov = centered.transpose() * centered / denom;
        cov.fill_upper_triangle_with_lower_triangle();
        let (values, vectors) = sorted_eigen(cov);
        let take = count.min(values.len());
        let axes: Vec<Vec<f64>> = (0..take)
            .map(|i| vectors.column(i).iter().copied().collect())
            .collect();
        (values, axes)
    } else {
        let gram = centered * centered.transpose() / denom;
        let (values, vectors) = sorted_eigen(gram);
        let take = count.min(values.len());
        let axes: Vec<Vec<f64>> = (0..take)
            .map(|i| {
                let v = centered.tr_mul(&vectors.column(i).into_owned());
                let norm = v.norm();
                if norm > 0.0 {
                    (v / norm).iter().copied().collect()
                } else {
                    vec![0.0; dim]
                }
            })
            .collect();
        (values, axes)
    };
    let top = raw_values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = top * RANK_TOLERANCE;
    let eigenvalues: Vec<f64> = raw_values.iter().map(|&v| v.max(0.0)).collect();
    let axes = axes_of
        .into_iter()
        .zip(&eigenvalues)
        .take_while(|(_, &v)| top > 0.0 && v > cutoff)
        .map(|(mut a, _)| {
            canonical_sign(&mut a);
            a
        })
        .collect();
    Spectrum { eigenvalues, axes }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub mean: Vec<f64>,
    /// `n_components × dim`, orthonormal rows.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// `points × n_components`.
    pub projected: Vec<Vec<f64>>,
}

impl PcaResult {
    /// Coordinates of an arbitrary point in the fitted basis.
    pub fn transform(&self, point: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(point.iter().zip(&self.mean))
                    .map(|(w, (x, m))| w * (x - m))
                    .sum()
            })
            .collect()
    }
}

/// Projects points onto their leading principal components.
///
/// Components follow the sign convention of [`canonical_sign`], so results
/// are identical across runs.
pub fn pca_project(points: &[Vec<f64>], n_components: usize) -> Result<PcaResult, GeometryError> {
    let n = points.len();
    if n < 2 {
        return Err(GeometryError::TooFewRows { needed: 2, got: n });
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(GeometryError::DimMismatch(p.len(), dim));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let limit = (n - 1).min(dim);
    if n_components == 0 || n_components > limit {
        return Err(GeometryError::NComponents {
            requested: n_components,
            limit,
        });
    }
    let mean: Vec<f64> = (0..dim)
        .map(|j| crate::numeric::compensated_sum(points.iter().map(|p| p[j])) / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, dim, |i, j| points[i][j] - mean[j]);
    let spectrum = principal_axes(&centered, n_components);
    let total: f64 = crate::numeric::compensated_sum(spectrum.eigenvalues.iter().copied());
    if total <= 0.0 || spectrum.axes.is_empty() {
        return Err(GeometryError::IdenticalPoints);
    }
    let mut components = spectrum.axes;
    // Rank-deficient data: pad with zero-variance directions orthogonal to
    // the ones found so the requested dimensionality is honoured.
    while components.len() < n_components {
        components.push(orthogonal_complement_axis(&components, dim));
    }
    let explained_variance: Vec<f64> = (0..n_components)
        .map(|i| spectrum.eigenvalues.get(i).copied().unwrap_or(0.0))
        .collect();
    let explained_variance_ratio = explained_variance
        .iter()
        .map(|v| (v / total).clamp(0.0, 1.0))
        .collect();
    let mut result = PcaResult {
        mean,
        components,
        explained_variance,
        explained_variance_ratio,
        projected: Vec::new(),
    };
    result.projected = points.iter().map(|p| result.transform(p)).collect();
    Ok(result)
}

/// A unit vector orthogonal to `basis`, built by Gram–Schmidt from the
/// standard basis (first candidate that survives).
fn orthogonal_complement_axis(basis: &[Vec<f64>], dim: usize) -> Vec<f64> {
    for e in 0..dim {
        let mut v = vec![0.0; dim];
        v[e] = 1.0;
        for b in basis {
            let d: f64 = crate::numeric::dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = crate::numeric::norm(&v);
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            canonical_sign(&mut v);
            return v;
        }
    }
    vec![0.0; dim]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_points_have_one_component() {
        let points: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64, 0.5]).collect();
        let r = pca_project(&points, 1).unwrap();
        assert!((r.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        let s = 1.0 / 5f64.sqrt();
        assert!((r.components[0][0] - s).abs() < 1e-12);
        assert!((r.components[0][1] - 2.0 * s).abs() < 1e-12);
    }

    #[test]
    fn square_in_plane_of_dim_five() {
        let mut points = Vec::new();
        for (x, y) in [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0)] {
            // embedded in the plane spanned by (1,1,0,0,0)/√2 and (0,0,1,0,1)/√2
            let a = std::f64::consts::FRAC_1_SQRT_2;
            points.push(vec![x * a, x * a, y * a, 0.0, y * a]);
        }
        let r = pca_project(&points, 2).unwrap();
        let sum: f64 = r.explained_variance_ratio.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let same = vec![vec![1.0, 2.0]; 3];
        assert!(matches!(pca_project(&same, 1), Err(GeometryError::IdenticalPoints)));
        let two = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(matches!(
            pca_project(&two, 2),
            Err(GeometryError::NComponents { requested: 2, limit: 1 })
        ));
        assert!(pca_project(&two[..1], 1).is_err());
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.3];
        canonical_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
        let mut tie = vec![-0.5, 0.5];
        canonical_sign(&mut tie);
        assert_eq!(tie, vec![0.5, -0.5]);
    }

    #[test]
    fn rank_deficient_request_is_padded() {
        let points: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 0.0, 0.0]).collect();
        let r = pca_project(&points, 2).unwrap();
        assert_eq!(r.components.len(), 2);
        assert!(crate::numeric::dot(&r.components[0], &r.components[1]).abs() < 1e-12);
        assert_eq!(r.explained_variance_ratio[1], 0.0);
    }
}
