//! Average-linkage (UPGMA) agglomerative clustering.
//!
//! Cluster ids follow the usual linkage convention: leaves are `0..n`, the
//! cluster formed by merge `i` is `n + i`.

use super::GeometryError;
use crate::store::DistanceMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Smaller of the two merged ids.
    pub a: usize,
    pub b: usize,
    pub height: f64,
    /// Leaves under the new cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    /// Leaf indices in depth-first order from the root, left child first.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.n_leaves();
        if self.merges.is_empty() {
            return (0..n).collect();
        }
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        while let Some(id) = stack.pop() {
            if id < n {
                out.push(id);
            } else {
                let m = &self.merges[id - n];
                stack.push(m.b);
                stack.push(m.a);
            }
        }
        out
    }

    /// Leaves under a cluster id.
    pub fn members(&self, id: usize) -> Vec<usize> {
        let n = self.n_leaves();
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            if id < n {
                out.push(id);
            } else {
                let m = &self.merges[id - n];
                stack.push(m.b);
                stack.push(m.a);
            }
        }
        out.sort_unstable();
        out
    }

    /// Cuts the tree into its two top-level clusters.
    pub fn root_split(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let root = self.merges.last()?;
        Some((self.members(root.a), self.members(root.b)))
    }
}

/// Naive `O(n³)` UPGMA. Ties go to the pair with the lowest slot indices, so
/// the result is fully determined by the input order.
pub fn upgma_cluster(matrix: &DistanceMatrix) -> Result<Dendrogram, GeometryError> {
    let n = matrix.len();
    if n < 2 {
        return Err(GeometryError::TooFewLeaves);
    }
    if matrix.values().iter().any(|x| !x.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    let mut d = matrix.values().to_vec();
    let mut id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);
    let mut last_height = f64::NEG_INFINITY;
    for step in 0..(n - 1) {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                let v = d[i * n + j];
                if best.is_none_or(|(_, _, b)| v < b) {
                    best = Some((i, j, v));
                }
            }
        }
        let (i, j, h) = best.expect("at least two active clusters");
        let height = h.max(last_height);
        last_height = height;
        let (si, sj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if active[k] && k != i && k != j {
                let v = (si * d[i * n + k] + sj * d[j * n + k]) / (si + sj);
                d[i * n + k] = v;
                d[k * n + i] = v;
            }
        }
        merges.push(Merge {
            a: id[i].min(id[j]),
            b: id[i].max(id[j]),
            height,
            size: size[i] + size[j],
        });
        active[j] = false;
        size[i] += size[j];
        id[i] = n + step;
    }
    Ok(Dendrogram {
        labels: matrix.labels().to_vec(),
        merges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, values: Vec<f64>) -> DistanceMatrix {
        DistanceMatrix::new((0..n).map(|i| format!("x{i}")).collect(), values).unwrap()
    }

    #[test]
    fn two_leaves() {
        let d = upgma_cluster(&matrix(2, vec![0.0, 2.5, 2.5, 0.0])).unwrap();
        assert_eq!(
            d.merges,
            vec![Merge {
                a: 0,
                b: 1,
                height: 2.5,
                size: 2
            }]
        );
    }

    #[test]
    fn three_leaves_by_hand() {
        let m = matrix(3, vec![0.0, 1.0, 4.0, 1.0, 0.0, 4.0, 4.0, 4.0, 0.0]);
        let d = upgma_cluster(&m).unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b, d.merges[0].height), (0, 1, 1.0));
        assert_eq!((d.merges[1].a, d.merges[1].b, d.merges[1].height), (2, 3, 4.0));
        assert_eq!(d.merges[1].size, 3);
        assert_eq!(d.leaf_order(), vec![2, 0, 1]);
    }

    #[test]
    fn ultrametric_tree_heights() {
        // ((0,1)@1,(2,3)@3)@8
        let v = vec![
            0.0, 1.0, 8.0, 8.0, //
            1.0, 0.0, 8.0, 8.0, //
            8.0, 8.0, 0.0, 3.0, //
            8.0, 8.0, 3.0, 0.0,
        ];
        let d = upgma_cluster(&matrix(4, v)).unwrap();
        let heights: Vec<f64> = d.merges.iter().map(|m| m.height).collect();
        assert_eq!(heights, vec![1.0, 3.0, 8.0]);
        let (l, r) = d.root_split().unwrap();
        assert_eq!((l, r), (vec![0, 1], vec![2, 3]));
    }

    #[test]
    fn too_few_leaves() {
        assert!(matches!(
            upgma_cluster(&matrix(1, vec![0.0])),
            Err(GeometryError::TooFewLeaves)
        ));
    }
}
