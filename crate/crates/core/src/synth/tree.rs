//! Rooted trees over languages with branch lengths.

use crate::store::{DistanceMatrix, StoreError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Length of the edge to the parent; zero at the root.
    pub branch_length: f64,
    /// Leaf index into the language list.
    pub leaf: Option<usize>,
}

/// Arena-backed rooted tree. Leaves are numbered `0..n_leaves` and map to
/// languages in store order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhyloTree {
    nodes: Vec<TreeNode>,
    root: usize,
    leaf_nodes: Vec<usize>,
}

impl PhyloTree {
    /// Builds from an arena; `nodes[root]` must be the unique parentless node.
    pub fn from_nodes(nodes: Vec<TreeNode>, root: usize) -> Result<Self, StoreError> {
        let bad = |m: &str| StoreError::Invalid(format!("tree: {m}"));
        if root >= nodes.len() || nodes[root].parent.is_some() {
            return Err(bad("root has a parent or is out of range"));
        }
        let n_leaves = nodes.iter().filter(|n| n.leaf.is_some()).count();
        let mut leaf_nodes = vec![usize::MAX; n_leaves];
        for (i, node) in nodes.iter().enumerate() {
            if !node.branch_length.is_finite() || node.branch_length < 0.0 {
                return Err(bad("branch lengths must be finite and non-negative"));
            }
            if i != root && node.parent.is_none() {
                return Err(bad("more than one root"));
            }
            for &c in &node.children {
                if nodes.get(c).and_then(|n| n.parent) != Some(i) {
                    return Err(bad("child/parent links disagree"));
                }
            }
            match node.leaf {
                Some(l) if l < n_leaves && leaf_nodes[l] == usize::MAX => {
                    if !node.children.is_empty() {
                        return Err(bad("leaf with children"));
                    }
                    leaf_nodes[l] = i;
                }
                Some(_) => return Err(bad("leaf indices must be a permutation of 0..n")),
                None if node.children.is_empty() => return Err(bad("internal node without children")),
                None => {}
            }
        }
        let tree = Self {
            nodes,
            root,
            leaf_nodes,
        };
        // every node must be reachable from the root
        let mut seen = 0;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            seen += 1;
            if seen > tree.nodes.len() {
                return Err(bad("cycle"));
            }
            stack.extend(&tree.nodes[i].children);
        }
        if seen != tree.nodes.len() {
            return Err(bad("unreachable nodes"));
        }
        Ok(tree)
    }

    /// Random binary tree: repeatedly joins two random subtrees; branch
    /// lengths uniform in `[0.5, 1.5)`.
    pub fn random(n_leaves: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes: Vec<TreeNode> = (0..n_leaves)
            .map(|l| TreeNode {
                parent: None,
                children: Vec::new(),
                branch_length: 0.0,
                leaf: Some(l),
            })
            .collect();
        let mut active: Vec<usize> = (0..n_leaves).collect();
        while active.len() > 1 {
            let i = active.swap_remove(rng.random_range(0..active.len()));
            let j = active.swap_remove(rng.random_range(0..active.len()));
            let id = nodes.len();
            for c in [i, j] {
                nodes[c].parent = Some(id);
                nodes[c].branch_length = rng.random_range(0.5..1.5);
            }
            nodes.push(TreeNode {
                parent: None,
                children: vec![i, j],
                branch_length: 0.0,
                leaf: None,
            });
            active.push(id);
        }
        let root = active.first().copied().unwrap_or(0);
        Self::from_nodes(nodes, root).expect("generated tree is valid")
    }

    /// Balanced binary tree with unit branches; leaves in order.
    pub fn balanced(n_leaves: usize) -> Self {
        Self::two_clades_with(n_leaves, 0, 1.0)
    }

    /// Root with two balanced clades of `left` and `right` leaves, each
    /// hanging from a stem of length `stem`; all other branches are 1.
    pub fn two_clades(left: usize, right: usize, stem: f64) -> Self {
        Self::two_clades_with(left, right, stem)
    }

    fn two_clades_with(left: usize, right: usize, stem: f64) -> Self {
        let mut nodes = Vec::new();
        let root = if right == 0 {
            build_balanced(&mut nodes, 0, left)
        } else {
            let a = build_balanced(&mut nodes, 0, left);
            let b = build_balanced(&mut nodes, left, left + right);
            let id = nodes.len();
            for c in [a, b] {
                nodes[c].parent = Some(id);
                nodes[c].branch_length = stem;
            }
            nodes.push(TreeNode {
                parent: None,
                children: vec![a, b],
                branch_length: 0.0,
                leaf: None,
            });
            id
        };
        Self::from_nodes(nodes, root).expect("generated tree is valid")
    }

    pub fn n_leaves(&self) -> usize {
        self.leaf_nodes.len()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn leaf_node(&self, leaf: usize) -> usize {
        self.leaf_nodes[leaf]
    }

    /// Node ids from the root down to `node`, inclusive.
    pub fn path_from_root(&self, node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Branch-length distance from the root.
    pub fn depths(&self) -> Vec<f64> {
        let mut depth = vec![0.0; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            for &c in &self.nodes[i].children {
                depth[c] = depth[i] + self.nodes[c].branch_length;
                stack.push(c);
            }
        }
        depth
    }

    /// Mean root-to-leaf path length.
    pub fn mean_leaf_depth(&self) -> f64 {
        let depth = self.depths();
        let n = self.n_leaves().max(1) as f64;
        self.leaf_nodes.iter().map(|&i| depth[i]).sum::<f64>() / n
    }

    /// Clade index of each leaf at the given number of edges below the
    /// root. A leaf shallower than that forms its own clade. Clades are
    /// numbered in order of their first leaf.
    pub fn clades_at_depth(&self, edges: usize) -> Vec<usize> {
        let mut ids = std::collections::HashMap::new();
        (0..self.n_leaves())
            .map(|l| {
                let path = self.path_from_root(self.leaf_nodes[l]);
                let anchor = path[edges.min(path.len() - 1)];
                let next = ids.len();
                *ids.entry(anchor).or_insert(next)
            })
            .collect()
    }
}

fn build_balanced(nodes: &mut Vec<TreeNode>, lo: usize, hi: usize) -> usize {
    if hi - lo == 1 {
        nodes.push(TreeNode {
            parent: None,
            children: Vec::new(),
            branch_length: 0.0,
            leaf: Some(lo),
        });
        return nodes.len() - 1;
    }
    let mid = lo + (hi - lo).div_ceil(2);
    let a = build_balanced(nodes, lo, mid);
    let b = build_balanced(nodes, mid, hi);
    let id = nodes.len();
    for c in [a, b] {
        nodes[c].parent = Some(id);
        nodes[c].branch_length = 1.0;
    }
    nodes.push(TreeNode {
        parent: None,
        children: vec![a, b],
        branch_length: 0.0,
        leaf: None,
    });
    id
}

/// Leaf-to-leaf path lengths, labelled by `labels` (one per leaf).
pub fn tree_path_distances(tree: &PhyloTree, labels: Vec<String>) -> Result<DistanceMatrix, StoreError> {
    let n = tree.n_leaves();
    if labels.len() != n {
        return Err(StoreError::Invalid(format!(
            "{} labels for {n} leaves",
            labels.len()
        )));
    }
    let depth = tree.depths();
    let paths: Vec<Vec<usize>> = (0..n).map(|l| tree.path_from_root(tree.leaf_node(l))).collect();
    let mut values = vec![0.0; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let common = paths[a]
                .iter()
                .zip(&paths[b])
                .take_while(|(x, y)| x == y)
                .count();
            let lca = paths[a][common - 1];
            let d = depth[tree.leaf_node(a)] + depth[tree.leaf_node(b)] - 2.0 * depth[lca];
            values[a * n + b] = d;
            values[b * n + a] = d;
        }
    }
    DistanceMatrix::new(labels, values)
}
