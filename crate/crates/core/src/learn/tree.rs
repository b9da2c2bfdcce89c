//! CART classification trees on binary features, split by Gini impurity.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::error::{Error, Result};

/// Child index meaning "no child".
const LEAF: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Split feature, or `None` for a leaf.
    pub feature: Option<u32>,
    /// Child taken when the feature bit is 0.
    pub left: u32,
    /// Child taken when the feature bit is 1.
    pub right: u32,
    /// Empirical probability of a one among the node's training samples.
    pub prob: f64,
    pub depth: u16,
}

/// A binary classification tree. Internal nodes keep their own empirical
/// probability so the tree can be read at any shallower depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
}

/// Per-split feature subsampling for randomized trees.
pub(crate) struct FeatureSubset<'r, R: Rng> {
    pub rng: &'r mut R,
    pub k: usize,
}

/// Impurity of a split as an exact fraction `num / den`, proportional to the
/// size-weighted Gini impurity of the two children.
#[derive(Clone, Copy)]
struct SplitScore {
    num: u128,
    den: u128,
}

impl SplitScore {
    fn new(n_left: u64, ones_left: u64, n_right: u64, ones_right: u64) -> Self {
        let gl = (ones_left * (n_left - ones_left)) as u128;
        let gr = (ones_right * (n_right - ones_right)) as u128;
        SplitScore {
            num: gl * n_right as u128 + gr * n_left as u128,
            den: n_left as u128 * n_right as u128,
        }
    }

    fn lt(self, other: SplitScore) -> bool {
        self.num * other.den < other.num * self.den
    }
}

impl DecisionTree {
    /// Grows a tree greedily to at most `max_depth`.
    ///
    /// A node becomes a leaf when it reaches `max_depth`, is pure, or no
    /// feature separates its samples. Otherwise it splits on the feature with
    /// the lowest weighted child Gini impurity, ties going to the lowest
    /// feature index.
    pub fn fit(x: &BitMatrix, y: &[u8], max_depth: usize) -> Result<Self> {
        let indices: Vec<usize> = (0..x.rows()).collect();
        Self::fit_indices::<rand_chacha::ChaCha8Rng>(x, y, indices, max_depth, None)
    }

    pub(crate) fn fit_indices<R: Rng>(
        x: &BitMatrix,
        y: &[u8],
        indices: Vec<usize>,
        max_depth: usize,
        mut subset: Option<FeatureSubset<'_, R>>,
    ) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::ShapeMismatch(format!("{} rows but {} labels", x.rows(), y.len())));
        }
        if indices.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let n_features = x.cols();
        let mut nodes = Vec::new();
        let mut n1 = vec![0u64; n_features];
        let mut a1 = vec![0u64; n_features];
        // (node id, sample indices)
        let mut stack = vec![(0usize, indices)];
        nodes.push(TreeNode { feature: None, left: LEAF, right: LEAF, prob: 0.0, depth: 0 });

        while let Some((id, idx)) = stack.pop() {
            let n = idx.len() as u64;
            let ones: u64 = idx.iter().map(|&i| y[i] as u64).sum();
            nodes[id].prob = ones as f64 / n as f64;
            let depth = nodes[id].depth as usize;
            if depth >= max_depth || ones == 0 || ones == n {
                continue;
            }

            n1.iter_mut().for_each(|v| *v = 0);
            a1.iter_mut().for_each(|v| *v = 0);
            for &i in &idx {
                let yi = y[i] as u64;
                for (f, &b) in x.row(i).iter().enumerate() {
                    n1[f] += b as u64;
                    a1[f] += (b as u64) & yi;
                }
            }
            let best_among = |features: &mut dyn Iterator<Item = usize>| {
                let mut best: Option<(usize, SplitScore)> = None;
                for f in features {
                    if n1[f] == 0 || n1[f] == n {
                        continue;
                    }
                    let score = SplitScore::new(n - n1[f], ones - a1[f], n1[f], a1[f]);
                    match best {
                        Some((bf, bs)) if !(score.lt(bs) || (!bs.lt(score) && f < bf)) => {}
                        _ => best = Some((f, score)),
                    }
                }
                best.map(|(f, _)| f)
            };
            let chosen = match subset.as_mut() {
                Some(sub) if sub.k < n_features => {
                    let picked = index::sample(&mut *sub.rng, n_features, sub.k).into_vec();
                    best_among(&mut picked.iter().copied()).or_else(|| {
                        // none of the drawn features separates the node: widen to all
                        best_among(&mut (0..n_features))
                    })
                }
                _ => best_among(&mut (0..n_features)),
            };
            let Some(feature) = chosen else { continue };

            let (right_idx, left_idx): (Vec<usize>, Vec<usize>) =
                idx.into_iter().partition(|&i| x.get(i, feature) == 1);
            let child_depth = (depth + 1) as u16;
            let left = nodes.len();
            nodes.push(TreeNode { feature: None, left: LEAF, right: LEAF, prob: 0.0, depth: child_depth });
            let right = nodes.len();
            nodes.push(TreeNode { feature: None, left: LEAF, right: LEAF, prob: 0.0, depth: child_depth });
            nodes[id].feature = Some(feature as u32);
            nodes[id].left = left as u32;
            nodes[id].right = right as u32;
            stack.push((right, right_idx));
            stack.push((left, left_idx));
        }
        Ok(DecisionTree { nodes })
    }

    /// A single-leaf tree predicting `prob`.
    pub fn constant(prob: f64) -> Self {
        DecisionTree {
            nodes: vec![TreeNode { feature: None, left: LEAF, right: LEAF, prob, depth: 0 }],
        }
    }

    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("tree has no nodes".into()));
        }
        for n in &nodes {
            if n.feature.is_some() && (n.left as usize >= nodes.len() || n.right as usize >= nodes.len()) {
                return Err(Error::InvalidArgument("tree child index out of range".into()));
            }
        }
        Ok(DecisionTree { nodes })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Depth of the deepest node.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth as usize).max().unwrap_or(0)
    }

    pub fn predict_proba(&self, row: &[u8]) -> f64 {
        self.predict_proba_at_depth(row, usize::MAX)
    }

    /// Probability read from the node reached after at most `depth` splits.
    pub fn predict_proba_at_depth(&self, row: &[u8], depth: usize) -> f64 {
        let mut node = &self.nodes[0];
        while let Some(f) = node.feature {
            if node.depth as usize >= depth {
                break;
            }
            let next = if row[f as usize] == 1 { node.right } else { node.left };
            node = &self.nodes[next as usize];
        }
        node.prob
    }

    pub fn predict(&self, row: &[u8]) -> bool {
        self.predict_proba(row) > 0.5
    }

    pub fn predict_at_depth(&self, row: &[u8], depth: usize) -> bool {
        self.predict_proba_at_depth(row, depth) > 0.5
    }
}
