//! Bagged random forests of [`DecisionTree`]s.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, FeatureSubset};
use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::mix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    /// Seed each tree's bootstrap and feature draws came from.
    seeds: Vec<u64>,
}

/// Features considered per split: `ceil(sqrt(n_features))`.
pub fn subset_size(n_features: usize) -> usize {
    (n_features as f64).sqrt().ceil() as usize
}

impl RandomForest {
    /// Trains `n_trees` trees, tree `t` on a size-`N` bootstrap drawn from
    /// `child_seed(seed, t)`.
    pub fn fit(x: &BitMatrix, y: &[u8], n_trees: usize, max_depth: usize, seed: u64) -> Result<Self> {
        let mut forest = RandomForest { trees: Vec::new(), seeds: Vec::new() };
        for _ in 0..n_trees {
            forest.grow(x, y, max_depth, seed)?;
        }
        Ok(forest)
    }

    /// Adds the next tree of the sequence defined by `seed`.
    pub fn grow(&mut self, x: &BitMatrix, y: &[u8], max_depth: usize, seed: u64) -> Result<()> {
        let n = x.rows();
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let tree_seed = mix::child_seed(seed, self.trees.len() as u64);
        let mut rng = mix::rng(tree_seed);
        let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let subset = FeatureSubset { rng: &mut rng, k: subset_size(x.cols()) };
        let tree = DecisionTree::fit_indices(x, y, sample, max_depth, Some(subset))?;
        self.trees.push(tree);
        self.seeds.push(tree_seed);
        Ok(())
    }

    pub fn from_trees(trees: Vec<DecisionTree>) -> Self {
        let seeds = vec![0; trees.len()];
        RandomForest { trees, seeds }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Number of the first `n_trees` trees voting one.
    pub fn votes(&self, row: &[u8], n_trees: usize) -> usize {
        self.trees[..n_trees.min(self.trees.len())]
            .iter()
            .filter(|t| t.predict(row))
            .count()
    }

    /// Strict majority of the first `n_trees` trees; a tie predicts zero.
    pub fn predict_with(&self, row: &[u8], n_trees: usize) -> bool {
        let n = n_trees.min(self.trees.len());
        2 * self.votes(row, n) > n
    }

    pub fn predict(&self, row: &[u8]) -> bool {
        self.predict_with(row, self.trees.len())
    }

    pub fn predict_proba(&self, row: &[u8]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.votes(row, self.trees.len()) as f64 / self.trees.len() as f64
    }
}
