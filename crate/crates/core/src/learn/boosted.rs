//! Gradient-boosted regression trees for one binary target under logistic loss.

use serde::{Deserialize, Serialize};

use super::loss::{bce_with_logits_term, clamped_logit, sigmoid};
use crate::bits::BitMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegNode {
    pub feature: Option<u32>,
    pub left: u32,
    pub right: u32,
    /// Newton leaf weight, before shrinkage.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<RegNode>,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[RegNode] {
        &self.nodes
    }

    pub fn from_nodes(nodes: Vec<RegNode>) -> Result<Self> {
        if nodes.is_empty()
            || nodes.iter().any(|n| {
                n.feature.is_some() && (n.left as usize >= nodes.len() || n.right as usize >= nodes.len())
            })
        {
            return Err(Error::InvalidArgument("malformed regression tree".into()));
        }
        Ok(RegressionTree { nodes })
    }

    pub fn predict(&self, row: &[u8]) -> f64 {
        let mut node = &self.nodes[0];
        while let Some(f) = node.feature {
            node = &self.nodes[if row[f as usize] == 1 { node.right } else { node.left } as usize];
        }
        node.weight
    }

    /// Fits gradients `grad` (negative loss gradient) with hessians `hess`.
    ///
    /// Splits maximize `G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)` and are taken
    /// only when that gain is positive; leaves hold `G / (H + l)`.
    fn fit(x: &BitMatrix, grad: &[f64], hess: &[f64], max_depth: usize, lambda: f64) -> Self {
        let n_features = x.cols();
        let score = |g: f64, h: f64| g * g / (h + lambda);
        let mut nodes = vec![RegNode { feature: None, left: 0, right: 0, weight: 0.0 }];
        let mut stack: Vec<(usize, usize, Vec<usize>)> = vec![(0, 0, (0..x.rows()).collect())];
        let mut g1 = vec![0.0; n_features];
        let mut h1 = vec![0.0; n_features];
        let mut c1 = vec![0usize; n_features];
        while let Some((id, depth, idx)) = stack.pop() {
            let (g, h) = idx.iter().fold((0.0, 0.0), |(g, h), &i| (g + grad[i], h + hess[i]));
            nodes[id].weight = g / (h + lambda);
            if depth >= max_depth || idx.len() < 2 {
                continue;
            }
            g1.iter_mut().for_each(|v| *v = 0.0);
            h1.iter_mut().for_each(|v| *v = 0.0);
            c1.iter_mut().for_each(|v| *v = 0);
            for &i in &idx {
                for (f, &b) in x.row(i).iter().enumerate() {
                    if b == 1 {
                        g1[f] += grad[i];
                        h1[f] += hess[i];
                        c1[f] += 1;
                    }
                }
            }
            let parent = score(g, h);
            let mut best: Option<(usize, f64)> = None;
            for f in 0..n_features {
                if c1[f] == 0 || c1[f] == idx.len() {
                    continue;
                }
                let gain = score(g - g1[f], h - h1[f]) + score(g1[f], h1[f]) - parent;
                if gain > 0.0 && best.is_none_or(|(_, b)| gain > b) {
                    best = Some((f, gain));
                }
            }
            let Some((feature, _)) = best else { continue };
            let (right_idx, left_idx): (Vec<usize>, Vec<usize>) =
                idx.into_iter().partition(|&i| x.get(i, feature) == 1);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(RegNode { feature: None, left: 0, right: 0, weight: 0.0 });
            nodes.push(RegNode { feature: None, left: 0, right: 0, weight: 0.0 });
            nodes[id].feature = Some(feature as u32);
            nodes[id].left = left as u32;
            nodes[id].right = right as u32;
            stack.push((right, depth + 1, right_idx));
            stack.push((left, depth + 1, left_idx));
        }
        RegressionTree { nodes }
    }
}

/// Staged additive model: `F_t(x) = F_0 + shrinkage * sum_{s<=t} tree_s(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    pub base_score: f64,
    pub shrinkage: f64,
    trees: Vec<RegressionTree>,
    /// Mean training logistic loss after each round; entry 0 is the loss of `F_0`.
    train_losses: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct BoostParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    pub lambda: f64,
}

fn mean_loss(scores: &[f64], y: &[u8]) -> f64 {
    scores.iter().zip(y).map(|(&z, &t)| bce_with_logits_term(z, t as f64)).sum::<f64>() / y.len() as f64
}

impl BoostedTrees {
    pub fn fit(x: &BitMatrix, y: &[u8], params: BoostParams) -> Result<Self> {
        let mut model = Self::init(x, y, params.shrinkage)?;
        let mut scores = vec![model.base_score; y.len()];
        for _ in 0..params.rounds {
            if !model.boost_round(x, y, &mut scores, params)? {
                break;
            }
        }
        Ok(model)
    }

    /// `F_0` = logit of the clamped training mean, no trees.
    pub fn init(x: &BitMatrix, y: &[u8], shrinkage: f64) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if x.rows() != y.len() {
            return Err(Error::ShapeMismatch(format!("{} rows but {} labels", x.rows(), y.len())));
        }
        let mean = y.iter().map(|&v| v as f64).sum::<f64>() / y.len() as f64;
        let base_score = clamped_logit(mean);
        Ok(BoostedTrees {
            base_score,
            shrinkage,
            trees: Vec::new(),
            train_losses: vec![mean_loss(&vec![base_score; y.len()], y)],
        })
    }

    /// Adds one tree, updating the running training `scores`. Returns `false`
    /// without adding anything when the labels are constant.
    pub fn boost_round(&mut self, x: &BitMatrix, y: &[u8], scores: &mut [f64], params: BoostParams) -> Result<bool> {
        if y.iter().all(|&v| v == y[0]) {
            return Ok(false);
        }
        let (grad, hess): (Vec<f64>, Vec<f64>) = scores
            .iter()
            .zip(y)
            .map(|(&z, &t)| {
                let p = sigmoid(z);
                (t as f64 - p, p * (1.0 - p))
            })
            .unzip();
        let tree = RegressionTree::fit(x, &grad, &hess, params.max_depth, params.lambda);
        for (i, s) in scores.iter_mut().enumerate() {
            *s += self.shrinkage * tree.predict(x.row(i));
        }
        self.trees.push(tree);
        self.train_losses.push(mean_loss(scores, y));
        Ok(true)
    }

    pub fn from_parts(base_score: f64, shrinkage: f64, trees: Vec<RegressionTree>) -> Self {
        BoostedTrees { base_score, shrinkage, trees, train_losses: Vec::new() }
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn train_losses(&self) -> &[f64] {
        &self.train_losses
    }

    /// Score using only the first `rounds` trees.
    pub fn score_at(&self, row: &[u8], rounds: usize) -> f64 {
        self.base_score
            + self.shrinkage
                * self.trees[..rounds.min(self.trees.len())]
                    .iter()
                    .map(|t| t.predict(row))
                    .sum::<f64>()
    }

    pub fn score(&self, row: &[u8]) -> f64 {
        self.score_at(row, self.trees.len())
    }

    pub fn predict(&self, row: &[u8]) -> bool {
        self.score(row) > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mix;
    use rand::Rng;

    fn params(rounds: usize) -> BoostParams {
        BoostParams { rounds, max_depth: 3, shrinkage: 0.3, lambda: 1.0 }
    }

    #[test]
    fn constant_labels_need_no_trees() {
        let x = BitMatrix::zeros(10, 4);
        let m = BoostedTrees::fit(&x, &[1; 10], params(5)).unwrap();
        assert!(m.trees().is_empty());
        assert!(m.base_score > 0.0);
        assert!((0..10).all(|i| m.predict(x.row(i))));
        let m0 = BoostedTrees::fit(&x, &[0; 10], params(5)).unwrap();
        assert!(m0.base_score < 0.0);
    }

    #[test]
    fn staged_scores_match_recorded_losses() {
        let mut rng = mix::rng(4);
        let data: Vec<u8> = (0..300 * 10).map(|_| rng.random_range(0..2u8)).collect();
        let x = BitMatrix::from_vec(300, 10, data).unwrap();
        let y: Vec<u8> = (0..300).map(|i| x.get(i, 0) ^ (x.get(i, 1) & x.get(i, 2))).collect();
        let m = BoostedTrees::fit(&x, &y, params(12)).unwrap();
        assert_eq!(m.train_losses().len(), m.trees().len() + 1);
        for t in 0..=m.trees().len() {
            let s: Vec<f64> = (0..300).map(|i| m.score_at(x.row(i), t)).collect();
            assert!((mean_loss(&s, &y) - m.train_losses()[t]).abs() < 1e-12);
        }
        let acc = (0..300).filter(|&i| m.predict(x.row(i)) == (y[i] == 1)).count();
        assert_eq!(acc, 300);
    }

    #[test]
    fn empty_set() {
        assert!(matches!(
            BoostedTrees::fit(&BitMatrix::zeros(0, 3), &[], params(1)),
            Err(Error::EmptyTrainingSet)
        ));
    }
}
