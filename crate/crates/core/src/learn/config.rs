use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kv::{parse_list, KvMap};
use crate::trace::StepAxis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Tree,
    Forest,
    BoostedTrees,
    Mlp,
    Gbnn,
    /// Logistic regression on arbiter parity features.
    Linear,
}

impl Family {
    /// The five attack learners of the standard comparison.
    pub const ALL: [Family; 5] = [
        Family::Mlp,
        Family::Gbnn,
        Family::BoostedTrees,
        Family::Tree,
        Family::Forest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Tree => "tree",
            Family::Forest => "forest",
            Family::BoostedTrees => "boosted-trees",
            Family::Mlp => "mlp",
            Family::Gbnn => "gbnn",
            Family::Linear => "linear",
        }
    }

    /// Report label used in summary tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Family::Tree => "DT",
            Family::Forest => "RF",
            Family::BoostedTrees => "XGBoost",
            Family::Mlp => "ANN",
            Family::Gbnn => "GBNN",
            Family::Linear => "LR",
        }
    }

    pub fn is_per_bit(self) -> bool {
        matches!(self, Family::Tree | Family::Forest | Family::BoostedTrees | Family::Linear)
    }

    pub fn step_axis(self) -> StepAxis {
        match self {
            Family::Tree => StepAxis::TreeDepth,
            Family::Forest => StepAxis::TreeCount,
            Family::BoostedTrees => StepAxis::BoostingRound,
            Family::Mlp => StepAxis::Epoch,
            Family::Gbnn => StepAxis::Stage,
            Family::Linear => StepAxis::Iteration,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .chain([Family::Linear])
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown learner family {s:?}")))
    }
}

pub const MAX_TREE_DEPTH: usize = 20;
pub const MAX_TREES: usize = 35;
pub const MAX_BOOST_ROUNDS: usize = 35;

pub const DESK_HIDDEN: [usize; 3] = [256, 128, 64];
pub const PAPER_HIDDEN: [usize; 6] = [5000, 2048, 1024, 512, 256, 64];
/// Seven hidden layers plus the output layer.
pub const GBNN_BASE_HIDDEN: [usize; 7] = [256, 256, 128, 128, 64, 64, 32];

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerConfig {
    pub family: Family,
    /// Maximum depth of per-bit trees and forest trees.
    pub tree_depth: usize,
    pub n_trees: usize,
    pub boost_rounds: usize,
    pub boost_tree_depth: usize,
    pub boost_shrinkage: f64,
    pub boost_lambda: f64,
    /// First capacity value of a sweep; the last is the family's capacity above.
    pub sweep_start: usize,
    pub mlp_hidden: Vec<usize>,
    pub leaky_slope: f64,
    pub dropout: f64,
    /// Number of leading hidden layers with batch norm and dropout.
    pub normalized_layers: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_step_epochs: usize,
    pub lr_gamma: f64,
    pub gbnn_stages: usize,
    pub gbnn_hidden: Vec<usize>,
    pub gbnn_learning_rate: f64,
    pub gbnn_weight_decay: f64,
    pub gbnn_epochs: usize,
    pub gbnn_stage_weight: f64,
    pub linear_iterations: usize,
    pub linear_learning_rate: f64,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn new(family: Family) -> Self {
        LearnerConfig {
            family,
            tree_depth: MAX_TREE_DEPTH,
            n_trees: MAX_TREES,
            boost_rounds: MAX_BOOST_ROUNDS,
            boost_tree_depth: 3,
            boost_shrinkage: 0.3,
            boost_lambda: 1.0,
            sweep_start: 1,
            mlp_hidden: DESK_HIDDEN.to_vec(),
            leaky_slope: 0.01,
            dropout: 0.2,
            normalized_layers: 3,
            learning_rate: 1e-3,
            weight_decay: 1e-4,
            epochs: 30,
            batch_size: 128,
            lr_step_epochs: 20,
            lr_gamma: 0.5,
            gbnn_stages: 10,
            gbnn_hidden: GBNN_BASE_HIDDEN.to_vec(),
            gbnn_learning_rate: 1e-2,
            gbnn_weight_decay: 1e-5,
            gbnn_epochs: 5,
            gbnn_stage_weight: 0.5,
            linear_iterations: 300,
            linear_learning_rate: 0.05,
            seed: 0,
        }
    }

    /// Paper-scale network: six hidden layers from 5000 down to 64, 100 epochs.
    pub fn paper_scale(mut self) -> Self {
        self.mlp_hidden = PAPER_HIDDEN.to_vec();
        self.epochs = 100;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Largest capacity value of this family (depth, tree count, rounds, epochs or stages).
    pub fn capacity(&self) -> usize {
        match self.family {
            Family::Tree => self.tree_depth,
            Family::Forest => self.n_trees,
            Family::BoostedTrees => self.boost_rounds,
            Family::Mlp => self.epochs,
            Family::Gbnn => self.gbnn_stages,
            Family::Linear => self.linear_iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let range = |name: &str, v: usize, lo: usize, hi: usize| {
            if v < lo || v > hi {
                Err(Error::InvalidConfig(format!("{name} must lie in [{lo}, {hi}], got {v}")))
            } else {
                Ok(())
            }
        };
        range("tree_depth", self.tree_depth, 1, MAX_TREE_DEPTH)?;
        range("n_trees", self.n_trees, 1, MAX_TREES)?;
        range("boost_rounds", self.boost_rounds, 1, MAX_BOOST_ROUNDS)?;
        range("boost_tree_depth", self.boost_tree_depth, 1, MAX_TREE_DEPTH)?;
        range("sweep_start", self.sweep_start, 1, self.capacity().max(1))?;
        if !(0.0..=1.0).contains(&self.boost_shrinkage) || self.boost_shrinkage == 0.0 {
            return Err(Error::InvalidConfig("boost_shrinkage must lie in (0, 1]".into()));
        }
        if self.boost_lambda.is_nan() || self.boost_lambda < 0.0 {
            return Err(Error::InvalidConfig("boost_lambda must be non-negative".into()));
        }
        if self.mlp_hidden.is_empty() || self.mlp_hidden.contains(&0) {
            return Err(Error::InvalidConfig("mlp_hidden must be non-empty positive sizes".into()));
        }
        if self.gbnn_hidden.is_empty() || self.gbnn_hidden.contains(&0) {
            return Err(Error::InvalidConfig("gbnn_hidden must be non-empty positive sizes".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!("dropout must lie in [0, 1), got {}", self.dropout)));
        }
        if self.family == Family::Linear && self.linear_iterations == 0 {
            return Err(Error::InvalidConfig("linear_iterations must be at least 1".into()));
        }
        for (name, lr) in [
            ("learning_rate", self.learning_rate),
            ("gbnn_learning_rate", self.gbnn_learning_rate),
            ("linear_learning_rate", self.linear_learning_rate),
        ] {
            if lr.is_nan() || lr <= 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {lr}")));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.lr_step_epochs == 0 || self.lr_gamma.is_nan() || self.lr_gamma <= 0.0 {
            return Err(Error::InvalidConfig("scheduler step and gamma must be positive".into()));
        }
        if self.family == Family::Mlp && self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.gbnn_epochs == 0 {
            return Err(Error::InvalidConfig("gbnn_epochs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvMap {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut kv = KvMap::default();
        kv.insert("family", self.family);
        kv.insert("tree_depth", self.tree_depth);
        kv.insert("n_trees", self.n_trees);
        kv.insert("boost_rounds", self.boost_rounds);
        kv.insert("boost_tree_depth", self.boost_tree_depth);
        kv.insert("boost_shrinkage", self.boost_shrinkage);
        kv.insert("boost_lambda", self.boost_lambda);
        kv.insert("sweep_start", self.sweep_start);
        kv.insert("mlp_hidden_sizes", list(&self.mlp_hidden));
        kv.insert("leaky_slope", self.leaky_slope);
        kv.insert("dropout_rate", self.dropout);
        kv.insert("normalized_layers", self.normalized_layers);
        kv.insert("learning_rate", self.learning_rate);
        kv.insert("weight_decay", self.weight_decay);
        kv.insert("epochs", self.epochs);
        kv.insert("batch_size", self.batch_size);
        kv.insert("lr_step_epochs", self.lr_step_epochs);
        kv.insert("lr_gamma", self.lr_gamma);
        kv.insert("gbnn_stages", self.gbnn_stages);
        kv.insert("gbnn_hidden_sizes", list(&self.gbnn_hidden));
        kv.insert("gbnn_learning_rate", self.gbnn_learning_rate);
        kv.insert("gbnn_weight_decay", self.gbnn_weight_decay);
        kv.insert("gbnn_epochs", self.gbnn_epochs);
        kv.insert("gbnn_stage_weight", self.gbnn_stage_weight);
        kv.insert("linear_iterations", self.linear_iterations);
        kv.insert("linear_learning_rate", self.linear_learning_rate);
        kv.insert("seed", self.seed);
        kv
    }

    /// Consumes learner keys from `kv`. Missing keys keep their defaults.
    pub fn from_kv(kv: &mut KvMap) -> Result<Self> {
        let family: Family = kv.take_required::<String>("family")?.parse()?;
        let mut c = LearnerConfig::new(family);
        c.tree_depth = kv.take_or("tree_depth", c.tree_depth)?;
        c.n_trees = kv.take_or("n_trees", c.n_trees)?;
        c.boost_rounds = kv.take_or("boost_rounds", c.boost_rounds)?;
        c.boost_tree_depth = kv.take_or("boost_tree_depth", c.boost_tree_depth)?;
        c.boost_shrinkage = kv.take_or("boost_shrinkage", c.boost_shrinkage)?;
        c.boost_lambda = kv.take_or("boost_lambda", c.boost_lambda)?;
        c.sweep_start = kv.take_or("sweep_start", c.sweep_start)?;
        if let Some(s) = kv.take::<String>("mlp_hidden_sizes")? {
            c.mlp_hidden = parse_list(&s)?;
        }
        c.leaky_slope = kv.take_or("leaky_slope", c.leaky_slope)?;
        c.dropout = kv.take_or("dropout_rate", c.dropout)?;
        c.normalized_layers = kv.take_or("normalized_layers", c.normalized_layers)?;
        c.learning_rate = kv.take_or("learning_rate", c.learning_rate)?;
        c.weight_decay = kv.take_or("weight_decay", c.weight_decay)?;
        c.epochs = kv.take_or("epochs", c.epochs)?;
        c.batch_size = kv.take_or("batch_size", c.batch_size)?;
        c.lr_step_epochs = kv.take_or("lr_step_epochs", c.lr_step_epochs)?;
        c.lr_gamma = kv.take_or("lr_gamma", c.lr_gamma)?;
        c.gbnn_stages = kv.take_or("gbnn_stages", c.gbnn_stages)?;
        if let Some(s) = kv.take::<String>("gbnn_hidden_sizes")? {
            c.gbnn_hidden = parse_list(&s)?;
        }
        c.gbnn_learning_rate = kv.take_or("gbnn_learning_rate", c.gbnn_learning_rate)?;
        c.gbnn_weight_decay = kv.take_or("gbnn_weight_decay", c.gbnn_weight_decay)?;
        c.gbnn_epochs = kv.take_or("gbnn_epochs", c.gbnn_epochs)?;
        c.gbnn_stage_weight = kv.take_or("gbnn_stage_weight", c.gbnn_stage_weight)?;
        c.linear_iterations = kv.take_or("linear_iterations", c.linear_iterations)?;
        c.linear_learning_rate = kv.take_or("linear_learning_rate", c.linear_learning_rate)?;
        c.seed = kv.take_or("seed", c.seed)?;
        c.validate()?;
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KvMap::parse(text)?;
        let c = Self::from_kv(&mut kv)?;
        kv.finish()?;
        Ok(c)
    }

    pub fn render(&self) -> String {
        self.to_kv().render()
    }
}
