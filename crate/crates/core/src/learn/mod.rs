//! Attack learners: per-bit tree ensembles, a parity-feature logistic model,
//! and multi-output neural models.

pub mod boosted;
pub mod config;
pub mod container;
pub mod forest;
pub mod gbnn;
pub mod gradcheck;
pub mod linear;
pub mod loss;
pub mod mlp;
pub mod perbit;
pub mod tree;

pub use boosted::{BoostParams, BoostedTrees, RegressionTree};
pub use config::{Family, LearnerConfig};
pub use forest::RandomForest;
pub use gbnn::{train_gbnn, GbnnEnsemble, GbnnStage};
pub use linear::{LogisticParams, ParityLogistic};
pub use perbit::{fit_per_bit, train_model, ModelSet};
pub use mlp::{train_mlp, Mlp, MlpSpec, OptimParams};
pub use tree::DecisionTree;
