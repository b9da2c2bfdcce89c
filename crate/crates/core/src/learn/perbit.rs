//! One model per response bit for the tree families, a single multi-output
//! model for the neural families, and capacity sweeps over both.

use serde::{Deserialize, Serialize};

use super::boosted::{BoostParams, BoostedTrees};
use super::config::{Family, LearnerConfig};
use super::forest::RandomForest;
use super::gbnn::{train_gbnn, GbnnEnsemble};
use super::linear::{dot, row_features, LogisticParams, ParityLogistic};
use super::mlp::{train_mlp, Mlp};
use super::tree::DecisionTree;
use crate::bits::{BitMatrix, Challenge, Response};
use crate::dataset::SplitDataset;
use crate::error::{Error, Result};
use crate::mix;
use crate::trace::TrainingTrace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "models", rename_all = "kebab-case")]
pub enum ModelSet {
    Tree(Vec<DecisionTree>),
    Forest(Vec<RandomForest>),
    BoostedTrees(Vec<BoostedTrees>),
    Mlp(Mlp),
    Gbnn(GbnnEnsemble),
    Linear(Vec<ParityLogistic>),
}

impl ModelSet {
    pub fn family(&self) -> Family {
        match self {
            ModelSet::Tree(_) => Family::Tree,
            ModelSet::Forest(_) => Family::Forest,
            ModelSet::BoostedTrees(_) => Family::BoostedTrees,
            ModelSet::Mlp(_) => Family::Mlp,
            ModelSet::Gbnn(_) => Family::Gbnn,
            ModelSet::Linear(_) => Family::Linear,
        }
    }

    pub fn challenge_bits(&self) -> Option<usize> {
        match self {
            ModelSet::Mlp(m) => Some(m.inputs()),
            ModelSet::Linear(v) => v.first().map(|m| m.weights().len() - 1),
            ModelSet::Gbnn(g) => g.stages.first().map(|s| s.learner.inputs()),
            _ => None,
        }
    }

    pub fn response_bits(&self) -> usize {
        match self {
            ModelSet::Tree(v) => v.len(),
            ModelSet::Forest(v) => v.len(),
            ModelSet::BoostedTrees(v) => v.len(),
            ModelSet::Mlp(m) => m.outputs(),
            ModelSet::Gbnn(g) => g.f0.len(),
            ModelSet::Linear(v) => v.len(),
        }
    }

    fn predict_bit(&self, j: usize, row: &[u8]) -> bool {
        match self {
            ModelSet::Tree(v) => v[j].predict(row),
            ModelSet::Forest(v) => v[j].predict(row),
            ModelSet::BoostedTrees(v) => v[j].predict(row),
            ModelSet::Linear(v) => v[j].predict_row(row),
            ModelSet::Mlp(_) | ModelSet::Gbnn(_) => unreachable!("multi-output models predict whole rows"),
        }
    }

    /// Predicted responses for every row of `x`.
    pub fn predict_matrix(&self, x: &BitMatrix) -> Result<BitMatrix> {
        if let Some(n_c) = self.challenge_bits() {
            if x.cols() != n_c {
                return Err(Error::WidthMismatch { expected: n_c, actual: x.cols() });
            }
        }
        match self {
            ModelSet::Mlp(m) => m.predict_bits(x),
            ModelSet::Gbnn(g) => g.predict_bits(x),
            _ => {
                let n_r = self.response_bits();
                let mut out = BitMatrix::zeros(x.rows(), n_r);
                for i in 0..x.rows() {
                    for j in 0..n_r {
                        out.set(i, j, self.predict_bit(j, x.row(i)));
                    }
                }
                Ok(out)
            }
        }
    }

    /// Bit `j` of the result is model `j`'s thresholded prediction.
    pub fn predict_response(&self, challenge: &Challenge) -> Result<Response> {
        let x = BitMatrix::from_rows(challenge.len(), [challenge])?;
        Ok(self.predict_matrix(&x)?.row_vector(0))
    }
}

/// Correct-bit counts on one partition at each sweep step.
struct Tally {
    correct: Vec<u64>,
    total: u64,
}

impl Tally {
    fn new(steps: usize) -> Self {
        Tally { correct: vec![0; steps], total: 0 }
    }

    fn accuracy(&self, step: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.correct[step] as f64 / self.total as f64
    }
}

fn trace_from(config: &LearnerConfig, steps: usize, train: &Tally, val: &Tally) -> Result<TrainingTrace> {
    let mut trace = TrainingTrace::new(config.family.step_axis());
    let start = config.sweep_start.max(1);
    for s in start..=steps {
        let ta = train.accuracy(s - 1);
        let va = if val.total == 0 { ta } else { val.accuracy(s - 1) };
        trace.push(s, ta, va)?;
    }
    Ok(trace)
}

/// Adds, for each sample and each capacity step `1..=steps`, whether
/// `predict(row, step)` matches the label.
fn tally<F>(tally: &mut Tally, x: &BitMatrix, y: &[u8], steps: usize, mut correct_at: F)
where
    F: FnMut(&[u8], u8, &mut [u64]),
{
    for (i, &label) in y.iter().enumerate() {
        correct_at(x.row(i), label, &mut tally.correct[..steps]);
    }
    tally.total += y.len() as u64;
}

/// Trains one model per response bit and sweeps capacity from
/// `config.sweep_start` up to the configured maximum: tree depth (one deep
/// tree read at each truncation depth), tree count (one forest read with its
/// first `t` trees) or boosting rounds (staged scores).
///
/// Bit `j` uses seed `child_seed(config.seed, j)` and sees only column `j`.
pub fn fit_per_bit(split: &SplitDataset, config: &LearnerConfig) -> Result<(ModelSet, TrainingTrace)> {
    if !config.family.is_per_bit() {
        return Err(Error::InvalidArgument(format!("{} is not a per-bit family", config.family)));
    }
    config.validate()?;
    if split.train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let x = split.train.challenge_matrix();
    let y = split.train.response_matrix();
    let xv = split.validation.challenge_matrix();
    let yv = split.validation.response_matrix();
    let n_r = y.cols();
    let steps = config.capacity();
    let mut tt = Tally::new(steps);
    let mut tv = Tally::new(steps);

    let set = match config.family {
        Family::Tree => {
            let mut models = Vec::with_capacity(n_r);
            for j in 0..n_r {
                let (yj, yvj) = (y.column(j), yv.column(j));
                let tree = DecisionTree::fit(&x, &yj, config.tree_depth)?;
                let score = |row: &[u8], label: u8, c: &mut [u64]| {
                    for (d, slot) in c.iter_mut().enumerate() {
                        *slot += u64::from(tree.predict_at_depth(row, d + 1) == (label == 1));
                    }
                };
                tally(&mut tt, &x, &yj, steps, score);
                tally(&mut tv, &xv, &yvj, steps, score);
                models.push(tree);
            }
            ModelSet::Tree(models)
        }
        Family::Forest => {
            let mut models = Vec::with_capacity(n_r);
            for j in 0..n_r {
                let (yj, yvj) = (y.column(j), yv.column(j));
                let forest = RandomForest::fit(&x, &yj, config.n_trees, config.tree_depth, mix::child_seed(config.seed, j as u64))?;
                let score = |row: &[u8], label: u8, c: &mut [u64]| {
                    let mut votes = 0;
                    for (t, slot) in c.iter_mut().enumerate() {
                        votes += usize::from(forest.trees()[t].predict(row));
                        // ties go to 0
                        *slot += u64::from((2 * votes > t + 1) == (label == 1));
                    }
                };
                tally(&mut tt, &x, &yj, steps, score);
                tally(&mut tv, &xv, &yvj, steps, score);
                models.push(forest);
            }
            ModelSet::Forest(models)
        }
        Family::BoostedTrees => {
            let params = BoostParams {
                rounds: config.boost_rounds,
                max_depth: config.boost_tree_depth,
                shrinkage: config.boost_shrinkage,
                lambda: config.boost_lambda,
            };
            let mut models = Vec::with_capacity(n_r);
            for j in 0..n_r {
                let (yj, yvj) = (y.column(j), yv.column(j));
                let model = BoostedTrees::fit(&x, &yj, params)?;
                let score = |row: &[u8], label: u8, c: &mut [u64]| {
                    let mut s = model.base_score;
                    for (t, slot) in c.iter_mut().enumerate() {
                        if let Some(tree) = model.trees().get(t) {
                            s += model.shrinkage * tree.predict(row);
                        }
                        *slot += u64::from((s > 0.0) == (label == 1));
                    }
                };
                tally(&mut tt, &x, &yj, steps, score);
                tally(&mut tv, &xv, &yvj, steps, score);
                models.push(model);
            }
            ModelSet::BoostedTrees(models)
        }
        Family::Linear => {
            let params = LogisticParams { iterations: config.linear_iterations, learning_rate: config.linear_learning_rate };
            let phi: Vec<Vec<f64>> = (0..x.rows()).map(|i| row_features(x.row(i))).collect();
            let phi_v: Vec<Vec<f64>> = (0..xv.rows()).map(|i| row_features(xv.row(i))).collect();
            let mut models = Vec::with_capacity(n_r);
            for j in 0..n_r {
                let (yj, yvj) = (y.column(j), yv.column(j));
                let labels: Vec<bool> = yj.iter().map(|&b| b == 1).collect();
                let model = ParityLogistic::fit_features(&phi, &labels, params, |t, w| {
                    let hits = |f: &[Vec<f64>], y: &[u8]| {
                        f.iter().zip(y).filter(|(p, &l)| (dot(p, w) > 0.0) == (l == 1)).count() as u64
                    };
                    tt.correct[t - 1] += hits(&phi, &yj);
                    tv.correct[t - 1] += hits(&phi_v, &yvj);
                })?;
                tt.total += yj.len() as u64;
                tv.total += yvj.len() as u64;
                models.push(model);
            }
            ModelSet::Linear(models)
        }
        Family::Mlp | Family::Gbnn => unreachable!("checked above"),
    };
    let trace = trace_from(config, steps, &tt, &tv)?;
    Ok((set, trace))
}

/// Routes to the per-bit trainer or to the multi-output neural trainers.
pub fn train_model(split: &SplitDataset, config: &LearnerConfig) -> Result<(ModelSet, TrainingTrace)> {
    config.validate()?;
    match config.family {
        Family::Mlp => {
            let (m, trace) = train_mlp(&split.train, &split.validation, config)?;
            Ok((ModelSet::Mlp(m), trace))
        }
        Family::Gbnn => {
            let (g, trace) = train_gbnn(&split.train, &split.validation, config)?;
            Ok((ModelSet::Gbnn(g), trace))
        }
        _ => fit_per_bit(split, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::dataset::{split, Crp, CrpDataset};
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn dataset(seed: u64, n: usize, n_c: usize, n_r: usize) -> CrpDataset {
        let mut rng = mix::rng(seed);
        let records = (0..n)
            .map(|i| {
                let challenge = BitVector::from_u64(i as u64, n_c);
                let bits: Vec<bool> = (0..n_r).map(|_| rng.random::<bool>()).collect();
                Crp { challenge, response: BitVector::from_bools(&bits) }
            })
            .collect();
        CrpDataset::new(n_c, n_r, records).unwrap()
    }

    fn small(family: Family) -> LearnerConfig {
        LearnerConfig { tree_depth: 12, n_trees: 9, boost_rounds: 35, boost_tree_depth: 12, ..LearnerConfig::new(family) }
    }

    #[test]
    fn constant_stub_models_give_all_ones() {
        let set = ModelSet::Tree(vec![DecisionTree::constant(1.0); 32]);
        let r = set.predict_response(&BitVector::zeros(16)).unwrap();
        assert_eq!(r.count_ones(), 32);
    }

    #[test]
    fn distinct_challenges_are_memorized() {
        let ds = dataset(1, 300, 9, 4);
        let s = split(&ds, 2).unwrap();
        for family in [Family::Tree, Family::Forest, Family::BoostedTrees] {
            let (set, trace) = fit_per_bit(&s, &small(family)).unwrap();
            assert_eq!(trace.len(), small(family).capacity());
            if family != Family::Forest {
                assert_eq!(trace.last().unwrap().train_accuracy, 1.0, "{family}");
                let pred = set.predict_matrix(&s.train.challenge_matrix()).unwrap();
                assert_eq!(pred, s.train.response_matrix());
                for rec in s.train.records() {
                    assert_eq!(set.predict_response(&rec.challenge).unwrap(), rec.response);
                }
            }
        }
    }

    #[test]
    fn trace_matches_final_model() {
        let ds = dataset(3, 200, 8, 3);
        let s = split(&ds, 4).unwrap();
        for family in [Family::Tree, Family::Forest, Family::BoostedTrees] {
            let (set, trace) = fit_per_bit(&s, &small(family)).unwrap();
            let pred = set.predict_matrix(&s.validation.challenge_matrix()).unwrap();
            let truth = s.validation.response_matrix();
            let hits = pred.as_slice().iter().zip(truth.as_slice()).filter(|(a, b)| a == b).count();
            let acc = hits as f64 / truth.as_slice().len() as f64;
            assert_eq!(trace.last().unwrap().validation_accuracy, acc, "{family}");
        }
    }

    #[test]
    fn bits_are_trained_independently() {
        let ds = dataset(5, 150, 10, 3);
        let mut rng = mix::rng(6);
        let mut permuted: Vec<usize> = (0..ds.len()).collect();
        permuted.shuffle(&mut rng);
        let records = ds
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut resp = r.response.clone();
                resp.set(2, ds.records()[permuted[i]].response.get(2));
                Crp { challenge: r.challenge.clone(), response: resp }
            })
            .collect();
        let other = CrpDataset::new(10, 3, records).unwrap();
        let (a, b) = (split(&ds, 1).unwrap(), split(&other, 1).unwrap());
        let probe = BitMatrix::from_rows(10, (0..200).map(|_| BitVector::random(&mut rng, 10)).collect::<Vec<_>>().iter()).unwrap();
        for family in [Family::Tree, Family::Forest, Family::BoostedTrees] {
            let pa = fit_per_bit(&a, &small(family)).unwrap().0.predict_matrix(&probe).unwrap();
            let pb = fit_per_bit(&b, &small(family)).unwrap().0.predict_matrix(&probe).unwrap();
            for j in 0..2 {
                assert_eq!(pa.column(j), pb.column(j), "{family} bit {j}");
            }
        }
    }

    #[test]
    fn agrees_with_individual_models() {
        let ds = dataset(8, 200, 12, 5);
        let s = split(&ds, 9).unwrap();
        let (set, _) = fit_per_bit(&s, &small(Family::BoostedTrees)).unwrap();
        let ModelSet::BoostedTrees(models) = &set else { panic!() };
        let mut rng = mix::rng(10);
        for _ in 0..1000 {
            let c = BitVector::random(&mut rng, 12);
            let row: Vec<u8> = c.iter().map(u8::from).collect();
            let r = set.predict_response(&c).unwrap();
            for (j, m) in models.iter().enumerate() {
                assert_eq!(r.get(j), m.predict(&row));
            }
        }
    }

    #[test]
    fn linear_learner_attacks_an_arbiter() {
        use crate::dataset::generate;
        use crate::puf::{PufConfig, PufInstance, Variant};
        let puf = PufInstance::create(&PufConfig::new(Variant::Arbiter, 3).with_widths(16, 1)).unwrap();
        let s = split(&generate(&puf, 3000, 4).unwrap(), 5).unwrap();
        let cfg = LearnerConfig { linear_iterations: 100, ..LearnerConfig::new(Family::Linear) };
        let (set, trace) = fit_per_bit(&s, &cfg).unwrap();
        assert_eq!(trace.len(), 100);
        let pred = set.predict_matrix(&s.test.challenge_matrix()).unwrap();
        let acc = crate::metrics::bitwise_accuracy(&pred, &s.test.response_matrix()).unwrap().value();
        assert!(acc > 0.95, "{acc}");
    }

    #[test]
    fn single_bit_and_family_mismatch() {
        let ds = dataset(2, 50, 6, 1);
        let s = split(&ds, 1).unwrap();
        let (set, _) = fit_per_bit(&s, &small(Family::Tree)).unwrap();
        assert_eq!(set.response_bits(), 1);
        assert!(matches!(fit_per_bit(&s, &LearnerConfig::new(Family::Mlp)), Err(Error::InvalidArgument(_))));
    }
}
