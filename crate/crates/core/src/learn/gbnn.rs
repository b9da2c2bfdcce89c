//! Gradient-boosted neural networks: `F_t(x) = F_0 + sum_{s<=t} rho * h_s(x)`,
//! where each `h_s` regresses the pseudo-residual `y - sigmoid(F_{s-1}(x))`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::config::LearnerConfig;
use super::loss::{clamped_logit, mse, sigmoid};
use super::mlp::{encode_inputs, logit_accuracy, prepared, train_epochs, Mlp, MlpSpec, OptimParams};
use crate::bits::BitMatrix;
use crate::dataset::CrpDataset;
use crate::error::{Error, Result};
use crate::mix;
use crate::trace::{StepAxis, TrainingTrace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbnnStage {
    pub learner: Mlp,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbnnEnsemble {
    /// Per-bit constant logits.
    pub f0: Array1<f64>,
    pub stages: Vec<GbnnStage>,
}

impl LearnerConfig {
    /// Base learners reuse the network recipe with batch normalization on the
    /// leading layers and no dropout.
    pub fn gbnn_spec(&self) -> MlpSpec {
        MlpSpec {
            hidden: self.gbnn_hidden.clone(),
            leaky_slope: self.leaky_slope,
            dropout: 0.0,
            normalized_layers: self.normalized_layers,
        }
    }

    pub fn gbnn_optim(&self) -> OptimParams {
        OptimParams {
            learning_rate: self.gbnn_learning_rate,
            weight_decay: self.gbnn_weight_decay,
            epochs: self.gbnn_epochs,
            batch_size: self.batch_size,
            lr_step_epochs: self.lr_step_epochs,
            lr_gamma: self.lr_gamma,
        }
    }
}

impl GbnnEnsemble {
    /// Logits using the first `stages` stages.
    pub fn logits_at(&self, x: ArrayView2<f64>, stages: usize) -> Result<Array2<f64>> {
        let mut f = Array2::zeros((x.nrows(), self.f0.len())) + &self.f0;
        for s in &self.stages[..stages.min(self.stages.len())] {
            f.scaled_add(s.weight, &s.learner.predict(x)?);
        }
        Ok(f)
    }

    pub fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.logits_at(x, self.stages.len())
    }

    pub fn predict_bits(&self, x: &BitMatrix) -> Result<BitMatrix> {
        let logits = self.logits(encode_inputs(x).view())?;
        let data = logits.iter().map(|&z| u8::from(z > 0.0)).collect();
        BitMatrix::from_vec(logits.nrows(), logits.ncols(), data)
    }
}

pub fn train_gbnn(train: &CrpDataset, val: &CrpDataset, config: &LearnerConfig) -> Result<(GbnnEnsemble, TrainingTrace)> {
    if config.gbnn_stages == 0 {
        return Err(Error::InvalidConfig("gbnn_stages must be at least 1".into()));
    }
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if (train.challenge_bits(), train.response_bits()) != (val.challenge_bits(), val.response_bits()) {
        return Err(Error::ShapeMismatch("training and validation widths differ".into()));
    }
    let (x, y) = prepared(train);
    let (xv, yv) = prepared(val);
    let f0 = y.mean_axis(Axis(0)).expect("non-empty").mapv(clamped_logit);
    let mut f = Array2::zeros(y.dim()) + &f0;
    let mut fv = Array2::zeros(yv.dim()) + &f0;
    let mut ensemble = GbnnEnsemble { f0, stages: Vec::new() };
    let mut trace = TrainingTrace::new(StepAxis::Stage);
    let spec = config.gbnn_spec();
    let optim = config.gbnn_optim();
    for t in 1..=config.gbnn_stages {
        let residual = &y - &f.mapv(sigmoid);
        let stage_seed = mix::child_seed(config.seed, t as u64);
        let mut init_rng = mix::rng(mix::child_seed(stage_seed, 0));
        let mut learner = Mlp::new(x.ncols(), y.ncols(), &spec, &mut init_rng)?;
        train_epochs(&mut learner, &x, &residual, &optim, mix::child_seed(stage_seed, 1), mse, |_, _| Ok(()))
            .map_err(|e| match e {
                Error::Divergence { .. } => Error::Divergence { epoch: t },
                other => other,
            })?;
        let w = config.gbnn_stage_weight;
        f.scaled_add(w, &learner.predict(x.view())?);
        if xv.nrows() > 0 {
            fv.scaled_add(w, &learner.predict(xv.view())?);
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { epoch: t });
        }
        ensemble.stages.push(GbnnStage { learner, weight: w });
        let ta = logit_accuracy(f.view(), y.view());
        let va = if xv.nrows() == 0 { ta } else { logit_accuracy(fv.view(), yv.view()) };
        trace.push(t, ta, va)?;
    }
    Ok((ensemble, trace))
}
