//! Fully connected network with batch normalization, LeakyReLU and dropout,
//! trained by mini-batch Adam with decoupled weight decay.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::LearnerConfig;
use super::loss::bce_with_logits;
use crate::bits::BitMatrix;
use crate::dataset::CrpDataset;
use crate::error::{Error, Result};
use crate::mix;
use crate::trace::{StepAxis, TrainingTrace};

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;
const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const EVAL_CHUNK: usize = 4096;

/// Layer recipe shared by the MLP and the GBNN base learners.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpSpec {
    pub hidden: Vec<usize>,
    pub leaky_slope: f64,
    pub dropout: f64,
    /// Leading hidden layers that carry batch normalization and dropout.
    pub normalized_layers: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimParams {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_step_epochs: usize,
    pub lr_gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl BatchNorm {
    fn new(width: usize) -> Self {
        BatchNorm {
            gamma: Array1::ones(width),
            beta: Array1::zeros(width),
            running_mean: Array1::zeros(width),
            running_var: Array1::ones(width),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `fan_in x fan_out`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub norm: Option<BatchNorm>,
    pub dropout: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
    leaky_slope: f64,
    dropout: f64,
}

/// How batch normalization is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics.
    Train,
    /// Running statistics.
    Inference,
}

struct NormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    batch_mean: Array1<f64>,
    batch_var: Array1<f64>,
    batch_stats: bool,
}

struct LayerCache {
    input: Array2<f64>,
    /// Value entering the activation.
    pre: Array2<f64>,
    norm: Option<NormCache>,
    mask: Option<Array2<f64>>,
}

pub struct ForwardCache {
    layers: Vec<LayerCache>,
}

#[derive(Clone, Debug)]
pub struct LayerGrads {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub norm: Option<(Array1<f64>, Array1<f64>)>,
}

#[derive(Clone, Debug)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

impl Gradients {
    /// Flat views in the same order as [`Mlp::parameters_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for g in &self.layers {
            out.push(g.weight.as_slice().expect("standard layout"));
            out.push(g.bias.as_slice().expect("standard layout"));
            if let Some((dg, db)) = &g.norm {
                out.push(dg.as_slice().expect("standard layout"));
                out.push(db.as_slice().expect("standard layout"));
            }
        }
        out
    }
}

/// Challenge bits enter the network as -1/+1.
pub fn encode_inputs(x: &BitMatrix) -> Array2<f64> {
    Array2::from_shape_fn(x.shape(), |(i, j)| if x.get(i, j) == 1 { 1.0 } else { -1.0 })
}

pub fn encode_targets(y: &BitMatrix) -> Array2<f64> {
    Array2::from_shape_fn(y.shape(), |(i, j)| y.get(i, j) as f64)
}

/// Fraction of entries where `logit > 0` agrees with a 0/1 target.
pub fn logit_accuracy(logits: ArrayView2<f64>, targets: ArrayView2<f64>) -> f64 {
    let hits = Zip::from(&logits)
        .and(&targets)
        .fold(0usize, |acc, &z, &y| acc + usize::from((z > 0.0) == (y > 0.5)));
    hits as f64 / logits.len().max(1) as f64
}

impl Mlp {
    /// He-initialized weights `N(0, 2/fan_in)`, zero biases.
    pub fn new<R: Rng + ?Sized>(inputs: usize, outputs: usize, spec: &MlpSpec, rng: &mut R) -> Result<Self> {
        if spec.hidden.is_empty() || spec.hidden.contains(&0) || inputs == 0 || outputs == 0 {
            return Err(Error::InvalidConfig("network layer sizes must be positive and hidden sizes non-empty".into()));
        }
        if !(0.0..1.0).contains(&spec.dropout) {
            return Err(Error::InvalidConfig(format!("dropout {} outside [0, 1)", spec.dropout)));
        }
        let mut layers = Vec::with_capacity(spec.hidden.len() + 1);
        let mut fan_in = inputs;
        let widths = spec.hidden.iter().copied().chain(std::iter::once(outputs));
        for (l, width) in widths.enumerate() {
            let hidden = l < spec.hidden.len();
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            let weight = Array2::from_shape_simple_fn((fan_in, width), || normal.sample(rng));
            let normalized = hidden && l < spec.normalized_layers;
            layers.push(Dense {
                weight,
                bias: Array1::zeros(width),
                norm: normalized.then(|| BatchNorm::new(width)),
                dropout: normalized && spec.dropout > 0.0,
            });
            fan_in = width;
        }
        Ok(Mlp { layers, leaky_slope: spec.leaky_slope, dropout: spec.dropout })
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].weight.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.layers.last().expect("at least one layer").weight.ncols()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len() + l.norm.as_ref().map_or(0, |n| 2 * n.gamma.len()))
            .sum()
    }

    /// Trainable tensors: per layer weight, bias, then BN scale and shift.
    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            out.push(l.weight.as_slice_mut().expect("standard layout"));
            out.push(l.bias.as_slice_mut().expect("standard layout"));
            if let Some(n) = &mut l.norm {
                out.push(n.gamma.as_slice_mut().expect("standard layout"));
                out.push(n.beta.as_slice_mut().expect("standard layout"));
            }
        }
        out
    }

    /// Forward pass. Dropout is applied only when `dropout_rng` is given and
    /// `mode` is [`Mode::Train`].
    pub fn forward<R: Rng + ?Sized>(
        &self,
        x: ArrayView2<f64>,
        mode: Mode,
        mut dropout_rng: Option<&mut R>,
    ) -> Result<(Array2<f64>, ForwardCache)> {
        if x.ncols() != self.inputs() {
            return Err(Error::WidthMismatch { expected: self.inputs(), actual: x.ncols() });
        }
        let last = self.layers.len() - 1;
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weight) + &layer.bias;
            if l == last {
                caches.push(LayerCache { input: a, pre: Array2::zeros((0, 0)), norm: None, mask: None });
                a = z;
                break;
            }
            let norm = layer.norm.as_ref().map(|bn| {
                let batch_stats = mode == Mode::Train;
                let (mean, var) = if batch_stats {
                    let mean = z.mean_axis(Axis(0)).expect("non-empty batch");
                    let var = (&z - &mean).mapv(|d| d * d).mean_axis(Axis(0)).expect("non-empty batch");
                    (mean, var)
                } else {
                    (bn.running_mean.clone(), bn.running_var.clone())
                };
                let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
                let xhat = (&z - &mean) * &inv_std;
                z = &xhat * &bn.gamma + &bn.beta;
                NormCache { xhat, inv_std, batch_mean: mean, batch_var: var, batch_stats }
            });
            let slope = self.leaky_slope;
            let mut out = z.mapv(|v| if v > 0.0 { v } else { slope * v });
            let mask = match (&mut dropout_rng, mode, layer.dropout) {
                (Some(rng), Mode::Train, true) => {
                    let keep = 1.0 / (1.0 - self.dropout);
                    let p = self.dropout;
                    let m = Array2::from_shape_simple_fn(out.dim(), || if rng.random::<f64>() < p { 0.0 } else { keep });
                    out *= &m;
                    Some(m)
                }
                _ => None,
            };
            caches.push(LayerCache { input: a, pre: z, norm, mask });
            a = out;
        }
        Ok((a, ForwardCache { layers: caches }))
    }

    /// Gradients of a scalar loss given `d loss / d outputs`.
    pub fn backward(&self, cache: &ForwardCache, d_out: ArrayView2<f64>) -> Gradients {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = d_out.to_owned();
        let last = self.layers.len() - 1;
        for (l, (layer, c)) in self.layers.iter().zip(&cache.layers).enumerate().rev() {
            let mut norm_grads = None;
            if l != last {
                if let Some(m) = &c.mask {
                    g *= m;
                }
                let slope = self.leaky_slope;
                Zip::from(&mut g).and(&c.pre).for_each(|g, &p| {
                    if p <= 0.0 {
                        *g *= slope;
                    }
                });
                if let (Some(bn), Some(nc)) = (&layer.norm, &c.norm) {
                    let d_gamma = (&g * &nc.xhat).sum_axis(Axis(0));
                    let d_beta = g.sum_axis(Axis(0));
                    let d_xhat = &g * &bn.gamma;
                    g = if nc.batch_stats {
                        let m = g.nrows() as f64;
                        let sum = d_xhat.sum_axis(Axis(0));
                        let sum_x = (&d_xhat * &nc.xhat).sum_axis(Axis(0));
                        ((&d_xhat * m - &sum) - &nc.xhat * &sum_x) * &(&nc.inv_std / m)
                    } else {
                        d_xhat * &nc.inv_std
                    };
                    norm_grads = Some((d_gamma, d_beta));
                }
            }
            let weight = c.input.t().dot(&g).as_standard_layout().into_owned();
            let bias = g.sum_axis(Axis(0));
            if l > 0 {
                g = g.dot(&layer.weight.t());
            }
            grads.push(LayerGrads { weight, bias, norm: norm_grads });
        }
        grads.reverse();
        Gradients { layers: grads }
    }

    /// Folds the batch statistics of a training-mode pass into the running
    /// estimates (unbiased variance).
    pub fn update_running_stats(&mut self, cache: &ForwardCache) {
        for (layer, c) in self.layers.iter_mut().zip(&cache.layers) {
            if let (Some(bn), Some(nc)) = (&mut layer.norm, &c.norm) {
                if !nc.batch_stats {
                    continue;
                }
                let m = c.input.nrows() as f64;
                let unbiased = if m > 1.0 { &nc.batch_var * (m / (m - 1.0)) } else { nc.batch_var.clone() };
                bn.running_mean = &bn.running_mean * (1.0 - BN_MOMENTUM) + &nc.batch_mean * BN_MOMENTUM;
                bn.running_var = &bn.running_var * (1.0 - BN_MOMENTUM) + unbiased * BN_MOMENTUM;
            }
        }
    }

    /// Inference-mode outputs, computed in chunks.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((x.nrows(), self.outputs()));
        for (k, chunk) in x.axis_chunks_iter(Axis(0), EVAL_CHUNK).enumerate() {
            let (y, _) = self.forward::<rand_chacha::ChaCha8Rng>(chunk, Mode::Inference, None)?;
            out.slice_mut(ndarray::s![k * EVAL_CHUNK..k * EVAL_CHUNK + chunk.nrows(), ..]).assign(&y);
        }
        Ok(out)
    }

    /// Inference-mode thresholded outputs as a bit matrix.
    pub fn predict_bits(&self, x: &BitMatrix) -> Result<BitMatrix> {
        let logits = self.predict(encode_inputs(x).view())?;
        let data = logits.iter().map(|&z| u8::from(z > 0.0)).collect();
        BitMatrix::from_vec(logits.nrows(), logits.ncols(), data)
    }
}

/// Adam with decoupled weight decay.
pub struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    pub fn new(model: &mut Mlp) -> Self {
        let sizes: Vec<usize> = model.parameters_mut().iter().map(|p| p.len()).collect();
        Adam {
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn step(&mut self, model: &mut Mlp, grads: &Gradients, lr: f64, weight_decay: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        for (k, (p, g)) in model.parameters_mut().into_iter().zip(grads.tensors()).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..p.len() {
                p[i] *= 1.0 - lr * weight_decay;
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Step schedule: `lr * gamma^floor(epoch / step)` for zero-based `epoch`.
pub fn scheduled_lr(params: &OptimParams, epoch: usize) -> f64 {
    let steps = epoch.checked_div(params.lr_step_epochs).unwrap_or(0);
    params.learning_rate * params.lr_gamma.powi(steps as i32)
}

pub type LossFn = fn(ArrayView2<f64>, ArrayView2<f64>) -> Result<(f64, Array2<f64>)>;

/// Mini-batch training over shuffled rows; `after_epoch(epoch, model)` runs
/// with one-based epoch numbers after every pass.
pub(crate) fn train_epochs<F>(
    model: &mut Mlp,
    x: &Array2<f64>,
    targets: &Array2<f64>,
    params: &OptimParams,
    seed: u64,
    loss: LossFn,
    mut after_epoch: F,
) -> Result<()>
where
    F: FnMut(usize, &Mlp) -> Result<()>,
{
    if params.batch_size == 0 {
        return Err(Error::InvalidConfig("batch size must be at least 1".into()));
    }
    if x.nrows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if x.nrows() != targets.nrows() || targets.ncols() != model.outputs() {
        return Err(Error::ShapeMismatch(format!(
            "inputs {:?}, targets {:?}, outputs {}",
            x.dim(),
            targets.dim(),
            model.outputs()
        )));
    }
    let mut rng = mix::rng(seed);
    let mut adam = Adam::new(model);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    for epoch in 0..params.epochs {
        let lr = scheduled_lr(params, epoch);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(params.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb = targets.select(Axis(0), batch);
            let (out, cache) = model.forward(xb.view(), Mode::Train, Some(&mut rng))?;
            let (l, d_out) = loss(out.view(), yb.view())?;
            if !l.is_finite() {
                return Err(Error::Divergence { epoch: epoch + 1 });
            }
            total += l * batch.len() as f64;
            let grads = model.backward(&cache, d_out.view());
            model.update_running_stats(&cache);
            adam.step(model, &grads, lr, params.weight_decay);
        }
        if !total.is_finite() {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
        after_epoch(epoch + 1, model)?;
    }
    Ok(())
}

impl LearnerConfig {
    pub fn mlp_spec(&self) -> MlpSpec {
        MlpSpec {
            hidden: self.mlp_hidden.clone(),
            leaky_slope: self.leaky_slope,
            dropout: self.dropout,
            normalized_layers: self.normalized_layers,
        }
    }

    pub fn mlp_optim(&self) -> OptimParams {
        OptimParams {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr_step_epochs: self.lr_step_epochs,
            lr_gamma: self.lr_gamma,
        }
    }
}

fn check_widths(train: &CrpDataset, val: &CrpDataset) -> Result<()> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if (train.challenge_bits(), train.response_bits()) != (val.challenge_bits(), val.response_bits()) {
        return Err(Error::ShapeMismatch("training and validation widths differ".into()));
    }
    Ok(())
}

pub(crate) fn prepared(ds: &CrpDataset) -> (Array2<f64>, Array2<f64>) {
    (encode_inputs(&ds.challenge_matrix()), encode_targets(&ds.response_matrix()))
}

/// Trains one multi-output network on all response bits, recording bitwise
/// accuracy on both partitions after each epoch.
pub fn train_mlp(train: &CrpDataset, val: &CrpDataset, config: &LearnerConfig) -> Result<(Mlp, TrainingTrace)> {
    check_widths(train, val)?;
    let (x, y) = prepared(train);
    let (xv, yv) = prepared(val);
    let mut init_rng = mix::rng(mix::child_seed(config.seed, 0));
    let mut model = Mlp::new(x.ncols(), y.ncols(), &config.mlp_spec(), &mut init_rng)?;
    let mut trace = TrainingTrace::new(StepAxis::Epoch);
    train_epochs(
        &mut model,
        &x,
        &y,
        &config.mlp_optim(),
        mix::child_seed(config.seed, 1),
        bce_with_logits,
        |epoch, m| {
            let ta = logit_accuracy(m.predict(x.view())?.view(), y.view());
            let va = if xv.nrows() == 0 { ta } else { logit_accuracy(m.predict(xv.view())?.view(), yv.view()) };
            trace.push(epoch, ta, va)
        },
    )?;
    Ok((model, trace))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::learn::gradcheck::{max_relative_error, perturb};
    use crate::learn::loss::mse;
    use ndarray::Array;

    pub(crate) fn toy_spec(hidden: Vec<usize>) -> MlpSpec {
        MlpSpec { hidden, leaky_slope: 0.01, dropout: 0.0, normalized_layers: 3 }
    }

    fn toy(seed: u64) -> (Mlp, Array2<f64>, Array2<f64>) {
        let mut rng = mix::rng(seed);
        let mut model = Mlp::new(6, 3, &toy_spec(vec![5, 4, 4]), &mut rng).unwrap();
        perturb(&mut model, &mut rng);
        let x = Array::from_shape_simple_fn((8, 6), || if rng.random::<bool>() { 1.0 } else { -1.0 });
        let y = Array::from_shape_simple_fn((8, 3), || f64::from(rng.random::<bool>()));
        (model, x, y)
    }

    #[test]
    fn gradient_check_inference_mode() {
        for seed in 0..3 {
            let (mut model, x, y) = toy(seed);
            let err = max_relative_error(&mut model, &x, &y, Mode::Inference, bce_with_logits).unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn gradient_check_batch_statistics() {
        let (mut model, x, y) = toy(9);
        let err = max_relative_error(&mut model, &x, &y, Mode::Train, bce_with_logits).unwrap();
        assert!(err < 1e-4, "{err}");
        let err = max_relative_error(&mut model, &x, &y, Mode::Inference, mse).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn dropout_only_in_training() {
        let mut rng = mix::rng(2);
        let spec = MlpSpec { dropout: 0.5, ..toy_spec(vec![16, 16]) };
        let model = Mlp::new(4, 2, &spec, &mut rng).unwrap();
        let x = Array2::ones((5, 4));
        let (a, _) = model.forward(x.view(), Mode::Inference, Some(&mut rng)).unwrap();
        let (b, _) = model.forward(x.view(), Mode::Inference, Some(&mut rng)).unwrap();
        assert_eq!(a, b);
        let (c, cache) = model.forward(x.view(), Mode::Train, Some(&mut rng)).unwrap();
        assert!(cache.layers[0].mask.is_some());
        assert!(cache.layers[2].mask.is_none());
        assert_eq!(c.dim(), (5, 2));
    }

    #[test]
    fn learns_a_copied_bit() {
        let mut rng = mix::rng(5);
        let n = 400;
        let x = BitMatrix::from_vec(n, 8, (0..n * 8).map(|_| rng.random_range(0..2u8)).collect()).unwrap();
        let y = BitMatrix::from_vec(n, 1, (0..n).map(|i| x.get(i, 0)).collect()).unwrap();
        let (xe, ye) = (encode_inputs(&x), encode_targets(&y));
        let mut model = Mlp::new(8, 1, &toy_spec(vec![16, 8]), &mut rng).unwrap();
        let params = OptimParams {
            learning_rate: 1e-2,
            weight_decay: 1e-4,
            epochs: 10,
            batch_size: 32,
            lr_step_epochs: 20,
            lr_gamma: 0.5,
        };
        let mut accs = Vec::new();
        train_epochs(&mut model, &xe, &ye, &params, 1, bce_with_logits, |_, m| {
            accs.push(logit_accuracy(m.predict(xe.view())?.view(), ye.view()));
            Ok(())
        })
        .unwrap();
        assert_eq!(*accs.last().unwrap(), 1.0);
    }

    #[test]
    fn schedule_halves_every_step() {
        let p = OptimParams {
            learning_rate: 1e-3,
            weight_decay: 0.0,
            epochs: 60,
            batch_size: 1,
            lr_step_epochs: 20,
            lr_gamma: 0.5,
        };
        assert_eq!(scheduled_lr(&p, 19), 1e-3);
        assert_eq!(scheduled_lr(&p, 20), 5e-4);
        assert_eq!(scheduled_lr(&p, 45), 2.5e-4);
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let mut rng = mix::rng(1);
        let mut model = Mlp::new(2, 1, &toy_spec(vec![2]), &mut rng).unwrap();
        let x = Array2::from_elem((4, 2), f64::NAN);
        let y = Array2::zeros((4, 1));
        let p = OptimParams { learning_rate: 1e-3, weight_decay: 0.0, epochs: 3, batch_size: 2, lr_step_epochs: 1, lr_gamma: 1.0 };
        let err = train_epochs(&mut model, &x, &y, &p, 0, bce_with_logits, |_, _| Ok(())).unwrap_err();
        assert!(matches!(err, Error::Divergence { epoch: 1 }));
    }

    #[test]
    fn width_mismatch() {
        let mut rng = mix::rng(1);
        let model = Mlp::new(3, 1, &toy_spec(vec![2]), &mut rng).unwrap();
        let x = Array2::zeros((2, 4));
        assert!(matches!(
            model.forward::<rand_chacha::ChaCha8Rng>(x.view(), Mode::Inference, None),
            Err(Error::WidthMismatch { expected: 3, actual: 4 })
        ));
    }
}
