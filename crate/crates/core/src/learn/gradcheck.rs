//! Finite-difference verification of network gradients.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::mlp::{LossFn, Mlp, Mode};
use crate::error::Result;

pub const STEP: f64 = 1e-5;

/// Largest relative error between backpropagated and central-difference
/// gradients over every trainable parameter. Dropout is never applied.
pub fn max_relative_error(model: &mut Mlp, x: &Array2<f64>, y: &Array2<f64>, mode: Mode, loss: LossFn) -> Result<f64> {
    let eval = |m: &Mlp| -> Result<f64> {
        let (out, _) = m.forward::<ChaCha8Rng>(x.view(), mode, None)?;
        Ok(loss(out.view(), y.view())?.0)
    };
    let (out, cache) = model.forward::<ChaCha8Rng>(x.view(), mode, None)?;
    let (_, d_out) = loss(out.view(), y.view())?;
    let grads = model.backward(&cache, d_out.view());
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.to_vec()).collect();
    let mut worst: f64 = 0.0;
    for (k, a) in analytic.iter().enumerate() {
        for (i, &ai) in a.iter().enumerate() {
            let orig = model.parameters_mut()[k][i];
            model.parameters_mut()[k][i] = orig + STEP;
            let up = eval(model)?;
            model.parameters_mut()[k][i] = orig - STEP;
            let down = eval(model)?;
            model.parameters_mut()[k][i] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let denom = ai.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((ai - numeric).abs() / denom);
        }
    }
    Ok(worst)
}

/// Random biases and normalization parameters keep pre-activations away
/// from the LeakyReLU kink.
pub fn perturb(model: &mut Mlp, rng: &mut impl Rng) {
    for l in model.layers_mut() {
        l.bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
        if let Some(bn) = &mut l.norm {
            bn.gamma.mapv_inplace(|_| rng.random_range(0.5..1.5));
            bn.beta.mapv_inplace(|_| rng.random_range(-0.5..0.5));
            bn.running_mean.mapv_inplace(|_| rng.random_range(-0.3..0.3));
            bn.running_var.mapv_inplace(|_| rng.random_range(0.5..2.0));
        }
    }
}
