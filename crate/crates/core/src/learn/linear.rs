//! Logistic regression on arbiter parity features, the classical attack on
//! single-output arbiter PUFs.

use serde::{Deserialize, Serialize};

use super::loss::sigmoid;
use crate::bits::Challenge;
use crate::error::{Error, Result};
use crate::puf::parity_features;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityLogistic {
    weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct LogisticParams {
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams { iterations: 300, learning_rate: 0.05 }
    }
}

impl ParityLogistic {
    /// Full-batch Adam on the mean logistic loss over `phi(c)` features.
    pub fn fit(challenges: &[Challenge], labels: &[bool], params: LogisticParams) -> Result<Self> {
        if challenges.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} challenges but {} labels",
                challenges.len(),
                labels.len()
            )));
        }
        let features: Vec<Vec<f64>> = challenges.iter().map(parity_features).collect();
        Self::fit_features(&features, labels, params, |_, _| {})
    }

    /// As [`ParityLogistic::fit`] on precomputed features; `after(t, w)` sees
    /// the weights after iteration `t` (one-based).
    pub fn fit_features<F>(features: &[Vec<f64>], labels: &[bool], params: LogisticParams, mut after: F) -> Result<Self>
    where
        F: FnMut(usize, &[f64]),
    {
        if features.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if features.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!("{} rows but {} labels", features.len(), labels.len())));
        }
        let dim = features[0].len();
        let n = features.len() as f64;
        let mut w = vec![0.0; dim];
        let (mut m, mut v) = (vec![0.0; dim], vec![0.0; dim]);
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        for t in 1..=params.iterations {
            let mut grad = vec![0.0; dim];
            for (phi, &y) in features.iter().zip(labels) {
                let err = sigmoid(dot(phi, &w)) - y as u8 as f64;
                for (g, p) in grad.iter_mut().zip(phi) {
                    *g += err * p / n;
                }
            }
            for k in 0..dim {
                m[k] = b1 * m[k] + (1.0 - b1) * grad[k];
                v[k] = b2 * v[k] + (1.0 - b2) * grad[k] * grad[k];
                let mh = m[k] / (1.0 - b1.powi(t as i32));
                let vh = v[k] / (1.0 - b2.powi(t as i32));
                w[k] -= params.learning_rate * mh / (vh.sqrt() + eps);
            }
            after(t, &w);
        }
        Ok(ParityLogistic { weights: w })
    }

    pub fn from_weights(weights: Vec<f64>) -> Self {
        ParityLogistic { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn predict(&self, challenge: &Challenge) -> bool {
        dot(&parity_features(challenge), &self.weights) > 0.0
    }

    /// Prediction from a 0/1 challenge row.
    pub fn predict_row(&self, row: &[u8]) -> bool {
        dot(&row_features(row), &self.weights) > 0.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Parity features of a 0/1 challenge row.
pub fn row_features(row: &[u8]) -> Vec<f64> {
    let mut phi = vec![1.0; row.len() + 1];
    for i in (0..row.len()).rev() {
        phi[i] = if row[i] == 1 { -phi[i + 1] } else { phi[i + 1] };
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::mix;
    use crate::puf::ArbiterChain;

    #[test]
    fn learns_a_small_arbiter() {
        let mut rng = mix::rng(3);
        let chain = ArbiterChain::new(vec![0.5, -1.0, 0.3, 0.8, -0.2, 0.1, 0.4, -0.6, 0.05]);
        let cs: Vec<Challenge> = (0..2000).map(|_| BitVector::random(&mut rng, 8)).collect();
        let ys: Vec<bool> = cs.iter().map(|c| chain.evaluate(c)).collect();
        let model = ParityLogistic::fit(&cs, &ys, LogisticParams::default()).unwrap();
        let acc = cs.iter().zip(&ys).filter(|(c, &y)| model.predict(c) == y).count();
        assert!(acc as f64 / 2000.0 > 0.97, "{acc}");
    }

    #[test]
    fn row_features_match_challenge_features() {
        let mut rng = mix::rng(8);
        for _ in 0..50 {
            let c = BitVector::random(&mut rng, 13);
            let row: Vec<u8> = c.iter().map(u8::from).collect();
            assert_eq!(row_features(&row), parity_features(&c));
        }
    }
}
