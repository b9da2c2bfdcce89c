//! Binary cross-entropy losses averaged over all `N x n_r` entries.

use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{Error, Result};

pub const PROB_EPS: f64 = 1e-7;

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(p / (1 - p))` of `p` clamped to `[PROB_EPS, 1 - PROB_EPS]`.
pub fn clamped_logit(p: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    (p / (1.0 - p)).ln()
}

fn check_shape<A, B>(a: &ArrayView2<A>, b: &ArrayView2<B>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    if a.is_empty() {
        return Err(Error::ShapeMismatch("empty loss input".into()));
    }
    Ok(())
}

/// `-(1 / (n_r N)) sum [y ln p + (1 - y) ln(1 - p)]` for probabilities strictly inside (0, 1).
pub fn bce_loss(probabilities: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<f64> {
    check_shape(&probabilities, &targets)?;
    let mut sum = 0.0;
    for (&p, &y) in probabilities.iter().zip(targets.iter()) {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityDomain(p));
        }
        sum += y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    }
    Ok(-sum / probabilities.len() as f64)
}

/// Per-entry stable form `max(z, 0) - z y + ln(1 + e^{-|z|})`.
#[inline]
pub fn bce_with_logits_term(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Mean BCE on logits and its gradient `(sigmoid(z) - y) / (n_r N)`.
pub fn bce_with_logits(logits: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
    check_shape(&logits, &targets)?;
    let scale = 1.0 / logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = Array2::zeros(logits.dim());
    Zip::from(&mut grad)
        .and(&logits)
        .and(&targets)
        .for_each(|g, &z, &y| {
            loss += bce_with_logits_term(z, y);
            *g = (sigmoid(z) - y) * scale;
        });
    Ok((loss * scale, grad))
}

/// Mean squared error over all entries and its gradient `2 (h - r) / (n_r N)`.
pub fn mse(outputs: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<(f64, Array2<f64>)> {
    check_shape(&outputs, &targets)?;
    let scale = 1.0 / outputs.len() as f64;
    let diff = &outputs - &targets;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() * scale;
    Ok((loss, diff * (2.0 * scale)))
}

/// Bit `1` iff `sigmoid(z) > 0.5`, i.e. iff `z > 0`.
#[inline]
pub fn threshold(logit: f64) -> bool {
    logit > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn uniform_predictor_is_ln2() {
        let p = Array2::from_elem((3, 4), 0.5);
        let y = array![[1.0, 0.0, 1.0, 1.0], [0.0, 0.0, 0.0, 1.0], [1.0, 1.0, 0.0, 0.0]];
        assert!((bce_loss(p.view(), y.view()).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        let (l, g) = bce_with_logits(Array2::zeros((3, 4)).view(), y.view()).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        for (gi, yi) in g.iter().zip(y.iter()) {
            assert!((gi - (0.5 - yi) / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn worked_example() {
        let l = bce_loss(array![[0.8, 0.3]].view(), array![[1.0, 0.0]].view()).unwrap();
        let oracle = -((0.8f64).ln() + (0.7f64).ln()) / 2.0;
        assert!((l - oracle).abs() < 1e-15);
        assert!((l - 0.2899).abs() < 1e-4);
    }

    #[test]
    fn near_perfect_prediction_goes_to_zero() {
        let y = array![[1.0, 0.0]];
        let l = bce_loss(array![[1.0 - 1e-12, 1e-12]].view(), y.view()).unwrap();
        assert!(l < 1e-11);
    }

    #[test]
    fn domain_and_shape_errors() {
        assert!(matches!(
            bce_loss(array![[1.0]].view(), array![[1.0]].view()),
            Err(Error::ProbabilityDomain(_))
        ));
        assert!(bce_loss(array![[0.0]].view(), array![[0.0]].view()).is_err());
        assert!(bce_with_logits(array![[0.0, 1.0]].view(), array![[0.0]].view()).is_err());
    }

    #[test]
    fn large_logits_are_stable() {
        let (l, g) = bce_with_logits(array![[1000.0, -1000.0]].view(), array![[1.0, 0.0]].view()).unwrap();
        assert!(l.is_finite() && l < 1e-300);
        assert!(g.iter().all(|v| v.abs() < 1e-300));
        let (l, _) = bce_with_logits(array![[1000.0]].view(), array![[0.0]].view()).unwrap();
        assert!((l - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn threshold_boundary() {
        assert!(!threshold(0.0));
        assert!(!threshold(-3.0));
        assert!(threshold(0.2));
    }
}
