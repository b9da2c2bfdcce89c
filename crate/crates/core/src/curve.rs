//! Normalized learning curves.
//!
//! Heterogeneous training axes (epochs, boosting rounds, tree depth, tree
//! count) are mapped onto a shared 0..100 progress scale and resampled at
//! the 101 integer points by piecewise-linear interpolation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Split, TrainingTrace};

pub const QUERY_POINTS: usize = 101;

/// `tau_i = (i - 1) / (N - 1) * 100` for `i = 1..=N`.
pub fn normalize_steps(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "normalization needs at least 2 trace points, got {n}"
        )));
    }
    Ok((0..n).map(|i| i as f64 / (n - 1) as f64 * 100.0).collect())
}

/// Positions of `trace`'s points on the progress scale.
pub fn normalized_positions(trace: &TrainingTrace) -> Result<Vec<f64>> {
    normalize_steps(trace.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCurve {
    pub model: String,
    pub split: Split,
    /// Accuracy at `s = 0, 1, ..., 100`.
    pub values: Vec<f64>,
}

/// Resamples `accuracies` (one per trace point) onto the 101-point grid.
///
/// For `s` in `[tau_i, tau_{i+1})` the value is
/// `A_i + (s - tau_i) / (tau_{i+1} - tau_i) * (A_{i+1} - A_i)`; `s = 100` takes
/// `A_N`. The segment and offset are found in integer arithmetic:
/// `s * (N - 1) = 100 i + r`, so the fraction is exactly `r / 100` and knots
/// (`r = 0`) reproduce their accuracy with no rounding.
pub fn interpolate(accuracies: &[f64]) -> Result<Vec<f64>> {
    let n = accuracies.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "interpolation needs at least 2 trace points, got {n}"
        )));
    }
    if accuracies.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument("non-finite accuracy in trace".into()));
    }
    let mut out = Vec::with_capacity(QUERY_POINTS);
    for s in 0..QUERY_POINTS {
        if s == QUERY_POINTS - 1 {
            out.push(accuracies[n - 1]);
            continue;
        }
        let scaled = s * (n - 1);
        let (i, r) = (scaled / 100, scaled % 100);
        let (a, b) = (accuracies[i], accuracies[i + 1]);
        if r == 0 {
            out.push(a);
        } else {
            let v = a + (r as f64 / 100.0) * (b - a);
            out.push(v.clamp(a.min(b), a.max(b)));
        }
    }
    Ok(out)
}

pub fn interpolate_curve(trace: &TrainingTrace, split: Split, model: &str) -> Result<NormalizedCurve> {
    Ok(NormalizedCurve {
        model: model.to_string(),
        split,
        values: interpolate(&trace.accuracies(split))?,
    })
}

/// Train and validation curves for every labeled trace, in input order.
pub fn build_comparison(traces: &[(String, TrainingTrace)]) -> Result<Vec<NormalizedCurve>> {
    let mut curves = Vec::with_capacity(traces.len() * 2);
    for (label, trace) in traces {
        curves.push(interpolate_curve(trace, Split::Train, label)?);
        curves.push(interpolate_curve(trace, Split::Validation, label)?);
    }
    Ok(curves)
}

/// CSV with columns `s,model,split,accuracy`, one row per curve point.
pub fn curves_csv(curves: &[NormalizedCurve]) -> String {
    let mut s = String::from("s,model,split,accuracy\n");
    for c in curves {
        for (k, v) in c.values.iter().enumerate() {
            let _ = writeln!(s, "{k},{},{},{v}", c.model, c.split);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::StepAxis;

    #[test]
    fn tau_positions() {
        assert_eq!(normalize_steps(5).unwrap(), vec![0.0, 25.0, 50.0, 75.0, 100.0]);
        assert_eq!(normalize_steps(2).unwrap(), vec![0.0, 100.0]);
        assert!(normalize_steps(1).is_err());
        assert!(normalize_steps(0).is_err());
        for n in 2..=1000 {
            let t = normalize_steps(n).unwrap();
            assert_eq!((t[0], t[n - 1]), (0.0, 100.0));
        }
    }

    #[test]
    fn worked_cases() {
        let c = interpolate(&[0.0, 100.0]).unwrap();
        assert_eq!(c[50], 50.0);
        let c = interpolate(&[0.0, 60.0, 100.0]).unwrap();
        assert_eq!(c[25], 30.0);
        assert_eq!(c.len(), QUERY_POINTS);
        assert!(interpolate(&[1.0]).is_err());
        assert!(interpolate(&[0.1, f64::NAN]).is_err());
    }

    #[test]
    fn comparison_shares_axis() {
        let mk = |n: usize| {
            let mut t = TrainingTrace::new(StepAxis::TreeDepth);
            for i in 1..=n {
                t.push(i, i as f64 / n as f64, 0.5).unwrap();
            }
            t
        };
        let curves = build_comparison(&[("a".into(), mk(20)), ("b".into(), mk(35))]).unwrap();
        assert_eq!(curves.len(), 4);
        assert!(curves.iter().all(|c| c.values.len() == QUERY_POINTS));
        let csv = curves_csv(&curves);
        assert!(csv.starts_with("s,model,split,accuracy\n0,a,train,0.05\n"));
        assert_eq!(csv.lines().count(), 1 + 4 * QUERY_POINTS);
    }
}
