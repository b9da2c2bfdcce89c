use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a trace's step index counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepAxis {
    Epoch,
    BoostingRound,
    TreeDepth,
    TreeCount,
    Stage,
    Iteration,
}

impl fmt::Display for StepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepAxis::Epoch => "epoch",
            StepAxis::BoostingRound => "boosting-round",
            StepAxis::TreeDepth => "tree-depth",
            StepAxis::TreeCount => "tree-count",
            StepAxis::Stage => "stage",
            StepAxis::Iteration => "iteration",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
}

/// Accuracy recorded along a model's capacity or training axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub axis: StepAxis,
    points: Vec<TracePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
        })
    }
}

impl TrainingTrace {
    pub fn new(axis: StepAxis) -> Self {
        TrainingTrace { axis, points: Vec::new() }
    }

    pub fn from_points(axis: StepAxis, points: Vec<TracePoint>) -> Result<Self> {
        let mut t = TrainingTrace::new(axis);
        for p in points {
            t.push(p.step, p.train_accuracy, p.validation_accuracy)?;
        }
        Ok(t)
    }

    /// Appends a point. Steps must strictly increase and accuracies lie in [0, 1].
    pub fn push(&mut self, step: usize, train_accuracy: f64, validation_accuracy: f64) -> Result<()> {
        if let Some(last) = self.points.last() {
            if step <= last.step {
                return Err(Error::InvalidArgument(format!(
                    "trace steps must strictly increase: {step} after {}",
                    last.step
                )));
            }
        }
        for a in [train_accuracy, validation_accuracy] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidArgument(format!("accuracy {a} outside [0, 1]")));
            }
        }
        self.points.push(TracePoint { step, train_accuracy, validation_accuracy });
        Ok(())
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&TracePoint> {
        self.points.last()
    }

    pub fn accuracies(&self, split: Split) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| match split {
                Split::Train => p.train_accuracy,
                Split::Validation => p.validation_accuracy,
            })
            .collect()
    }
}
