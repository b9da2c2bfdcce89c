//! Simulation and modeling-attack workbench for physically unclonable functions.
//!
//! The crate covers the whole attack pipeline: behavioral PUF devices
//! ([`puf`]), challenge-response datasets ([`dataset`]), the per-bit and
//! multi-output learners used as attackers ([`learn`]), evaluation metrics
//! ([`metrics`]) and normalized learning curves ([`curve`]).

pub mod bits;
pub mod curve;
pub mod dataset;
pub mod error;
pub mod kv;
pub mod learn;
pub mod metrics;
pub mod mix;
pub mod puf;
pub mod trace;

pub use bits::{BitMatrix, BitVector, Challenge, Response};
pub use error::{Error, Result};
