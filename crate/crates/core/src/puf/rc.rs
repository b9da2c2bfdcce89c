//! Behavioral RC-delay PUF.
//!
//! Each response lane is a chain of `n_c` stages. Challenge bit `j` selects one
//! of two RC branches in stage `j` of every lane; the lane's accumulated charge
//! delay, clamped to the excitation pulse, is compared against the lane's own
//! reference chain.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use super::config::PufConfig;
use crate::bits::{BitVector, Challenge, Response};

pub const NOMINAL_R_OHMS: f64 = 10e3;
pub const NOMINAL_C_FARADS: f64 = 100e-12;
pub const MISMATCH_SIGMA: f64 = 0.05;

/// ln(V_dd / (V_dd - V_th)) with V_th = V_dd / 2.
pub const CHARGE_FACTOR: f64 = std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RcSection {
    pub r_ohms: f64,
    pub c_farads: f64,
}

impl RcSection {
    pub fn tau(&self) -> f64 {
        self.r_ohms * self.c_farads * CHARGE_FACTOR
    }
}

/// One selectable branch: a single section, or two cascaded sections.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub sections: Vec<RcSection>,
}

impl Branch {
    /// Threshold-crossing delay. Two cascaded sections use the dominant-pole
    /// sum plus the interaction term `sqrt(tau1 * tau2)`.
    pub fn delay(&self) -> f64 {
        match self.sections.as_slice() {
            [s] => s.tau(),
            [a, b] => {
                let (t1, t2) = (a.tau(), b.tau());
                t1 + t2 + (t1 * t2).sqrt()
            }
            _ => unreachable!("branches hold one or two sections"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RcPuf {
    challenge_bits: usize,
    /// `stages[lane][j]` = (branch for c_j = 0, branch for c_j = 1).
    stages: Vec<Vec<(Branch, Branch)>>,
    reference: Vec<f64>,
    uid_word: Option<Response>,
    pulse_width: f64,
    // Cached branch delays, same layout as `stages`.
    delays: Vec<Vec<[f64; 2]>>,
}

impl RcPuf {
    pub(crate) fn sample<R: Rng>(cfg: &PufConfig, second_order: bool, rng: &mut R) -> Self {
        let factor = LogNormal::new(0.0, MISMATCH_SIGMA).expect("valid lognormal");
        let n_sections = if second_order { 2 } else { 1 };
        // Cascaded sections get C/3 each so the nominal stage delay
        // (tau1 + tau2 + sqrt(tau1 tau2)) matches the first-order one.
        let c_nominal = if second_order { NOMINAL_C_FARADS / 3.0 } else { NOMINAL_C_FARADS };
        let section = |rng: &mut R| RcSection {
            r_ohms: NOMINAL_R_OHMS * factor.sample(rng),
            c_farads: c_nominal * factor.sample(rng),
        };
        let branch = |rng: &mut R| Branch {
            sections: (0..n_sections).map(|_| section(rng)).collect(),
        };
        let mut stages = Vec::with_capacity(cfg.response_bits);
        let mut reference = Vec::with_capacity(cfg.response_bits);
        for _ in 0..cfg.response_bits {
            let lane: Vec<(Branch, Branch)> = (0..cfg.challenge_bits)
                .map(|_| (branch(rng), branch(rng)))
                .collect();
            let ref_delay: f64 = (0..cfg.challenge_bits).map(|_| branch(rng).delay()).sum();
            stages.push(lane);
            reference.push(ref_delay);
        }
        let uid_word = cfg
            .uid_enabled
            .then(|| BitVector::random(rng, cfg.response_bits));
        Self::from_parts(stages, reference, uid_word, cfg.pulse_width.seconds())
    }

    pub fn from_parts(
        stages: Vec<Vec<(Branch, Branch)>>,
        reference: Vec<f64>,
        uid_word: Option<Response>,
        pulse_width: f64,
    ) -> Self {
        assert_eq!(stages.len(), reference.len());
        let challenge_bits = stages.first().map_or(0, Vec::len);
        let delays = stages
            .iter()
            .map(|lane| lane.iter().map(|(a, b)| [a.delay(), b.delay()]).collect())
            .collect();
        RcPuf {
            challenge_bits,
            stages,
            reference,
            uid_word,
            pulse_width,
            delays,
        }
    }

    pub fn challenge_bits(&self) -> usize {
        self.challenge_bits
    }

    pub fn response_bits(&self) -> usize {
        self.reference.len()
    }

    pub fn stages(&self) -> &[Vec<(Branch, Branch)>] {
        &self.stages
    }

    pub fn reference_delays(&self) -> &[f64] {
        &self.reference
    }

    pub fn uid_word(&self) -> Option<&Response> {
        self.uid_word.as_ref()
    }

    /// Accumulated delay of `lane` under `challenge`, clamped to the pulse window.
    pub fn lane_delay(&self, lane: usize, challenge: &Challenge) -> f64 {
        let raw: f64 = self.delays[lane]
            .iter()
            .enumerate()
            .map(|(j, d)| d[challenge.get(j) as usize])
            .sum();
        raw.min(self.pulse_width)
    }

    /// Response before UID integration.
    pub fn raw_response(&self, challenge: &Challenge) -> Response {
        let mut out = BitVector::zeros(self.response_bits());
        for lane in 0..self.response_bits() {
            out.set(lane, self.lane_delay(lane, challenge) > self.reference[lane]);
        }
        out
    }

    pub(crate) fn evaluate(&self, challenge: &Challenge) -> Response {
        let raw = self.raw_response(challenge);
        match &self.uid_word {
            Some(uid) => raw.xor(uid).expect("uid width matches response width"),
            None => raw,
        }
    }
}
