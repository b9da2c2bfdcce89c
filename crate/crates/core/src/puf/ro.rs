use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::bits::{BitVector, Challenge, Response};

pub const NOMINAL_FREQ_HZ: f64 = 200e6;
pub const FREQ_SIGMA: f64 = 0.01;
/// Each oscillator address is drawn from this many challenge bits.
pub const ADDRESS_BITS: usize = 8;

/// Ring-oscillator PUF over a bank of `2^ADDRESS_BITS` oscillators.
///
/// Lane `l` compares the oscillator addressed by challenge bits
/// `l .. l+8` against the one addressed by bits `l+8 .. l+16` (indices wrap
/// around the challenge).
#[derive(Clone, Debug, PartialEq)]
pub struct RingOscillatorPuf {
    challenge_bits: usize,
    response_bits: usize,
    freqs: Vec<f64>,
}

impl RingOscillatorPuf {
    pub(crate) fn sample<R: Rng>(challenge_bits: usize, response_bits: usize, rng: &mut R) -> Self {
        let dist = Normal::new(NOMINAL_FREQ_HZ, NOMINAL_FREQ_HZ * FREQ_SIGMA).expect("valid normal");
        RingOscillatorPuf {
            challenge_bits,
            response_bits,
            freqs: (0..1usize << ADDRESS_BITS).map(|_| dist.sample(rng)).collect(),
        }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    /// Oscillator pair compared by `lane`.
    pub fn pair(&self, lane: usize, challenge: &Challenge) -> (usize, usize) {
        let n = self.challenge_bits;
        let addr = |offset: usize| {
            (0..ADDRESS_BITS).fold(0usize, |acc, t| {
                acc | (challenge.get((lane + offset + t) % n) as usize) << t
            })
        };
        let a = addr(0);
        let mut b = addr(ADDRESS_BITS);
        if a == b {
            b ^= 1;
        }
        (a, b)
    }

    pub(crate) fn evaluate(&self, challenge: &Challenge) -> Response {
        let mut out = BitVector::zeros(self.response_bits);
        for lane in 0..self.response_bits {
            let (a, b) = self.pair(lane, challenge);
            out.set(lane, self.freqs[a] > self.freqs[b]);
        }
        out
    }
}
