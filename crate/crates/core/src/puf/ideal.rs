use crate::bits::{BitVector, Challenge, Response};
use crate::mix::KeyedMixer;

/// Reference device whose responses are a keyed avalanche hash of the
/// challenge: bit `l` is one iff the mixed value for lane `l`, mapped to
/// `[0, 1)`, falls below `bias_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealEntropyPuf {
    mixer: KeyedMixer,
    response_bits: usize,
    bias_p: f64,
}

impl IdealEntropyPuf {
    pub fn new(key: [u64; 2], response_bits: usize, bias_p: f64) -> Self {
        IdealEntropyPuf {
            mixer: KeyedMixer::new(key),
            response_bits,
            bias_p,
        }
    }

    pub fn key(&self) -> [u64; 2] {
        self.mixer.key()
    }

    pub fn bias_p(&self) -> f64 {
        self.bias_p
    }

    pub(crate) fn evaluate(&self, challenge: &Challenge) -> Response {
        let mut out = BitVector::zeros(self.response_bits);
        for lane in 0..self.response_bits {
            out.set(lane, self.mixer.unit(challenge.words(), lane as u64) < self.bias_p);
        }
        out
    }
}
