//! Seed derivation and keyed avalanche mixing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const M1: u64 = 0xbf58_476d_1ce4_e5b9;
const M2: u64 = 0x94d0_49bb_1331_11eb;
const M3: u64 = 0xff51_afd7_ed55_8ccd;
const M4: u64 = 0xc4ce_b9fe_1a85_ec53;

/// 64-bit xor-shift-multiply finalizer (the SplitMix64 output function).
#[inline]
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(M1);
    z = (z ^ (z >> 27)).wrapping_mul(M2);
    z ^ (z >> 31)
}

/// Seed of child `index` of `master`. Independent of the order children are requested in.
pub fn child_seed(master: u64, index: u64) -> u64 {
    avalanche(avalanche(master ^ GOLDEN).wrapping_add(avalanche(index.wrapping_mul(GOLDEN) ^ M3)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Keyed mixer over a 128-bit state.
///
/// Every absorbed word is followed by [`KeyedMixer::ROUNDS`] xor-shift-multiply
/// rounds that cross-feed both halves, so each input bit reaches every output bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyedMixer {
    key: [u64; 2],
}

impl KeyedMixer {
    pub const ROUNDS: usize = 4;

    pub fn new(key: [u64; 2]) -> Self {
        KeyedMixer { key }
    }

    pub fn from_seed(seed: u64) -> Self {
        KeyedMixer {
            key: [avalanche(seed ^ M3), avalanche(seed.wrapping_add(GOLDEN) ^ M4)],
        }
    }

    pub fn key(&self) -> [u64; 2] {
        self.key
    }

    #[inline]
    fn rounds(s: &mut [u64; 2]) {
        for _ in 0..Self::ROUNDS {
            s[0] = s[0].wrapping_add(s[1].rotate_left(29));
            s[0] = (s[0] ^ (s[0] >> 32)).wrapping_mul(M1);
            s[1] ^= s[0];
            s[1] = (s[1] ^ (s[1] >> 29)).wrapping_mul(M2);
            s[0] ^= s[1].rotate_left(17);
        }
    }

    /// Mixes `words` (plus a domain tweak) into a 64-bit output.
    pub fn hash(&self, words: &[u64], tweak: u64) -> u64 {
        let mut s = [self.key[0] ^ M4, self.key[1] ^ tweak.wrapping_mul(GOLDEN)];
        Self::rounds(&mut s);
        for &w in words {
            s[0] ^= w;
            Self::rounds(&mut s);
            s[1] ^= w.rotate_left(32);
        }
        s[0] ^= words.len() as u64;
        Self::rounds(&mut s);
        s[0] ^ s[1].rotate_left(7)
    }

    /// As [`KeyedMixer::hash`], mapped to `[0, 1)` with 53-bit resolution.
    pub fn unit(&self, words: &[u64], tweak: u64) -> f64 {
        (self.hash(words, tweak) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
