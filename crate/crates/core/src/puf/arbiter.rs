//! Additive delay models for the arbiter family.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bits::Challenge;

/// Parity feature transform: `phi[i] = prod_{j >= i} (1 - 2 c_j)` for
/// `i < n`, and `phi[n] = 1`.
pub fn parity_features(challenge: &Challenge) -> Vec<f64> {
    let n = challenge.len();
    let mut phi = vec![1.0; n + 1];
    for i in (0..n).rev() {
        let s = if challenge.get(i) { -1.0 } else { 1.0 };
        phi[i] = phi[i + 1] * s;
    }
    phi
}

/// A single arbiter chain: `bit = [w . phi(c) > 0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArbiterChain {
    weights: Vec<f64>,
}

impl ArbiterChain {
    /// `weights` has length `n_c + 1`.
    pub fn new(weights: Vec<f64>) -> Self {
        assert!(!weights.is_empty(), "arbiter needs at least the constant weight");
        ArbiterChain { weights }
    }

    pub(crate) fn sample<R: Rng>(challenge_bits: usize, rng: &mut R) -> Self {
        ArbiterChain::new(
            (0..=challenge_bits)
                .map(|_| StandardNormal.sample(rng))
                .collect(),
        )
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn challenge_bits(&self) -> usize {
        self.weights.len() - 1
    }

    /// Final delay difference `w . phi(c)`, computed stage by stage.
    pub fn delay_difference(&self, challenge: &Challenge) -> f64 {
        self.race(challenge, &[]).0
    }

    pub fn evaluate(&self, challenge: &Challenge) -> bool {
        self.delay_difference(challenge) > 0.0
    }

    /// Runs the race through every stage. A loop `(tap, target)` replaces the
    /// challenge bit of stage `target` with the arbiter decision taken after
    /// stage `tap`. Returns the final difference and the effective challenge bits.
    fn race(&self, challenge: &Challenge, loops: &[(usize, usize)]) -> (f64, Vec<bool>) {
        let n = self.challenge_bits();
        let mut bits: Vec<bool> = challenge.iter().collect();
        let mut diff = 0.0;
        for k in 0..n {
            if let Some(&(tap, _)) = loops.iter().find(|&&(_, target)| target == k) {
                // the tap stage has already been passed since tap < target
                bits[k] = tap_decision(&self.weights, &bits, tap);
            }
            diff = (diff + self.weights[k]) * if bits[k] { -1.0 } else { 1.0 };
        }
        (diff + self.weights[n], bits)
    }
}

/// Sign of the partial race after stage `tap`, given the effective bits so far.
fn tap_decision(weights: &[f64], bits: &[bool], tap: usize) -> bool {
    let mut diff = 0.0;
    for k in 0..=tap {
        diff = (diff + weights[k]) * if bits[k] { -1.0 } else { 1.0 };
    }
    diff > 0.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct XorArbiterPuf {
    chains: Vec<ArbiterChain>,
}

impl XorArbiterPuf {
    pub fn new(chains: Vec<ArbiterChain>) -> Self {
        assert!(!chains.is_empty());
        XorArbiterPuf { chains }
    }

    pub fn chains(&self) -> &[ArbiterChain] {
        &self.chains
    }

    pub fn evaluate(&self, challenge: &Challenge) -> bool {
        self.chains
            .iter()
            .fold(false, |acc, c| acc ^ c.evaluate(challenge))
    }
}

/// Arbiter chain with feed-forward loops.
#[derive(Clone, Debug, PartialEq)]
pub struct FfArbiterPuf {
    chain: ArbiterChain,
    loops: Vec<(usize, usize)>,
}

impl FfArbiterPuf {
    /// Each loop is `(tap, target)` with `tap < target < n_c`; targets are distinct.
    pub fn new(chain: ArbiterChain, loops: Vec<(usize, usize)>) -> Self {
        let n = chain.challenge_bits();
        for (i, &(tap, target)) in loops.iter().enumerate() {
            assert!(tap < target && target < n, "bad loop ({tap}, {target})");
            assert!(
                loops[..i].iter().all(|&(_, t)| t != target),
                "duplicate loop target {target}"
            );
        }
        FfArbiterPuf { chain, loops }
    }

    pub(crate) fn sample<R: Rng>(challenge_bits: usize, n_loops: usize, rng: &mut R) -> Self {
        let chain = ArbiterChain::sample(challenge_bits, rng);
        let mut targets: Vec<usize> = (1..challenge_bits).collect();
        let mut loops = Vec::with_capacity(n_loops);
        for _ in 0..n_loops {
            let target = targets.swap_remove(rng.random_range(0..targets.len()));
            let tap = rng.random_range(0..target);
            loops.push((tap, target));
        }
        FfArbiterPuf::new(chain, loops)
    }

    pub fn loops(&self) -> &[(usize, usize)] {
        &self.loops
    }

    pub fn evaluate(&self, challenge: &Challenge) -> bool {
        self.chain.race(challenge, &self.loops).0 > 0.0
    }
}
