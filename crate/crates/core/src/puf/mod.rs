//! Behavioral PUF simulators.
//!
//! Every instance is sampled from its [`PufConfig`] using only the config
//! seed, is immutable afterwards, and evaluates challenges as a pure function.

mod arbiter;
mod config;
mod ideal;
mod rc;
mod ro;

use rand::Rng;

pub use arbiter::{parity_features, ArbiterChain, FfArbiterPuf, XorArbiterPuf};
pub use config::{fingerprint_bytes, PufConfig, PulseWidth, Variant, DEFAULT_BIAS};
pub use ideal::IdealEntropyPuf;
pub use rc::{Branch, RcPuf, RcSection, CHARGE_FACTOR, MISMATCH_SIGMA, NOMINAL_C_FARADS, NOMINAL_R_OHMS};
pub use ro::RingOscillatorPuf;

use crate::bits::{BitVector, Challenge, Response};
use crate::error::{Error, Result};
use crate::mix;

#[derive(Clone, Debug, PartialEq)]
pub enum Device {
    Rc(RcPuf),
    Arbiter(ArbiterChain),
    XorArbiter(XorArbiterPuf),
    FfArbiter(FfArbiterPuf),
    RingOscillator(RingOscillatorPuf),
    IdealEntropy(IdealEntropyPuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PufInstance {
    config: PufConfig,
    device: Device,
}

impl PufInstance {
    pub fn create(config: &PufConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = mix::rng(config.seed);
        let n_c = config.challenge_bits;
        let device = match config.variant {
            Variant::RcFirstOrder => Device::Rc(RcPuf::sample(config, false, &mut rng)),
            Variant::RcSecondOrder => Device::Rc(RcPuf::sample(config, true, &mut rng)),
            Variant::Arbiter => Device::Arbiter(ArbiterChain::sample(n_c, &mut rng)),
            Variant::XorArbiter => Device::XorArbiter(XorArbiterPuf::new(
                (0..config.xor_chains)
                    .map(|_| ArbiterChain::sample(n_c, &mut rng))
                    .collect(),
            )),
            Variant::FfArbiter => {
                Device::FfArbiter(FfArbiterPuf::sample(n_c, config.ff_loops, &mut rng))
            }
            Variant::RingOscillator => Device::RingOscillator(RingOscillatorPuf::sample(
                n_c,
                config.response_bits,
                &mut rng,
            )),
            Variant::IdealEntropy => Device::IdealEntropy(IdealEntropyPuf::new(
                [rng.random(), rng.random()],
                config.response_bits,
                config.bias_p,
            )),
        };
        Ok(PufInstance {
            config: config.clone(),
            device,
        })
    }

    /// Wraps a hand-built device. Widths in `config` must match the device.
    pub fn from_device(config: PufConfig, device: Device) -> Self {
        PufInstance { config, device }
    }

    pub fn config(&self) -> &PufConfig {
        &self.config
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    pub fn challenge_bits(&self) -> usize {
        self.config.challenge_bits
    }

    pub fn response_bits(&self) -> usize {
        self.config.response_bits
    }

    pub fn evaluate(&self, challenge: &Challenge) -> Result<Response> {
        if challenge.len() != self.challenge_bits() {
            return Err(Error::WidthMismatch {
                expected: self.challenge_bits(),
                actual: challenge.len(),
            });
        }
        let single = |b: bool| BitVector::from_bools(&[b]);
        Ok(match &self.device {
            Device::Rc(d) => d.evaluate(challenge),
            Device::Arbiter(d) => single(d.evaluate(challenge)),
            Device::XorArbiter(d) => single(d.evaluate(challenge)),
            Device::FfArbiter(d) => single(d.evaluate(challenge)),
            Device::RingOscillator(d) => d.evaluate(challenge),
            Device::IdealEntropy(d) => d.evaluate(challenge),
        })
    }

    /// [`PufInstance::evaluate`] with every bit flipped independently with
    /// probability `flip_rate`, using randomness drawn only from `noise_seed`.
    pub fn evaluate_noisy(&self, challenge: &Challenge, flip_rate: f64, noise_seed: u64) -> Result<Response> {
        if !(0.0..=1.0).contains(&flip_rate) {
            return Err(Error::InvalidArgument(format!(
                "flip_rate must lie in [0, 1], got {flip_rate}"
            )));
        }
        let mut r = self.evaluate(challenge)?;
        let mut rng = mix::rng(noise_seed);
        for j in 0..r.len() {
            if rng.random::<f64>() < flip_rate {
                r.flip(j);
            }
        }
        Ok(r)
    }
}

pub fn create_instance(config: &PufConfig) -> Result<PufInstance> {
    PufInstance::create(config)
}

/// `n_devices` instances; device `i` uses seed `child_seed(config.seed, i)`.
pub fn device_population(config: &PufConfig, n_devices: usize) -> Result<Vec<PufInstance>> {
    if n_devices < 2 {
        return Err(Error::InvalidArgument(format!(
            "a population needs at least 2 devices, got {n_devices}"
        )));
    }
    (0..n_devices)
        .map(|i| {
            let mut cfg = config.clone();
            cfg.seed = mix::child_seed(config.seed, i as u64);
            PufInstance::create(&cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_challenges(n: usize, width: usize, seed: u64) -> Vec<Challenge> {
        let mut rng = mix::rng(seed);
        (0..n).map(|_| BitVector::random(&mut rng, width)).collect()
    }

    fn responses(inst: &PufInstance, cs: &[Challenge]) -> Vec<Response> {
        cs.iter().map(|c| inst.evaluate(c).unwrap()).collect()
    }

    #[test]
    fn same_config_same_device() {
        let cs = random_challenges(1000, 32, 5);
        for v in Variant::ALL {
            let cfg = PufConfig::new(v, 11);
            let a = PufInstance::create(&cfg).unwrap();
            let b = PufInstance::create(&cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(responses(&a, &cs), responses(&b, &cs), "{v}");
        }
    }

    #[test]
    fn different_seed_different_responses() {
        let cs = random_challenges(1000, 32, 6);
        for v in Variant::ALL {
            let a = PufInstance::create(&PufConfig::new(v, 1)).unwrap();
            let b = PufInstance::create(&PufConfig::new(v, 2)).unwrap();
            assert_ne!(responses(&a, &cs), responses(&b, &cs), "{v}");
        }
    }

    #[test]
    fn width_mismatch() {
        let inst = PufInstance::create(&PufConfig::new(Variant::IdealEntropy, 0)).unwrap();
        assert!(matches!(
            inst.evaluate(&BitVector::zeros(31)),
            Err(Error::WidthMismatch { expected: 32, actual: 31 })
        ));
    }

    #[test]
    fn noisy_extremes() {
        let inst = PufInstance::create(&PufConfig::new(Variant::RcFirstOrder, 3)).unwrap();
        for c in random_challenges(50, 32, 9) {
            let clean = inst.evaluate(&c).unwrap();
            assert_eq!(inst.evaluate_noisy(&c, 0.0, 1).unwrap(), clean);
            assert_eq!(inst.evaluate_noisy(&c, 1.0, 1).unwrap(), clean.not());
        }
        assert!(inst.evaluate_noisy(&BitVector::zeros(32), 1.5, 0).is_err());
        assert!(inst.evaluate_noisy(&BitVector::zeros(32), -0.1, 0).is_err());
    }

    #[test]
    fn noisy_flip_rate_matches_binomial() {
        let inst = PufInstance::create(&PufConfig::new(Variant::IdealEntropy, 3)).unwrap();
        let cs = random_challenges(10_000, 32, 10);
        let mut dist = 0usize;
        for (i, c) in cs.iter().enumerate() {
            let clean = inst.evaluate(c).unwrap();
            let noisy = inst.evaluate_noisy(c, 0.05, mix::child_seed(77, i as u64)).unwrap();
            dist += clean.hamming_distance(&noisy).unwrap();
        }
        let rate = dist as f64 / (10_000.0 * 32.0);
        assert!((rate - 0.05).abs() < 0.007, "intra-distance {rate}");
    }

    #[test]
    fn population_rules() {
        let cfg = PufConfig::new(Variant::Arbiter, 8).with_widths(32, 1);
        assert!(device_population(&cfg, 1).is_err());
        let pair = device_population(&cfg, 2).unwrap();
        assert_ne!(pair[0], pair[1]);
        assert_eq!(device_population(&cfg, 4).unwrap(), device_population(&cfg, 4).unwrap());
    }

    #[test]
    fn arbiter_population_inter_distance() {
        let cfg = PufConfig::new(Variant::Arbiter, 21);
        let pop = device_population(&cfg, 16).unwrap();
        let cs = random_challenges(1000, 32, 12);
        let resp: Vec<Vec<Response>> = pop.iter().map(|d| responses(d, &cs)).collect();
        let (mut total, mut pairs) = (0.0, 0);
        for a in 0..16 {
            for b in a + 1..16 {
                let d: usize = (0..cs.len())
                    .map(|k| resp[a][k].hamming_distance(&resp[b][k]).unwrap())
                    .sum();
                total += d as f64 / cs.len() as f64;
                pairs += 1;
            }
        }
        let mean = total / pairs as f64;
        assert!((mean - 0.5).abs() < 0.05, "inter-distance {mean}");
    }

    #[test]
    fn arbiter_matches_brute_force_delay_sum() {
        let mut rng = mix::rng(31);
        for n in 1..=8usize {
            let chain = ArbiterChain::sample(n, &mut rng);
            for v in 0..(1u64 << n) {
                let c = BitVector::from_u64(v, n);
                // phi_i = prod_{j >= i} (1 - 2 c_j), by definition
                let mut sum = chain.weights()[n];
                for i in 0..n {
                    let phi: f64 = (i..n).map(|j| 1.0 - 2.0 * ((v >> j) & 1) as f64).product();
                    sum += chain.weights()[i] * phi;
                }
                assert_eq!(chain.evaluate(&c), sum > 0.0);
                assert!((chain.delay_difference(&c) - sum).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ideal_entropy_bias() {
        let inst = PufInstance::create(&PufConfig::new(Variant::IdealEntropy, 4)).unwrap();
        let n = 50_000;
        let mut ones = [0usize; 32];
        for c in random_challenges(n, 32, 13) {
            let r = inst.evaluate(&c).unwrap();
            for (j, o) in ones.iter_mut().enumerate() {
                *o += r.get(j) as usize;
            }
        }
        let p = DEFAULT_BIAS;
        let tol = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        // 3 sigma per bit: allow the occasional excursion among 32 bits
        let outside = ones
            .iter()
            .filter(|&&o| (o as f64 / n as f64 - p).abs() > tol)
            .count();
        assert!(outside <= 1, "{outside} bits outside 3 sigma: {ones:?}");
    }

    #[test]
    fn ideal_entropy_avalanche() {
        let inst = PufInstance::create(&PufConfig::new(Variant::IdealEntropy, 5).clone()).unwrap();
        let mut rng = mix::rng(14);
        let trials = 10_000;
        let mut flips = [0usize; 32];
        for _ in 0..trials {
            let c = BitVector::random(&mut rng, 32);
            let mut c2 = c.clone();
            c2.flip(rng.random_range(0..32));
            let d = inst.evaluate(&c).unwrap().xor(&inst.evaluate(&c2).unwrap()).unwrap();
            for (j, f) in flips.iter_mut().enumerate() {
                *f += d.get(j) as usize;
            }
        }
        for f in flips {
            let rate = f as f64 / trials as f64;
            assert!((rate - 0.5).abs() < 0.05, "flip rate {rate}");
        }
    }

    #[test]
    fn rc_saturation_gives_constant_response() {
        let mut cfg = PufConfig::new(Variant::RcFirstOrder, 6);
        cfg.pulse_width = PulseWidth::Us2;
        let inst = PufInstance::create(&cfg).unwrap();
        for c in random_challenges(200, 32, 15) {
            assert_eq!(inst.evaluate(&c).unwrap(), BitVector::zeros(32));
        }
    }

    #[test]
    fn uid_is_an_involution() {
        for variant in [Variant::RcFirstOrder, Variant::RcSecondOrder] {
            let mut cfg = PufConfig::new(variant, 17);
            let plain = PufInstance::create(&cfg).unwrap();
            cfg.uid_enabled = true;
            let with_uid = PufInstance::create(&cfg).unwrap();
            let Device::Rc(rc) = with_uid.device() else { unreachable!() };
            let uid = rc.uid_word().unwrap().clone();
            for c in random_challenges(200, 32, 16) {
                let r = with_uid.evaluate(&c).unwrap();
                assert_eq!(r.xor(&uid).unwrap(), rc.raw_response(&c));
                assert_eq!(r.xor(&uid).unwrap().xor(&uid).unwrap(), r);
            }
            // the uid word is drawn after the network, so the networks agree
            let Device::Rc(rc_plain) = plain.device() else { unreachable!() };
            assert_eq!(rc_plain.stages(), rc.stages());
        }
    }

    #[test]
    fn rc_first_order_delay_formula() {
        let sec = |r: f64, c: f64| RcSection { r_ohms: r, c_farads: c };
        let b = |r: f64| Branch { sections: vec![sec(r, 1e-9)] };
        let stages = vec![vec![(b(1e3), b(2e3)), (b(1e3), b(3e3))]];
        let rc = RcPuf::from_parts(stages, vec![4e3 * 1e-9 * CHARGE_FACTOR], None, 1.0);
        // 00 -> 2e-6 ln2, 10 -> 3e-6 ln2, 01 -> 4e-6 ln2, 11 -> 5e-6 ln2
        let expect = [false, false, false, true];
        for v in 0..4u64 {
            let c = BitVector::from_u64(v, 2);
            assert_eq!(rc.raw_response(&c).get(0), expect[v as usize], "challenge {v}");
        }
        let second = Branch { sections: vec![sec(1e3, 1e-9), sec(4e3, 1e-9)] };
        let (t1, t2) = (1e-6 * CHARGE_FACTOR, 4e-6 * CHARGE_FACTOR);
        assert!((second.delay() - (t1 + t2 + 2e-6 * CHARGE_FACTOR)).abs() < 1e-18);
        assert!((second.delay() - (t1 + t2 + (t1 * t2).sqrt())).abs() < 1e-18);
    }

    #[test]
    fn rc_components_positive() {
        let inst = PufInstance::create(&PufConfig::new(Variant::RcSecondOrder, 18)).unwrap();
        let Device::Rc(rc) = inst.device() else { unreachable!() };
        for lane in rc.stages() {
            for (a, b) in lane {
                for s in a.sections.iter().chain(&b.sections) {
                    assert!(s.r_ohms > 0.0 && s.c_farads > 0.0);
                }
            }
        }
        assert!(rc.reference_delays().iter().all(|&d| d > 0.0));
    }
}
