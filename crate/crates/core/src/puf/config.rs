use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kv::KvMap;
use crate::mix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    RcFirstOrder,
    RcSecondOrder,
    IdealEntropy,
    Arbiter,
    XorArbiter,
    FfArbiter,
    RingOscillator,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::RcFirstOrder,
        Variant::RcSecondOrder,
        Variant::IdealEntropy,
        Variant::Arbiter,
        Variant::XorArbiter,
        Variant::FfArbiter,
        Variant::RingOscillator,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::RcFirstOrder => "rc-first-order",
            Variant::RcSecondOrder => "rc-second-order",
            Variant::IdealEntropy => "ideal-entropy",
            Variant::Arbiter => "arbiter",
            Variant::XorArbiter => "xor-arbiter",
            Variant::FfArbiter => "ff-arbiter",
            Variant::RingOscillator => "ring-oscillator",
        }
    }

    pub fn is_arbiter_family(self) -> bool {
        matches!(self, Variant::Arbiter | Variant::XorArbiter | Variant::FfArbiter)
    }

    pub fn is_rc(self) -> bool {
        matches!(self, Variant::RcFirstOrder | Variant::RcSecondOrder)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown PUF variant {s:?}")))
    }
}

/// Excitation pulse width of the RC network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PulseWidth {
    Us2,
    Us32,
}

impl PulseWidth {
    pub fn from_micros(us: u32) -> Result<Self> {
        match us {
            2 => Ok(PulseWidth::Us2),
            32 => Ok(PulseWidth::Us32),
            other => Err(Error::InvalidConfig(format!(
                "pulse_width_us must be 2 or 32, got {other}"
            ))),
        }
    }

    pub fn micros(self) -> u32 {
        match self {
            PulseWidth::Us2 => 2,
            PulseWidth::Us32 => 32,
        }
    }

    pub fn seconds(self) -> f64 {
        self.micros() as f64 * 1e-6
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PufConfig {
    pub variant: Variant,
    pub challenge_bits: usize,
    pub response_bits: usize,
    pub uid_enabled: bool,
    pub pulse_width: PulseWidth,
    /// Number of XORed chains (xor-arbiter only).
    pub xor_chains: usize,
    /// Number of feed-forward loops (ff-arbiter only).
    pub ff_loops: usize,
    /// Target per-bit probability of a one (ideal-entropy only).
    pub bias_p: f64,
    pub seed: u64,
}

pub const DEFAULT_BIAS: f64 = 0.5501;

impl PufConfig {
    /// Defaults for `variant`: 32-bit challenges, 32-bit responses (1 for the arbiter family).
    pub fn new(variant: Variant, seed: u64) -> Self {
        PufConfig {
            variant,
            challenge_bits: 32,
            response_bits: if variant.is_arbiter_family() { 1 } else { 32 },
            uid_enabled: false,
            pulse_width: PulseWidth::Us32,
            xor_chains: 4,
            ff_loops: 2,
            bias_p: DEFAULT_BIAS,
            seed,
        }
    }

    pub fn with_widths(mut self, challenge_bits: usize, response_bits: usize) -> Self {
        self.challenge_bits = challenge_bits;
        self.response_bits = response_bits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.challenge_bits == 0 || self.response_bits == 0 {
            return bad("challenge and response widths must be at least 1".into());
        }
        if !(self.bias_p > 0.0 && self.bias_p < 1.0) {
            return bad(format!("bias_p must lie in (0, 1), got {}", self.bias_p));
        }
        if self.variant.is_arbiter_family() && self.response_bits != 1 {
            return bad(format!("{} produces 1-bit responses, n_r = {}", self.variant, self.response_bits));
        }
        if self.uid_enabled && !self.variant.is_rc() {
            return bad(format!("UID integration applies to RC variants only, not {}", self.variant));
        }
        match self.variant {
            Variant::XorArbiter if self.xor_chains == 0 => bad("xor_chains must be at least 1".into()),
            Variant::FfArbiter if self.ff_loops == 0 || self.ff_loops >= self.challenge_bits => bad(format!(
                "ff_loops must lie in [1, n_c - 1], got {} for n_c = {}",
                self.ff_loops, self.challenge_bits
            )),
            _ => Ok(()),
        }
    }

    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::default();
        kv.insert("variant", self.variant);
        kv.insert("n_c", self.challenge_bits);
        kv.insert("n_r", self.response_bits);
        kv.insert("uid_enabled", self.uid_enabled);
        kv.insert("pulse_width_us", self.pulse_width.micros());
        kv.insert("xor_chains", self.xor_chains);
        kv.insert("ff_loops", self.ff_loops);
        kv.insert("bias_p", self.bias_p);
        kv.insert("seed", self.seed);
        kv
    }

    /// Consumes the PUF keys from `kv`; missing keys take the variant's defaults.
    pub fn from_kv(kv: &mut KvMap) -> Result<Self> {
        let variant: Variant = kv.take_required::<String>("variant")?.parse()?;
        let seed = kv.take_or("seed", 0u64)?;
        let mut cfg = PufConfig::new(variant, seed);
        cfg.challenge_bits = kv.take_or("n_c", cfg.challenge_bits)?;
        cfg.response_bits = kv.take_or("n_r", cfg.response_bits)?;
        cfg.uid_enabled = kv.take_or("uid_enabled", cfg.uid_enabled)?;
        if let Some(us) = kv.take::<u32>("pulse_width_us")? {
            cfg.pulse_width = PulseWidth::from_micros(us)?;
        }
        cfg.xor_chains = kv.take_or("xor_chains", cfg.xor_chains)?;
        cfg.ff_loops = kv.take_or("ff_loops", cfg.ff_loops)?;
        cfg.bias_p = kv.take_or("bias_p", cfg.bias_p)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a standalone config file; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KvMap::parse(text)?;
        let cfg = Self::from_kv(&mut kv)?;
        kv.finish()?;
        Ok(cfg)
    }

    pub fn render(&self) -> String {
        self.to_kv().render()
    }

    /// Stable 64-bit identifier of the configuration.
    pub fn fingerprint(&self) -> u64 {
        fingerprint_bytes(self.render().as_bytes())
    }
}

/// FNV-1a over `bytes`, finished with an avalanche step.
pub fn fingerprint_bytes(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    mix::avalanche(h)
}
