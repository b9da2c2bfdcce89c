//! Multi-label evaluation metrics, bit-level response statistics and PUF
//! quality measures.

use serde::{Deserialize, Serialize};

use crate::bits::{BitMatrix, Challenge};
use crate::error::{Error, Result};
use crate::mix;
use crate::puf::PufInstance;

/// Exact fraction `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn complement(self) -> Ratio {
        Ratio { num: self.den - self.num, den: self.den }
    }
}

fn check_shapes(predicted: &BitMatrix, target: &BitMatrix) -> Result<()> {
    if predicted.shape() != target.shape() {
        return Err(Error::ShapeMismatch(format!(
            "predicted {:?} vs target {:?}",
            predicted.shape(),
            target.shape()
        )));
    }
    if predicted.rows() == 0 || predicted.cols() == 0 {
        return Err(Error::ShapeMismatch("empty prediction matrix".into()));
    }
    Ok(())
}

fn matching_bits(predicted: &BitMatrix, target: &BitMatrix) -> u64 {
    predicted
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .filter(|(a, b)| a == b)
        .count() as u64
}

/// Fraction of response bits predicted correctly.
pub fn bitwise_accuracy(predicted: &BitMatrix, target: &BitMatrix) -> Result<Ratio> {
    check_shapes(predicted, target)?;
    Ok(Ratio {
        num: matching_bits(predicted, target),
        den: (predicted.rows() * predicted.cols()) as u64,
    })
}

/// Fraction of response bits predicted incorrectly.
pub fn hamming_loss(predicted: &BitMatrix, target: &BitMatrix) -> Result<Ratio> {
    Ok(bitwise_accuracy(predicted, target)?.complement())
}

/// Fraction of responses with every bit correct.
pub fn exact_match(predicted: &BitMatrix, target: &BitMatrix) -> Result<Ratio> {
    check_shapes(predicted, target)?;
    let rows = (0..predicted.rows())
        .filter(|&i| predicted.row(i) == target.row(i))
        .count();
    Ok(Ratio { num: rows as u64, den: predicted.rows() as u64 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bitwise_accuracy: f64,
    pub hamming_loss: f64,
    pub exact_match: f64,
    pub n_samples: usize,
    pub n_bits: usize,
    #[serde(skip)]
    pub correct_bits: u64,
    #[serde(skip)]
    pub exact_rows: u64,
}

impl EvalReport {
    pub fn evaluate(predicted: &BitMatrix, target: &BitMatrix) -> Result<Self> {
        let acc = bitwise_accuracy(predicted, target)?;
        let em = exact_match(predicted, target)?;
        Ok(EvalReport {
            bitwise_accuracy: acc.value(),
            hamming_loss: acc.complement().value(),
            exact_match: em.value(),
            n_samples: predicted.rows(),
            n_bits: predicted.cols(),
            correct_bits: acc.num,
            exact_rows: em.num,
        })
    }

    pub fn csv_header() -> &'static str {
        "bitwise_accuracy,hamming_loss,exact_match,n_samples,n_bits"
    }

    /// Percentages to two decimals, counts as integers.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.2},{:.2},{:.2},{},{}",
            100.0 * self.bitwise_accuracy,
            100.0 * self.hamming_loss,
            100.0 * self.exact_match,
            self.n_samples,
            self.n_bits
        )
    }
}

/// Binary Shannon entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitStats {
    pub per_bit_mean: Vec<f64>,
    pub per_bit_variance: Vec<f64>,
    pub per_bit_entropy: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub avg_entropy: f64,
    pub min_entropy: f64,
    pub max_entropy: f64,
}

impl BitStats {
    pub fn csv_header() -> &'static str {
        "mean,var,avg_entropy,min_entropy,max_entropy"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.4},{:.4},{:.4},{:.4},{:.4}",
            self.mean, self.variance, self.avg_entropy, self.min_entropy, self.max_entropy
        )
    }
}

/// Per-bit and pooled statistics of an `N x n_r` response matrix.
pub fn bit_stats(responses: &BitMatrix) -> Result<BitStats> {
    let (n, cols) = responses.shape();
    if n == 0 || cols == 0 {
        return Err(Error::ShapeMismatch("bit statistics need a non-empty matrix".into()));
    }
    let mut ones = vec![0u64; cols];
    for i in 0..n {
        for (o, &b) in ones.iter_mut().zip(responses.row(i)) {
            *o += b as u64;
        }
    }
    let per_bit_mean: Vec<f64> = ones.iter().map(|&o| o as f64 / n as f64).collect();
    let per_bit_variance: Vec<f64> = per_bit_mean.iter().map(|p| p * (1.0 - p)).collect();
    let per_bit_entropy: Vec<f64> = per_bit_mean.iter().map(|&p| binary_entropy(p)).collect();
    let mean = ones.iter().sum::<u64>() as f64 / (n * cols) as f64;
    Ok(BitStats {
        mean,
        variance: mean * (1.0 - mean),
        avg_entropy: per_bit_entropy.iter().sum::<f64>() / cols as f64,
        min_entropy: per_bit_entropy.iter().copied().fold(f64::INFINITY, f64::min),
        max_entropy: per_bit_entropy.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        per_bit_mean,
        per_bit_variance,
        per_bit_entropy,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PufQualityReport {
    /// Mean pairwise inter-device fractional Hamming distance.
    pub uniqueness: f64,
    /// One minus the mean intra-device fractional distance between a clean
    /// read and noisy re-reads.
    pub reliability: f64,
    /// Mean fractional Hamming weight.
    pub uniformity: f64,
    /// Mean of each response bit across devices and challenges.
    pub bit_aliasing: Vec<f64>,
    pub bit_aliasing_max_deviation: f64,
    /// Average per-bit entropy of the pooled responses.
    pub randomness_score: f64,
}

impl PufQualityReport {
    pub fn csv_header() -> &'static str {
        "uniqueness,reliability,uniformity,bit_aliasing_max_deviation,randomness_score"
    }

    /// Values as percentages with two decimals.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.2},{:.2},{:.2},{:.2},{:.2}",
            100.0 * self.uniqueness,
            100.0 * self.reliability,
            100.0 * self.uniformity,
            100.0 * self.bit_aliasing_max_deviation,
            100.0 * self.randomness_score
        )
    }
}

/// Quality measures of a device population over shared challenges.
///
/// Each device re-reads every challenge `repeats` times with `flip_rate`
/// noise; read `r` of challenge `k` on device `d` uses noise seed
/// `child(child(child(noise_seed, d), k), r)`.
pub fn puf_quality(
    population: &[PufInstance],
    challenges: &[Challenge],
    repeats: usize,
    flip_rate: f64,
    noise_seed: u64,
) -> Result<PufQualityReport> {
    if population.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "quality metrics need at least 2 devices, got {}",
            population.len()
        )));
    }
    if repeats < 2 {
        return Err(Error::InvalidArgument(format!("repeats must be at least 2, got {repeats}")));
    }
    if challenges.is_empty() {
        return Err(Error::InvalidArgument("quality metrics need at least one challenge".into()));
    }
    let n_r = population[0].response_bits();
    if population.iter().any(|d| d.response_bits() != n_r) {
        return Err(Error::InvalidArgument("devices disagree on response width".into()));
    }

    // clean[d][k]
    let clean: Vec<Vec<_>> = population
        .iter()
        .map(|d| challenges.iter().map(|c| d.evaluate(c)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let n_dev = population.len();
    let n_ch = challenges.len();
    let mut inter = 0u64;
    for a in 0..n_dev {
        for b in a + 1..n_dev {
            for (ra, rb) in clean[a].iter().zip(&clean[b]) {
                inter += ra.hamming_distance(rb)? as u64;
            }
        }
    }
    let pairs = (n_dev * (n_dev - 1) / 2) as f64;
    let uniqueness = inter as f64 / (pairs * n_ch as f64 * n_r as f64);

    let mut intra = 0u64;
    for (d, dev) in population.iter().enumerate() {
        let dev_seed = mix::child_seed(noise_seed, d as u64);
        for (k, c) in challenges.iter().enumerate() {
            let ch_seed = mix::child_seed(dev_seed, k as u64);
            for r in 0..repeats {
                let noisy = dev.evaluate_noisy(c, flip_rate, mix::child_seed(ch_seed, r as u64))?;
                intra += noisy.hamming_distance(&clean[d][k])? as u64;
            }
        }
    }
    let reliability = 1.0 - intra as f64 / (n_dev * n_ch * repeats * n_r) as f64;

    let pooled = BitMatrix::from_rows(n_r, clean.iter().flatten())?;
    let stats = bit_stats(&pooled)?;
    let bit_aliasing_max_deviation = stats
        .per_bit_mean
        .iter()
        .map(|m| (m - 0.5).abs())
        .fold(0.0, f64::max);
    Ok(PufQualityReport {
        uniqueness,
        reliability,
        uniformity: stats.mean,
        bit_aliasing_max_deviation,
        randomness_score: stats.avg_entropy,
        bit_aliasing: stats.per_bit_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;
    use crate::puf::{device_population, Device, IdealEntropyPuf, PufConfig, Variant};

    fn m(rows: usize, cols: usize, bits: &[u8]) -> BitMatrix {
        BitMatrix::from_vec(rows, cols, bits.to_vec()).unwrap()
    }

    #[test]
    fn identity_and_complement() {
        let a = m(2, 3, &[1, 0, 1, 0, 0, 1]);
        let not_a = m(2, 3, &[0, 1, 0, 1, 1, 0]);
        assert_eq!(bitwise_accuracy(&a, &a).unwrap().value(), 1.0);
        assert_eq!(hamming_loss(&a, &a).unwrap().value(), 0.0);
        assert_eq!(exact_match(&a, &a).unwrap().value(), 1.0);
        assert_eq!(bitwise_accuracy(&a, &not_a).unwrap().value(), 0.0);
        assert_eq!(hamming_loss(&a, &not_a).unwrap().value(), 1.0);
    }

    #[test]
    fn sixteen_differing_bits_of_64() {
        let t = BitMatrix::zeros(2, 32);
        let mut p = t.clone();
        for j in 0..8 {
            p.set(0, j, true);
            p.set(1, 31 - j, true);
        }
        assert_eq!(bitwise_accuracy(&p, &t).unwrap(), Ratio { num: 48, den: 64 });
        assert_eq!(bitwise_accuracy(&p, &t).unwrap().value(), 0.75);
    }

    #[test]
    fn one_flipped_row_of_four() {
        let t = BitMatrix::zeros(4, 32);
        let mut p = t.clone();
        p.set(2, 5, true);
        assert_eq!(exact_match(&p, &t).unwrap().value(), 0.75);
    }

    #[test]
    fn shape_errors() {
        assert!(bitwise_accuracy(&BitMatrix::zeros(2, 3), &BitMatrix::zeros(3, 2)).is_err());
        assert!(bitwise_accuracy(&BitMatrix::zeros(0, 3), &BitMatrix::zeros(0, 3)).is_err());
        assert!(exact_match(&BitMatrix::zeros(1, 3), &BitMatrix::zeros(1, 4)).is_err());
        assert!(bit_stats(&BitMatrix::zeros(0, 4)).is_err());
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_eq!(binary_entropy(0.5), 1.0);
        // -p log2 p - q log2 q at p = 0.5501
        let h = binary_entropy(0.5501);
        assert!((h - 0.992_745_474).abs() < 1e-9, "{h}");
    }

    #[test]
    fn bit_stats_columns() {
        let mut r = BitMatrix::zeros(4, 2);
        r.set(0, 1, true);
        r.set(1, 1, true);
        let s = bit_stats(&r).unwrap();
        assert_eq!(s.per_bit_mean, vec![0.0, 0.5]);
        assert_eq!(s.per_bit_variance, vec![0.0, 0.25]);
        assert_eq!(s.per_bit_entropy, vec![0.0, 1.0]);
        assert_eq!(s.mean, 0.25);
        assert_eq!(s.variance, 0.25 * 0.75);
        assert_eq!((s.min_entropy, s.max_entropy, s.avg_entropy), (0.0, 1.0, 0.5));
    }

    #[test]
    fn complementary_devices_are_fully_unique() {
        let cfg = PufConfig::new(Variant::IdealEntropy, 0).with_widths(8, 4);
        let a = PufInstance::create(&cfg).unwrap();
        let key = match a.device() {
            Device::IdealEntropy(d) => d.key(),
            _ => unreachable!(),
        };
        // bias 1 answers all ones, bias 0 all zeros
        let ones = PufInstance::from_device(cfg.clone(), Device::IdealEntropy(IdealEntropyPuf::new(key, 4, 1.0)));
        let zeros = PufInstance::from_device(cfg, Device::IdealEntropy(IdealEntropyPuf::new(key, 4, 0.0)));
        let mut rng = mix::rng(1);
        let cs: Vec<_> = (0..20).map(|_| BitVector::random(&mut rng, 8)).collect();
        let q = puf_quality(&[ones, zeros], &cs, 2, 0.0, 3).unwrap();
        assert_eq!(q.uniqueness, 1.0);
        assert_eq!(q.reliability, 1.0);
        assert_eq!(q.uniformity, 0.5);
    }

    #[test]
    fn quality_argument_errors() {
        let cfg = PufConfig::new(Variant::IdealEntropy, 0);
        let pop = device_population(&cfg, 2).unwrap();
        let cs = vec![BitVector::zeros(32)];
        assert!(puf_quality(&pop[..1], &cs, 2, 0.0, 0).is_err());
        assert!(puf_quality(&pop, &cs, 1, 0.0, 0).is_err());
        assert!(puf_quality(&pop, &[], 2, 0.0, 0).is_err());
    }
}
