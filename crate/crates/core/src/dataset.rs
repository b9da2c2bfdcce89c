//! Challenge-response datasets: generation, 70:20:10 partitioning and the
//! `CRP1` binary / hex CSV encodings.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::bits::{BitMatrix, BitVector, Challenge, Response};
use crate::error::{Error, Result};
use crate::mix;
use crate::puf::PufInstance;

pub const MAGIC: [u8; 4] = *b"CRP1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
/// Records generated from one child seed.
pub const GENERATION_CHUNK: usize = 4096;
pub const MIN_SPLIT_COUNT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crp {
    pub challenge: Challenge,
    pub response: Response,
}

/// Where a dataset came from. Not part of the encoded file content.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub config_fingerprint: u64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct CrpDataset {
    challenge_bits: usize,
    response_bits: usize,
    records: Vec<Crp>,
    pub provenance: Option<Provenance>,
}

/// Equality covers the widths and the records; provenance is ignored.
impl PartialEq for CrpDataset {
    fn eq(&self, other: &Self) -> bool {
        self.challenge_bits == other.challenge_bits
            && self.response_bits == other.response_bits
            && self.records == other.records
    }
}

impl Eq for CrpDataset {}

impl CrpDataset {
    pub fn new(challenge_bits: usize, response_bits: usize, records: Vec<Crp>) -> Result<Self> {
        if challenge_bits == 0 || response_bits == 0 {
            return Err(Error::InvalidArgument("dataset widths must be at least 1".into()));
        }
        for r in &records {
            if r.challenge.len() != challenge_bits {
                return Err(Error::WidthMismatch { expected: challenge_bits, actual: r.challenge.len() });
            }
            if r.response.len() != response_bits {
                return Err(Error::WidthMismatch { expected: response_bits, actual: r.response.len() });
            }
        }
        Ok(CrpDataset { challenge_bits, response_bits, records, provenance: None })
    }

    pub fn challenge_bits(&self) -> usize {
        self.challenge_bits
    }

    pub fn response_bits(&self) -> usize {
        self.response_bits
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Crp] {
        &self.records
    }

    pub fn challenges(&self) -> impl Iterator<Item = &Challenge> {
        self.records.iter().map(|r| &r.challenge)
    }

    pub fn responses(&self) -> impl Iterator<Item = &Response> {
        self.records.iter().map(|r| &r.response)
    }

    /// Challenges as an `N x n_c` 0/1 matrix.
    pub fn challenge_matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(self.challenge_bits, self.challenges()).expect("widths checked on construction")
    }

    /// Responses as an `N x n_r` 0/1 matrix.
    pub fn response_matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(self.response_bits, self.responses()).expect("widths checked on construction")
    }

    /// Records at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> CrpDataset {
        CrpDataset {
            challenge_bits: self.challenge_bits,
            response_bits: self.response_bits,
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            provenance: self.provenance,
        }
    }
}

/// Draws `count` uniform challenges (with replacement) and records the
/// instance's responses in draw order.
///
/// Records are produced in chunks of [`GENERATION_CHUNK`]; chunk `k` draws from
/// `child_seed(seed, k)`, so the output does not depend on how chunks are scheduled.
pub fn generate(instance: &PufInstance, count: usize, seed: u64) -> Result<CrpDataset> {
    if count == 0 {
        return Err(Error::InvalidArgument("dataset count must be at least 1".into()));
    }
    let n_c = instance.challenge_bits();
    let mut records = Vec::with_capacity(count);
    for (k, start) in (0..count).step_by(GENERATION_CHUNK).enumerate() {
        let mut rng = mix::rng(mix::child_seed(seed, k as u64));
        let end = (start + GENERATION_CHUNK).min(count);
        for _ in start..end {
            let challenge = BitVector::random(&mut rng, n_c);
            let response = instance.evaluate(&challenge)?;
            records.push(Crp { challenge, response });
        }
    }
    let mut ds = CrpDataset::new(n_c, instance.response_bits(), records)?;
    ds.provenance = Some(Provenance {
        config_fingerprint: instance.config().fingerprint(),
        seed,
    });
    Ok(ds)
}

/// Partition sizes for `n` records: (train, validation, test).
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let val = n / 5;
    let test = n / 10;
    (n - val - test, val, test)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitDataset {
    pub train: CrpDataset,
    pub validation: CrpDataset,
    pub test: CrpDataset,
    pub split_seed: u64,
    /// Source record indices of each partition, in partition order.
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// 70:20:10 split over a seeded permutation of the record indices.
/// Validation takes `floor(N/5)`, test `floor(N/10)`, train the remainder.
pub fn split(dataset: &CrpDataset, split_seed: u64) -> Result<SplitDataset> {
    let n = dataset.len();
    if n < MIN_SPLIT_COUNT {
        return Err(Error::DatasetTooSmall { count: n, min: MIN_SPLIT_COUNT });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut mix::rng(split_seed));
    let (_, n_val, n_test) = split_sizes(n);
    let validation_indices = perm[..n_val].to_vec();
    let test_indices = perm[n_val..n_val + n_test].to_vec();
    let train_indices = perm[n_val + n_test..].to_vec();
    Ok(SplitDataset {
        train: dataset.select(&train_indices),
        validation: dataset.select(&validation_indices),
        test: dataset.select(&test_indices),
        split_seed,
        train_indices,
        validation_indices,
        test_indices,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    Binary,
    Csv,
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(DatasetFormat::Binary),
            "csv" => Ok(DatasetFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown dataset format {other:?}"))),
        }
    }
}

pub fn encode_binary(dataset: &CrpDataset) -> Result<Vec<u8>> {
    let width = |w: usize| {
        u8::try_from(w).map_err(|_| Error::InvalidArgument(format!("width {w} exceeds 255 bits")))
    };
    let (c, r) = (width(dataset.challenge_bits)?, width(dataset.response_bits)?);
    let rec_len = dataset.challenge_bits.div_ceil(8) + dataset.response_bits.div_ceil(8);
    let mut out = Vec::with_capacity(HEADER_LEN + rec_len * dataset.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(c);
    out.push(r);
    out.extend_from_slice(&(dataset.len() as u64).to_le_bytes());
    for rec in &dataset.records {
        rec.challenge.write_bytes(&mut out);
        rec.response.write_bytes(&mut out);
    }
    Ok(out)
}

pub fn decode_binary(bytes: &[u8]) -> Result<CrpDataset> {
    if bytes.len() < 4 {
        return Err(Error::TruncatedFile);
    }
    if bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let (n_c, n_r) = (bytes[6] as usize, bytes[7] as usize);
    if n_c == 0 || n_r == 0 {
        return Err(Error::InvalidArgument("zero width in header".into()));
    }
    let declared = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let (cb, rb) = (n_c.div_ceil(8), n_r.div_ceil(8));
    let body = &bytes[HEADER_LEN..];
    let found = (body.len() / (cb + rb)) as u64;
    if found < declared || (found == declared && !body.len().is_multiple_of(cb + rb)) {
        return Err(Error::TruncatedFile);
    }
    if found > declared {
        return Err(Error::CountMismatch { declared, found });
    }
    let mut records = Vec::with_capacity(declared as usize);
    for rec in body.chunks_exact(cb + rb) {
        records.push(Crp {
            challenge: BitVector::from_bytes(&rec[..cb], n_c)?,
            response: BitVector::from_bytes(&rec[cb..], n_r)?,
        });
    }
    CrpDataset::new(n_c, n_r, records)
}

pub fn encode_csv(dataset: &CrpDataset) -> Result<String> {
    let mut s = String::from("challenge,response\n");
    for rec in &dataset.records {
        s.push_str(&rec.challenge.to_hex()?);
        s.push(',');
        s.push_str(&rec.response.to_hex()?);
        s.push('\n');
    }
    Ok(s)
}

/// Reads CSV records. Without explicit widths they are taken as four bits per hex digit.
pub fn decode_csv<R: BufRead>(reader: R, widths: Option<(usize, usize)>) -> Result<CrpDataset> {
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim_end() == "challenge,response" => {}
        Some((_, Err(e))) => return Err(e.into()),
        _ => return Err(Error::Parse { line: 1, msg: "missing `challenge,response` header".into() }),
    }
    let mut widths = widths;
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: idx + 1, msg };
        let (c, r) = line.split_once(',').ok_or_else(|| parse_err("expected two columns".into()))?;
        let (n_c, n_r) = *widths.get_or_insert((c.len() * 4, r.len() * 4));
        let challenge = BitVector::from_hex(c, n_c).map_err(|e| parse_err(e.to_string()))?;
        let response = BitVector::from_hex(r, n_r).map_err(|e| parse_err(e.to_string()))?;
        records.push(Crp { challenge, response });
    }
    let (n_c, n_r) = widths.ok_or_else(|| Error::InvalidArgument("CSV has no records and no widths".into()))?;
    CrpDataset::new(n_c, n_r, records)
}

/// Writes `dataset` to `path`, returning the number of bytes written.
pub fn write_dataset(dataset: &CrpDataset, format: DatasetFormat, path: &Path) -> Result<u64> {
    let bytes = match format {
        DatasetFormat::Binary => encode_binary(dataset)?,
        DatasetFormat::Csv => encode_csv(dataset)?.into_bytes(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(bytes.len() as u64)
}

pub fn read_dataset(path: &Path, format: DatasetFormat) -> Result<CrpDataset> {
    let file = File::open(path)?;
    match format {
        DatasetFormat::Binary => {
            let mut bytes = Vec::new();
            BufReader::new(file).read_to_end(&mut bytes)?;
            decode_binary(&bytes)
        }
        DatasetFormat::Csv => decode_csv(BufReader::new(file), None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puf::{PufConfig, Variant};

    fn instance() -> PufInstance {
        PufInstance::create(&PufConfig::new(Variant::IdealEntropy, 3)).unwrap()
    }

    #[test]
    fn generate_counts_and_determinism() {
        let inst = instance();
        assert!(generate(&inst, 0, 1).is_err());
        let one = generate(&inst, 1, 1).unwrap();
        let rec = &one.records()[0];
        assert_eq!(rec.response, inst.evaluate(&rec.challenge).unwrap());
        let a = generate(&inst, 10_000, 7).unwrap();
        let b = generate(&inst, 10_000, 7).unwrap();
        assert_eq!(encode_binary(&a).unwrap(), encode_binary(&b).unwrap());
        assert_eq!(a.provenance, Some(Provenance { config_fingerprint: inst.config().fingerprint(), seed: 7 }));
    }

    #[test]
    fn generation_is_chunk_stable() {
        // a prefix of a longer run equals a shorter run when it ends on a chunk boundary
        let inst = instance();
        let long = generate(&inst, GENERATION_CHUNK + 10, 3).unwrap();
        let short = generate(&inst, GENERATION_CHUNK, 3).unwrap();
        assert_eq!(&long.records()[..GENERATION_CHUNK], short.records());
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        assert_eq!(split_sizes(80_000), (56_000, 16_000, 8_000));
        assert_eq!(split_sizes(101), (71, 20, 10));
        for n in MIN_SPLIT_COUNT..=1000 {
            let (tr, va, te) = split_sizes(n);
            assert_eq!(va, (0.2 * n as f64 + 1e-9).floor() as usize);
            assert_eq!(te, (0.1 * n as f64 + 1e-9).floor() as usize);
            assert_eq!(tr + va + te, n);
        }
    }

    #[test]
    fn split_is_a_partition() {
        let ds = generate(&instance(), 101, 2).unwrap();
        let s = split(&ds, 9).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (71, 20, 10));
        let mut all: Vec<usize> = s.train_indices.iter().chain(&s.validation_indices).chain(&s.test_indices).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
        let mut src: Vec<Challenge> = ds.challenges().cloned().collect();
        let mut parts: Vec<Challenge> = s.train.challenges().chain(s.validation.challenges()).chain(s.test.challenges()).cloned().collect();
        src.sort();
        parts.sort();
        assert_eq!(src, parts);
        assert!(s.train_indices.iter().all(|i| !s.test_indices.contains(i)));
        assert_eq!(split(&ds, 9).unwrap(), s);
        assert_ne!(split(&ds, 10).unwrap().train_indices, s.train_indices);
        assert!(matches!(split(&ds.select(&[0, 1, 2]), 0), Err(Error::DatasetTooSmall { count: 3, .. })));
    }

    #[test]
    fn binary_layout_size() {
        let ds = generate(&instance(), 2, 5).unwrap();
        let bytes = encode_binary(&ds).unwrap();
        assert_eq!(bytes.len(), 32);
        assert_eq!(&bytes[..8], &[0x43, 0x52, 0x50, 0x31, 1, 0, 32, 32]);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(&bytes[16..20], ds.records()[0].challenge.to_bytes().as_slice());
    }

    #[test]
    fn decode_errors() {
        let ds = generate(&instance(), 5, 5).unwrap();
        let good = encode_binary(&ds).unwrap();
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_binary(&bad), Err(Error::BadMagic)));
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(decode_binary(&bad), Err(Error::UnsupportedVersion(2))));
        assert!(matches!(decode_binary(&good[..good.len() - 3]), Err(Error::TruncatedFile)));
        assert!(matches!(decode_binary(&good[..10]), Err(Error::TruncatedFile)));
        let mut extra = good.clone();
        extra.extend_from_slice(&[0u8; 8]);
        assert!(matches!(decode_binary(&extra), Err(Error::CountMismatch { declared: 5, found: 6 })));
        assert_eq!(decode_binary(&good).unwrap(), ds);
    }

    #[test]
    fn file_round_trip_and_io_errors() {
        let ds = generate(&instance(), 50, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for (fmt, name) in [(DatasetFormat::Binary, "d.crp"), (DatasetFormat::Csv, "d.csv")] {
            let path = dir.path().join(name);
            let n = write_dataset(&ds, fmt, &path).unwrap();
            assert_eq!(n, std::fs::metadata(&path).unwrap().len());
            assert_eq!(read_dataset(&path, fmt).unwrap(), ds);
        }
        assert!(matches!(write_dataset(&ds, DatasetFormat::Binary, Path::new("")), Err(Error::Io(_))));
        assert!(matches!(read_dataset(&dir.path().join("missing"), DatasetFormat::Binary), Err(Error::Io(_))));
    }

    #[test]
    fn csv_rejects_wide_vectors() {
        let rec = Crp { challenge: BitVector::zeros(65), response: BitVector::zeros(1) };
        let ds = CrpDataset::new(65, 1, vec![rec]).unwrap();
        assert!(encode_csv(&ds).is_err());
    }
}
