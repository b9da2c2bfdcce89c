//! `PBM1` model files: a 16-byte header followed by a JSON payload.
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 4 | magic `PBM1` |
//! | 4 | 2 | version (LE) |
//! | 6 | 2 | reserved, zero |
//! | 8 | 8 | payload length in bytes (LE) |

use std::fs;
use std::path::Path;

use super::perbit::ModelSet;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"PBM1";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 16;

pub fn encode(models: &ModelSet) -> Result<Vec<u8>> {
    let payload = serde_json::to_vec(models).map_err(|e| Error::InvalidArgument(format!("model encoding: {e}")))?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<ModelSet> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let body = &bytes[HEADER_LEN..];
    if (body.len() as u64) < len {
        return Err(Error::TruncatedFile);
    }
    if body.len() as u64 > len {
        return Err(Error::CountMismatch { declared: len, found: body.len() as u64 });
    }
    serde_json::from_slice(body).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
}

pub fn save(models: &ModelSet, path: &Path) -> Result<()> {
    fs::write(path, encode(models)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ModelSet> {
    decode(&fs::read(path)?)
}
