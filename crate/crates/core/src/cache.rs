//! Binary table cache: `S2SQ`, version, limit, membership bitmap, `r2`,
//! `omega1`, then an FNV-1a checksum of everything before it.

use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;

use crate::arith::{SumsOfTwoSquaresTable, MAX_LIMIT};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"S2SQ";
pub const VERSION: u32 = 1;
pub const SUPPORTED_VERSIONS: [u32; 1] = [VERSION];

const HEADER: usize = 4 + 4 + 8;

fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

fn payload_len(limit: u64) -> Option<usize> {
    let n = usize::try_from(limit).ok()?.checked_add(1)?;
    n.div_ceil(8).checked_add(n.checked_mul(5)?)
}

pub fn encode(table: &SumsOfTwoSquaresTable) -> Vec<u8> {
    let limit = table.limit();
    let n = limit as usize + 1;
    let mut out = Vec::with_capacity(HEADER + payload_len(limit).unwrap_or(0) + 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&limit.to_le_bytes());
    let bitmap: Vec<u8> = table
        .membership_words()
        .iter()
        .flat_map(|w| w.to_le_bytes())
        .collect();
    out.extend_from_slice(&bitmap[..n.div_ceil(8)]);
    for r in table.r2_slice() {
        out.extend_from_slice(&r.to_le_bytes());
    }
    out.extend_from_slice(table.omega1_slice());
    let sum = checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

pub fn decode(bytes: &[u8]) -> Result<SumsOfTwoSquaresTable> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(Error::Cache("bad magic, expected S2SQ".into()));
    }
    if bytes.len() < HEADER + 8 {
        return Err(Error::Cache("file is truncated".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if !SUPPORTED_VERSIONS.contains(&version) {
        return Err(Error::Cache(format!(
            "unsupported version {version}, supported versions: {SUPPORTED_VERSIONS:?}"
        )));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 8);
    if checksum(body) != u64::from_le_bytes(trailer.try_into().unwrap()) {
        return Err(Error::Cache("checksum mismatch".into()));
    }
    let limit = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    if limit == 0 || limit > MAX_LIMIT {
        return Err(Error::Cache(format!(
            "stored limit {limit} is out of range"
        )));
    }
    let n = limit as usize + 1;
    if payload_len(limit) != Some(body.len() - HEADER) {
        return Err(Error::Cache(
            "payload length does not match the stored limit".into(),
        ));
    }
    let (bitmap, rest) = body[HEADER..].split_at(n.div_ceil(8));
    let (r2_bytes, omega1) = rest.split_at(4 * n);
    let mut membership = vec![0u64; n.div_ceil(64)];
    for (i, &b) in bitmap.iter().enumerate() {
        membership[i / 8] |= (b as u64) << (8 * (i % 8));
    }
    let r2 = r2_bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SumsOfTwoSquaresTable::from_parts(limit, membership, r2, omega1.to_vec())
}

pub fn write_cache(table: &SumsOfTwoSquaresTable, path: &Path) -> Result<()> {
    std::fs::write(path, encode(table))?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<SumsOfTwoSquaresTable> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = SumsOfTwoSquaresTable::build(1000).unwrap();
        let bytes = encode(&t);
        assert_eq!(bytes.len(), HEADER + 126 + 5 * 1001 + 8);
        let back = decode(&bytes).unwrap();
        assert_eq!(encode(&back), bytes);
        assert_eq!(back.r2(25).unwrap(), 12);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = encode(&SumsOfTwoSquaresTable::build(500).unwrap());
        let err = decode(&bytes[..bytes.len() - 3]).unwrap_err().to_string();
        assert!(err.contains("checksum"), "{err}");
        let mut v2 = bytes.clone();
        v2[4] = 2;
        let err = decode(&v2).unwrap_err().to_string();
        assert!(err.contains("supported versions: [1]"), "{err}");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).unwrap_err().to_string().contains("magic"));
        let mut flip = bytes.clone();
        flip[100] ^= 1;
        assert!(decode(&flip).is_err());
        assert!(decode(&[]).is_err());
    }
}
