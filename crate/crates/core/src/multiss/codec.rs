//! Byte strings to field-element chunks and back.
//!
//! A 4-byte big-endian length header is prepended, then the bytes are cut
//! into blocks of `floor((bits(q) - 1) / 8)` bytes, the last block padded
//! with zeros. Each block read big-endian is strictly below `q`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::field::{FieldElement, Modulus};

const HEADER: usize = 4;

/// Bytes per chunk for `modulus`; requires `q >= 2^16`.
pub fn block_size(modulus: &Modulus) -> Result<usize> {
    if modulus.bits() < 17 {
        return Err(Error::InvalidModulus("byte chunking needs q >= 2^16".into()));
    }
    Ok(((modulus.bits() - 1) / 8) as usize)
}

pub fn encode_secret(bytes: &[u8], modulus: &Modulus) -> Result<Vec<FieldElement>> {
    let block = block_size(modulus)?;
    let len = u32::try_from(bytes.len()).map_err(|_| Error::invalid("secret longer than 4 GiB"))?;
    let mut framed = Vec::with_capacity(HEADER + bytes.len() + block);
    framed.extend_from_slice(&len.to_be_bytes());
    framed.extend_from_slice(bytes);
    framed.resize(framed.len().div_ceil(block) * block, 0);
    Ok(framed.chunks(block).map(|b| modulus.element(BigUint::from_bytes_be(b))).collect())
}

pub fn decode_secret(chunks: &[FieldElement], modulus: &Modulus) -> Result<Vec<u8>> {
    let block = block_size(modulus)?;
    let mut framed = Vec::with_capacity(chunks.len() * block);
    for (i, c) in chunks.iter().enumerate() {
        if c.modulus() != modulus {
            return Err(Error::ModulusMismatch);
        }
        let raw = c.to_biguint().to_bytes_be();
        let raw: &[u8] = if raw == [0] { &[] } else { &raw };
        if raw.len() > block {
            return Err(Error::Corrupt(format!("chunk {i} does not fit a {block}-byte block")));
        }
        framed.extend(std::iter::repeat_n(0u8, block - raw.len()));
        framed.extend_from_slice(raw);
    }
    if framed.len() < HEADER {
        return Err(Error::Corrupt("no length header".into()));
    }
    let len = u32::from_be_bytes(framed[..HEADER].try_into().unwrap()) as usize;
    let expected_chunks = (HEADER + len).div_ceil(block);
    if chunks.len() != expected_chunks {
        return Err(Error::Corrupt(format!(
            "header announces {len} bytes ({expected_chunks} chunks) but {} chunks are present",
            chunks.len()
        )));
    }
    if framed[HEADER + len..].iter().any(|&b| b != 0) {
        return Err(Error::Corrupt("nonzero padding".into()));
    }
    framed.truncate(HEADER + len);
    framed.drain(..HEADER);
    Ok(framed)
}
