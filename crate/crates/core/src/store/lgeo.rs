//! LGEO binary store format.
//!
//! Layout (all integers little-endian):
//! - magic `LGEO` (4 bytes)
//! - format version: u32 = 1
//! - metadata length: u64
//! - metadata: UTF-8 JSON with `concepts`, `languages`, `layers`, `condition`,
//!   `dim` and `mask` (row-major `[concept][language]` bits, LSB-first within
//!   each byte, base64 with padding)
//! - tensor: row-major `[layer][concept][language][dim]` binary32
//! - CRC-64/XZ of the tensor block: u64

use super::{Condition, ConceptMeta, EmbeddingStore, LanguageMeta, Section, StoreError};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::Read;
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"LGEO";
pub const FORMAT_VERSION: u32 = 1;
const PREAMBLE_LEN: usize = 4 + 4 + 8;
const CRC64: crc::Crc<u64> = crc::Crc::<u64>::new(&crc::CRC_64_XZ);

#[derive(Debug, Serialize, Deserialize)]
struct Metadata {
    concepts: Vec<ConceptMeta>,
    languages: Vec<LanguageMeta>,
    layers: Vec<u32>,
    condition: Condition,
    dim: u64,
    mask: String,
}

/// Everything but the tensor; cheap to read for config validation.
#[derive(Debug, Clone, PartialEq)]
pub struct StoreHeader {
    pub concepts: Vec<ConceptMeta>,
    pub languages: Vec<LanguageMeta>,
    pub layers: Vec<u32>,
    pub condition: Condition,
    pub dim: usize,
}

pub(crate) fn tensor_crc(tensor: &[f32]) -> u64 {
    let mut digest = CRC64.digest();
    let mut buf = Vec::with_capacity(4096);
    for chunk in tensor.chunks(1024) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        digest.update(&buf);
    }
    digest.finalize()
}

fn pack_mask(mask: &[bool]) -> Vec<u8> {
    let mut bytes = vec![0u8; mask.len().div_ceil(8)];
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        bytes[i / 8] |= 1 << (i % 8);
    }
    bytes
}

fn unpack_mask(bytes: &[u8], cells: usize) -> Result<Vec<bool>, StoreError> {
    if bytes.len() != cells.div_ceil(8) {
        return Err(StoreError::Metadata(format!(
            "mask holds {} bytes, expected {}",
            bytes.len(),
            cells.div_ceil(8)
        )));
    }
    if cells % 8 != 0 {
        let last = bytes[bytes.len() - 1];
        if last >> (cells % 8) != 0 {
            return Err(StoreError::Metadata("mask padding bits set".into()));
        }
    }
    Ok((0..cells).map(|i| bytes[i / 8] & (1 << (i % 8)) != 0).collect())
}

/// Serialises a store to LGEO bytes. Deterministic: identical stores give identical bytes.
pub fn encode_store(store: &EmbeddingStore) -> Vec<u8> {
    let meta = Metadata {
        concepts: store.concepts().to_vec(),
        languages: store.languages().to_vec(),
        layers: store.layers().to_vec(),
        condition: store.condition(),
        dim: store.dim() as u64,
        mask: BASE64.encode(pack_mask(store.mask())),
    };
    let meta_json = serde_json::to_vec(&meta).expect("metadata serialises");
    let tensor = store.tensor();
    let mut out = Vec::with_capacity(PREAMBLE_LEN + meta_json.len() + tensor.len() * 4 + 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(meta_json.len() as u64).to_le_bytes());
    out.extend_from_slice(&meta_json);
    let tensor_start = out.len();
    for v in tensor {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = CRC64.checksum(&out[tensor_start..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn save_store(store: &EmbeddingStore, path: impl AsRef<Path>) -> Result<(), StoreError> {
    let path = path.as_ref();
    std::fs::write(path, encode_store(store)).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Returns (metadata length, version) after checking magic and version.
fn parse_preamble(bytes: &[u8]) -> Result<u64, StoreError> {
    if bytes.len() < 4 {
        return Err(StoreError::Truncated(Section::Header));
    }
    if bytes[..4] != MAGIC {
        return Err(StoreError::BadMagic);
    }
    if bytes.len() < PREAMBLE_LEN {
        return Err(StoreError::Truncated(Section::Header));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(StoreError::UnsupportedVersion(version));
    }
    Ok(u64::from_le_bytes(bytes[8..16].try_into().unwrap()))
}

fn parse_metadata(bytes: &[u8]) -> Result<(StoreHeader, Vec<bool>), StoreError> {
    let meta: Metadata =
        serde_json::from_slice(bytes).map_err(|e| StoreError::Metadata(e.to_string()))?;
    let dim = usize::try_from(meta.dim)
        .map_err(|_| StoreError::Metadata(format!("dim {} out of range", meta.dim)))?;
    let cells = meta
        .concepts
        .len()
        .checked_mul(meta.languages.len())
        .ok_or_else(|| StoreError::Metadata("shape overflow".into()))?;
    let mask_bytes = BASE64
        .decode(meta.mask.as_bytes())
        .map_err(|e| StoreError::Metadata(format!("mask: {e}")))?;
    let mask = unpack_mask(&mask_bytes, cells)?;
    Ok((
        StoreHeader {
            concepts: meta.concepts,
            languages: meta.languages,
            layers: meta.layers,
            condition: meta.condition,
            dim,
        },
        mask,
    ))
}

/// Parses and validates LGEO bytes.
pub fn decode_store(bytes: &[u8]) -> Result<EmbeddingStore, StoreError> {
    let meta_len = parse_preamble(bytes)?;
    let rest = &bytes[PREAMBLE_LEN..];
    let meta_len = usize::try_from(meta_len)
        .ok()
        .filter(|&m| m <= rest.len())
        .ok_or(StoreError::Truncated(Section::Metadata))?;
    let (header, mask) = parse_metadata(&rest[..meta_len])?;
    let body = &rest[meta_len..];

    let n_values = header
        .layers
        .len()
        .checked_mul(mask.len())
        .and_then(|x| x.checked_mul(header.dim))
        .ok_or_else(|| StoreError::Metadata("shape overflow".into()))?;
    let tensor_bytes = n_values
        .checked_mul(4)
        .ok_or_else(|| StoreError::Metadata("shape overflow".into()))?;
    let needed = tensor_bytes
        .checked_add(8)
        .ok_or_else(|| StoreError::Metadata("shape overflow".into()))?;
    if body.len() < needed {
        return Err(StoreError::Truncated(Section::Tensor));
    }
    if body.len() > needed {
        return Err(StoreError::TrailingBytes(body.len() - needed));
    }
    let stored = u64::from_le_bytes(body[tensor_bytes..needed].try_into().unwrap());
    let computed = CRC64.checksum(&body[..tensor_bytes]);
    if stored != computed {
        return Err(StoreError::ChecksumMismatch { stored, computed });
    }
    let tensor = body[..tensor_bytes]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    EmbeddingStore::new(
        header.concepts,
        header.languages,
        header.layers,
        header.condition,
        header.dim,
        tensor,
        mask,
    )
}

pub fn load_store(path: impl AsRef<Path>) -> Result<EmbeddingStore, StoreError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_store(&bytes)
}

/// Reads only the preamble and metadata block.
pub fn read_store_header(path: impl AsRef<Path>) -> Result<StoreHeader, StoreError> {
    let path = path.as_ref();
    let io = |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::open(path).map_err(io)?;
    let file_len = file.metadata().map_err(io)?.len();
    let mut pre = Vec::with_capacity(PREAMBLE_LEN);
    (&mut file).take(PREAMBLE_LEN as u64).read_to_end(&mut pre).map_err(io)?;
    let meta_len = parse_preamble(&pre)?;
    if meta_len > file_len.saturating_sub(PREAMBLE_LEN as u64) {
        return Err(StoreError::Truncated(Section::Metadata));
    }
    let mut meta = vec![0u8; meta_len as usize];
    file.read_exact(&mut meta).map_err(io)?;
    Ok(parse_metadata(&meta)?.0)
}
