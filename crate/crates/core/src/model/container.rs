//! Binary array container shared by weight files and feature dumps.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "RSPSCRN1"            8-byte magic
//! L: u32                manifest length in bytes
//! manifest              L bytes of UTF-8 JSON, carrying an `arrays` list
//! blob                  float32 LE arrays, row-major, at manifest offsets
//! ```
//!
//! Each `arrays` entry is `{name, shape, offset, dtype: "f32le"}` with
//! `offset` counted in bytes from the start of the blob.

use serde::{Deserialize, Serialize};

use super::ModelError;

pub const MAGIC: &[u8; 8] = b"RSPSCRN1";
pub const DTYPE_F32LE: &str = "f32le";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub dtype: String,
}

impl ArraySpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Splits a container into its manifest JSON and its blob.
pub fn split(bytes: &[u8]) -> Result<(&[u8], &[u8]), ModelError> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(ModelError::BadMagic);
    }
    let len = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize;
    let end = 12usize
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| {
            ModelError::MalformedManifest(format!(
                "manifest length {len} exceeds the {} byte file",
                bytes.len()
            ))
        })?;
    Ok((&bytes[12..end], &bytes[end..]))
}

pub fn join(manifest_json: &[u8], blob: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + manifest_json.len() + blob.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(manifest_json.len() as u32).to_le_bytes());
    out.extend_from_slice(manifest_json);
    out.extend_from_slice(blob);
    out
}

/// Reads one array from the blob, checking dtype and bounds.
pub fn read_array(blob: &[u8], spec: &ArraySpec) -> Result<Vec<f64>, ModelError> {
    if spec.dtype != DTYPE_F32LE {
        return Err(ModelError::MalformedManifest(format!(
            "array `{}` has dtype `{}`, only `{DTYPE_F32LE}` is supported",
            spec.name, spec.dtype
        )));
    }
    let byte_len = spec.len() * 4;
    let bytes = spec
        .offset
        .checked_add(byte_len)
        .and_then(|end| blob.get(spec.offset..end))
        .ok_or_else(|| {
            ModelError::ShapeMismatch(format!(
                "array `{}` of shape {:?} needs bytes {}..{} but the blob has {}",
                spec.name,
                spec.shape,
                spec.offset,
                spec.offset + byte_len,
                blob.len()
            ))
        })?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

/// Accumulates arrays into a blob, assigning consecutive offsets.
#[derive(Debug, Default)]
pub struct BlobBuilder {
    blob: Vec<u8>,
    specs: Vec<ArraySpec>,
}

impl BlobBuilder {
    pub fn push(&mut self, name: &str, shape: Vec<usize>, data: &[f64]) -> &mut Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.specs.push(ArraySpec {
            name: name.to_string(),
            shape,
            offset: self.blob.len(),
            dtype: DTYPE_F32LE.to_string(),
        });
        for &v in data {
            self.blob.extend_from_slice(&(v as f32).to_le_bytes());
        }
        self
    }

    pub fn finish(self) -> (Vec<ArraySpec>, Vec<u8>) {
        (self.specs, self.blob)
    }
}
