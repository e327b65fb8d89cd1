//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "MORPHLAB"
//! version    u32
//! manifest   u64 length + UTF-8 TOML
//! count      u32
//! tensor     u32 name length, name, u8 dtype (0 = f64, 1 = f32),
//!            u32 rank, rank x u64 dims, payload
//! trailer    SHA-256 of every preceding byte
//! ```

use morphlab_core::numerics::Tensor;
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 8] = b"MORPHLAB";
pub const VERSION: u32 = 1;

const F64: u8 = 0;
const F32: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checksum mismatch, file is corrupt")]
    ChecksumMismatch,
    #[error("unknown tensor dtype {0}")]
    UnknownDtype(u8),
    #[error("malformed tensor {0:?}")]
    BadTensor(String),
    #[error("duplicate tensor {0:?}")]
    DuplicateName(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Mismatch(String),
}

/// A manifest plus named tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub manifest: String,
    pub tensors: Vec<(String, Tensor)>,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(CheckpointError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self, wide: bool) -> Result<usize, CheckpointError> {
        let n = if wide { self.u64()? } else { u64::from(self.u32()?) };
        usize::try_from(n).map_err(|_| CheckpointError::Truncated)
    }

    fn string(&mut self, wide: bool) -> Result<String, CheckpointError> {
        let n = self.len(wide)?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| CheckpointError::Manifest("invalid UTF-8".into()))
    }
}

/// Hex SHA-256 of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Container {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        put_u64(&mut out, self.manifest.len() as u64);
        out.extend_from_slice(self.manifest.as_bytes());
        put_u32(&mut out, self.tensors.len() as u32);
        for (name, t) in &self.tensors {
            put_u32(&mut out, name.len() as u32);
            out.extend_from_slice(name.as_bytes());
            out.push(F64);
            put_u32(&mut out, t.shape().len() as u32);
            for &d in t.shape() {
                put_u64(&mut out, d as u64);
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let sum = Sha256::digest(&out);
        out.extend_from_slice(&sum);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        if bytes.len() < MAGIC.len() + 4 + 32 {
            return Err(CheckpointError::Truncated);
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != trailer {
            return Err(CheckpointError::ChecksumMismatch);
        }
        let mut r = Reader { bytes: body, pos: MAGIC.len() };
        let version = r.u32()?;
        if version != VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }
        let manifest = r.string(true)?;
        let count = r.u32()?;
        let mut tensors: Vec<(String, Tensor)> = Vec::new();
        for _ in 0..count {
            let name = r.string(false)?;
            let dtype = r.u8()?;
            let rank = r.u32()? as usize;
            let shape = (0..rank).map(|_| r.len(true)).collect::<Result<Vec<_>, _>>()?;
            let n = shape
                .iter()
                .try_fold(1usize, |a, &d| a.checked_mul(d))
                .ok_or_else(|| CheckpointError::BadTensor(name.clone()))?;
            let data: Vec<f64> = match dtype {
                F64 => r
                    .take(n.checked_mul(8).ok_or(CheckpointError::Truncated)?)?
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect(),
                F32 => r
                    .take(n.checked_mul(4).ok_or(CheckpointError::Truncated)?)?
                    .chunks_exact(4)
                    .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
                    .collect(),
                other => return Err(CheckpointError::UnknownDtype(other)),
            };
            let t = Tensor::new(shape, data).map_err(|_| CheckpointError::BadTensor(name.clone()))?;
            if tensors.iter().any(|(n, _)| *n == name) {
                return Err(CheckpointError::DuplicateName(name));
            }
            tensors.push((name, t));
        }
        if r.pos != body.len() {
            return Err(CheckpointError::Manifest("trailing bytes after tensors".into()));
        }
        Ok(Self { manifest, tensors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Container {
        Container {
            manifest: "kind = \"ed\"\n".into(),
            tensors: vec![
                ("w".into(), Tensor::matrix(2, 3, vec![1.0, -2.5, 3.0, 0.0, f64::MIN_POSITIVE, 7.0]).unwrap()),
                ("b".into(), Tensor::vector(vec![0.125, -1e300])),
                ("s".into(), Tensor::scalar(4.0)),
            ],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        let bytes = c.to_bytes();
        assert_eq!(Container::from_bytes(&bytes).unwrap(), c);
        assert_eq!(digest(&bytes), digest(&c.to_bytes()));
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = sample().to_bytes();
        for i in [10, 30, bytes.len() - 40, bytes.len() - 1] {
            let mut bad = bytes.clone();
            bad[i] ^= 1;
            assert_eq!(Container::from_bytes(&bad), Err(CheckpointError::ChecksumMismatch), "byte {i}");
        }
        assert_eq!(Container::from_bytes(b"not a checkpoint"), Err(CheckpointError::BadMagic));
        assert_eq!(Container::from_bytes(&bytes[..20]), Err(CheckpointError::Truncated));
        assert_eq!(Container::from_bytes(&bytes[..bytes.len() - 1]), Err(CheckpointError::ChecksumMismatch));
    }

    #[test]
    fn reads_f32_payloads() {
        let mut body = Vec::new();
        body.extend_from_slice(MAGIC);
        put_u32(&mut body, VERSION);
        put_u64(&mut body, 0);
        put_u32(&mut body, 1);
        put_u32(&mut body, 1);
        body.push(b'x');
        body.push(F32);
        put_u32(&mut body, 1);
        put_u64(&mut body, 2);
        body.extend_from_slice(&1.5f32.to_le_bytes());
        body.extend_from_slice(&(-2.0f32).to_le_bytes());
        let sum = Sha256::digest(&body);
        body.extend_from_slice(&sum);
        let c = Container::from_bytes(&body).unwrap();
        assert_eq!(c.tensors[0].1.data(), [1.5, -2.0]);
    }
}
