//! The `AANC` checkpoint format.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! "AANC" | version u32 | step u64 | record count u32
//! record*: name len u32 | name | ndim u32 | dims u64* | f64 payload | crc32 u32
//! config len u32 | config text (key = value lines)
//! rng count u32 | rng*: name len u32 | name | seed [u8; 32] | stream u64 | word pos u128
//! crc32 u32 over every preceding byte
//! ```
//!
//! Each record's crc32 covers its bytes from the name length through the payload.

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"AANC";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Record {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Self {
        Record {
            name: name.into(),
            shape,
            data,
        }
    }

    pub fn scalar(name: impl Into<String>, value: f64) -> Self {
        Record::new(name, vec![1], vec![value])
    }
}

/// Position of a ChaCha stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngPosition {
    pub name: String,
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub records: Vec<Record>,
    /// Training configuration snapshot as `key = value` text.
    pub config: String,
    pub rngs: Vec<RngPosition>,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

impl Checkpoint {
    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn rng(&self, name: &str) -> Option<&RngPosition> {
        self.rngs.iter().find(|r| r.name == name)
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        out.extend_from_slice(&self.step.to_le_bytes());
        put_u32(&mut out, self.records.len() as u32);
        for r in &self.records {
            let n: usize = r.shape.iter().product();
            if n != r.data.len() {
                return Err(Error::shape(
                    "checkpoint",
                    format!("record '{}' shape {:?} vs {} values", r.name, r.shape, r.data.len()),
                ));
            }
            let start = out.len();
            put_str(&mut out, &r.name);
            put_u32(&mut out, r.shape.len() as u32);
            for &d in &r.shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &x in &r.data {
                out.extend_from_slice(&x.to_le_bytes());
            }
            let crc = crc32fast::hash(&out[start..]);
            put_u32(&mut out, crc);
        }
        put_str(&mut out, &self.config);
        put_u32(&mut out, self.rngs.len() as u32);
        for g in &self.rngs {
            put_str(&mut out, &g.name);
            out.extend_from_slice(&g.seed);
            out.extend_from_slice(&g.stream.to_le_bytes());
            out.extend_from_slice(&g.word_pos.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        put_u32(&mut out, crc);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
        let mut r = Cursor { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format {
                what: "checkpoint",
                offset: 0,
                detail: "bad magic, expected \"AANC\"".into(),
            });
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format {
                what: "checkpoint",
                offset: 4,
                detail: format!("unsupported version {version}, expected {VERSION}"),
            });
        }
        let step = r.u64()?;
        let count = r.u32()? as usize;
        let mut records = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let start = r.pos;
            let name = r.string()?;
            let ndim = r.u32()? as usize;
            let mut shape = Vec::with_capacity(ndim.min(16));
            for _ in 0..ndim {
                shape.push(r.u64()? as usize);
            }
            let n = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(|| Error::Format {
                what: "checkpoint",
                offset: r.pos as u64,
                detail: format!("record '{name}' shape {shape:?} overflows"),
            })?;
            let payload = r.take(n.checked_mul(8).unwrap_or(usize::MAX))?;
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let end = r.pos;
            let crc = r.u32()?;
            if crc != crc32fast::hash(&bytes[start..end]) {
                return Err(Error::Checksum { record: name });
            }
            records.push(Record { name, shape, data });
        }
        let config = r.string()?;
        let nrng = r.u32()? as usize;
        let mut rngs = Vec::with_capacity(nrng.min(64));
        for _ in 0..nrng {
            let name = r.string()?;
            let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
            let stream = r.u64()?;
            let word_pos = u128::from_le_bytes(r.take(16)?.try_into().unwrap());
            rngs.push(RngPosition { name, seed, stream, word_pos });
        }
        let end = r.pos;
        let crc = r.u32()?;
        if crc != crc32fast::hash(&bytes[..end]) {
            return Err(Error::Checksum {
                record: "<header/config/rng>".into(),
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::Format {
                what: "checkpoint",
                offset: r.pos as u64,
                detail: format!("{} trailing bytes", bytes.len() - r.pos),
            });
        }
        Ok(Checkpoint { step, records, config, rngs })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let bytes = self.encode()?;
        std::fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let bytes = std::fs::read(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Checkpoint::decode(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format {
                what: "checkpoint",
                offset: self.pos as u64,
                detail: format!("truncated: need {n} bytes, {} remain", self.bytes.len() - self.pos),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let at = self.pos;
        let n = self.u32()? as usize;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Format {
            what: "checkpoint",
            offset: at as u64,
            detail: "name is not UTF-8".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            step: 42,
            records: vec![
                Record::new("d.0.weights", vec![2, 3], vec![1.0, -2.5, 0.1, f64::MIN_POSITIVE, 3.0, -0.0]),
                Record::scalar("adam.step", 7.0),
            ],
            config: "mode = aan\nseed = 7\n".into(),
            rngs: vec![RngPosition { name: "data".into(), seed: [9; 32], stream: 1, word_pos: 12345 }],
        }
    }

    #[test]
    fn encode_decode_encode_is_identical() {
        let bytes = sample().encode().unwrap();
        let back = Checkpoint::decode(&bytes).unwrap();
        assert_eq!(back, sample());
        assert_eq!(back.encode().unwrap(), bytes);
    }

    #[test]
    fn corrupted_payload_names_record() {
        let mut bytes = sample().encode().unwrap();
        // First payload byte of the first record: header 20 bytes, name len 4 + 11, ndim 4, dims 16.
        bytes[20 + 4 + 11 + 4 + 16] ^= 0x40;
        match Checkpoint::decode(&bytes) {
            Err(Error::Checksum { record }) => assert_eq!(record, "d.0.weights"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn magic_version_and_truncation() {
        let bytes = sample().encode().unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Checkpoint::decode(&bad), Err(Error::Format { offset: 0, .. })));
        let mut v2 = bytes.clone();
        v2[4] = 2;
        assert!(matches!(Checkpoint::decode(&v2), Err(Error::Format { offset: 4, .. })));
        assert!(matches!(Checkpoint::decode(&bytes[..bytes.len() - 3]), Err(Error::Format { .. })));
        let mut cfg = bytes.clone();
        let at = bytes.len() - 4 - 64 - 8;
        cfg[at] ^= 1;
        assert!(Checkpoint::decode(&cfg).is_err());
    }
}
