//! Shared framing for the binary artifacts (segment cache, checkpoints,
//! feature files, classifier models): an 8-byte magic whose tail digits
//! carry the format revision, a little-endian payload, and a trailing
//! CRC-32 over everything before it.

mod crc32;

pub use crc32::crc32;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Accumulates an artifact in memory, then writes `bytes ++ crc32(bytes)`.
pub struct ArtifactWriter {
    buf: Vec<u8>,
}

impl ArtifactWriter {
    pub fn new(magic: &[u8; 8]) -> Self {
        ArtifactWriter {
            buf: magic.to_vec(),
        }
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f32_slice(&mut self, vs: &[f32]) {
        self.buf.reserve(vs.len() * 4);
        for &v in vs {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    pub fn f64_slice(&mut self, vs: &[f64]) {
        self.buf.reserve(vs.len() * 8);
        for &v in vs {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    /// Length-prefixed UTF-8 text (u32 byte count, then the bytes).
    pub fn text(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn finish(mut self, path: &Path) -> Result<()> {
        let crc = crc32(&self.buf);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        fs::write(path, &self.buf)?;
        Ok(())
    }

    /// Finished byte image without writing (used by tests).
    pub fn into_bytes(mut self) -> Vec<u8> {
        let crc = crc32(&self.buf);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        self.buf
    }
}

/// Sequential little-endian reader over a checksum-verified artifact.
pub struct ArtifactReader<'a> {
    artifact: &'static str,
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ArtifactReader<'a> {
    /// Validates magic and trailing CRC, then positions the cursor right
    /// after the magic.
    pub fn open(artifact: &'static str, bytes: &'a [u8], magic: &[u8; 8]) -> Result<Self> {
        if bytes.len() < 12 {
            return Err(Error::Corrupt {
                artifact,
                reason: format!("file too short ({} bytes)", bytes.len()),
            });
        }
        let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
        if crc32(body) != stored {
            return Err(Error::Corrupt {
                artifact,
                reason: "checksum mismatch".into(),
            });
        }
        if &body[..8] != magic {
            return Err(Error::Corrupt {
                artifact,
                reason: format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(&body[..8]),
                    String::from_utf8_lossy(magic)
                ),
            });
        }
        Ok(ArtifactReader {
            artifact,
            buf: body,
            pos: 8,
        })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Corrupt {
                artifact: self.artifact,
                reason: format!(
                    "truncated: wanted {n} bytes at offset {}, have {}",
                    self.pos,
                    self.buf.len() - self.pos
                ),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f32_vec(&mut self, n: usize) -> Result<Vec<f32>> {
        let raw = self.take(n * 4)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    pub fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    pub fn text(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Corrupt {
            artifact: self.artifact,
            reason: "non-UTF-8 text field".into(),
        })
    }

    /// Bytes left before the checksum.
    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn corrupt(&self, reason: impl Into<String>) -> Error {
        Error::Corrupt {
            artifact: self.artifact,
            reason: reason.into(),
        }
    }
}

pub fn read_artifact(path: &Path) -> Result<Vec<u8>> {
    Ok(fs::read(path)?)
}
