//! Segment cache: `RSHT0001` magic, u32 segment count, then per segment a
//! u8 label followed by the f32 window samples, with a trailing CRC-32.
//! The window length is implied by count and payload size.

use std::path::Path;

use super::{ClassId, N_CLASSES};
use crate::error::{Error, Result};
use crate::io::{read_artifact, ArtifactReader, ArtifactWriter};

pub const CACHE_MAGIC: &[u8; 8] = b"RSHT0001";

/// In-memory image of a cache file.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCache {
    pub window_len: usize,
    pub entries: Vec<(ClassId, Vec<f32>)>,
}

impl SegmentCache {
    pub fn new(window_len: usize) -> Self {
        SegmentCache {
            window_len,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, label: ClassId, samples: Vec<f32>) -> Result<()> {
        if samples.len() != self.window_len {
            return Err(Error::Shape(format!(
                "segment of {} samples in a cache with window {}",
                samples.len(),
                self.window_len
            )));
        }
        self.entries.push((label, samples));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<ClassId> {
        self.entries.iter().map(|(l, _)| *l).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut w = ArtifactWriter::new(CACHE_MAGIC);
        w.u32(self.entries.len() as u32);
        for (label, samples) in &self.entries {
            w.u8(*label);
            w.f32_slice(samples);
        }
        w.finish(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = read_artifact(path)?;
        let mut r = ArtifactReader::open("segment cache", &bytes, CACHE_MAGIC)?;
        let count = r.u32()? as usize;
        if count == 0 {
            return Err(r.corrupt("zero segments"));
        }
        let payload = r.remaining();
        if payload % count != 0 {
            return Err(r.corrupt(format!(
                "{payload} payload bytes not divisible by {count} segments"
            )));
        }
        let per_segment = payload / count;
        if per_segment < 5 || (per_segment - 1) % 4 != 0 {
            return Err(r.corrupt(format!("implausible segment size {per_segment}")));
        }
        let window_len = (per_segment - 1) / 4;

        let mut entries = Vec::with_capacity(count);
        for i in 0..count {
            let label = r.u8()?;
            if (label as usize) >= N_CLASSES {
                return Err(r.corrupt(format!("segment {i} has label {label}")));
            }
            let samples = r.f32_vec(window_len)?;
            if samples.iter().any(|v| !v.is_finite()) {
                return Err(r.corrupt(format!("segment {i} holds non-finite samples")));
            }
            entries.push((label, samples));
        }
        Ok(SegmentCache {
            window_len,
            entries,
        })
    }
}
