//! Audio ingestion: WAV parsing, fixed one-second windowing, per-segment
//! normalization, reshaping into square sample matrices and the
//! train/test split.

pub mod cache;
pub mod manifest;
pub mod split;
pub mod wav;

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use split::{make_split, split_indices, subject_disjoint_indices, DatasetSplit};
pub use wav::{parse_wav, parse_wav_bytes};

/// Class index into [`CLASS_NAMES`].
pub type ClassId = u8;

/// The three diagnosis classes of the corpus.
pub const CLASS_NAMES: [&str; 3] = ["healthy", "pneumonia", "copd"];
pub const N_CLASSES: usize = 3;

/// Everything is resampled or rejected to this rate before windowing.
pub const TARGET_SAMPLE_RATE: u32 = 44100;
/// One second of audio at the target rate.
pub const DEFAULT_WINDOW_LEN: usize = 44100;
/// 210² == 44100.
pub const DEFAULT_MATRIX_WIDTH: usize = 210;

pub fn class_from_name(name: &str) -> Option<ClassId> {
    CLASS_NAMES
        .iter()
        .position(|&n| n == name)
        .map(|i| i as ClassId)
}

pub fn class_name(id: ClassId) -> &'static str {
    CLASS_NAMES[id as usize]
}

/// Provenance and label of one source recording.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordingMeta {
    pub file_path: String,
    pub subject_id: String,
    pub label: ClassId,
    pub sample_rate: u32,
    pub n_samples: usize,
}

/// One fixed-length mono window cut from a recording.
#[derive(Debug, Clone)]
pub struct AudioSegment {
    pub samples: Vec<f32>,
    pub label: ClassId,
    pub source: Arc<RecordingMeta>,
    /// Sample index of the window start within the source recording.
    pub offset: usize,
}

/// Row-major W×W reshape of a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    width: usize,
    data: Vec<f32>,
    pub label: ClassId,
}

impl SampleMatrix {
    pub fn from_samples(samples: Vec<f32>, label: ClassId, width: usize) -> Result<Self> {
        if width * width != samples.len() {
            return Err(Error::Shape(format!(
                "{} samples cannot fill a {width}x{width} matrix",
                samples.len()
            )));
        }
        Ok(SampleMatrix {
            width,
            data: samples,
            label,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row-major backing storage; `data()[r*width + c]` is row r, column c.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn at(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }
}

/// Per-segment normalization applied between windowing and reshaping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    /// Leave samples untouched.
    None,
    /// Zero mean, unit population std (constant windows map to all-zeros).
    #[default]
    Standardize,
    /// Affine map onto [0, 1] (constant windows map to all-zeros).
    MinMax,
}

impl FromStr for NormalizeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NormalizeMode::None),
            "standardize" => Ok(NormalizeMode::Standardize),
            "minmax" => Ok(NormalizeMode::MinMax),
            other => Err(Error::InvalidConfig(format!(
                "unknown normalization mode {other:?}"
            ))),
        }
    }
}

/// Cuts a recording into consecutive non-overlapping windows of
/// `window_len` samples; the trailing partial window is dropped.
pub fn segment_recording(
    samples: &[f32],
    meta: &Arc<RecordingMeta>,
    window_len: usize,
) -> Result<Vec<AudioSegment>> {
    if window_len == 0 {
        return Err(Error::InvalidConfig("window_len must be >= 1".into()));
    }
    if meta.sample_rate != TARGET_SAMPLE_RATE {
        return Err(Error::RateMismatch {
            found: meta.sample_rate,
            required: TARGET_SAMPLE_RATE,
        });
    }
    Ok(samples
        .chunks_exact(window_len)
        .enumerate()
        .map(|(i, chunk)| AudioSegment {
            samples: chunk.to_vec(),
            label: meta.label,
            source: Arc::clone(meta),
            offset: i * window_len,
        })
        .collect())
}

/// Row-major reshape: `data[r][c] == samples[r*W + c]`.
pub fn reshape_to_matrix(segment: &AudioSegment, width: usize) -> Result<SampleMatrix> {
    SampleMatrix::from_samples(segment.samples.clone(), segment.label, width)
}

/// Applies the chosen normalization to a segment's samples.
pub fn normalize_segment(mut segment: AudioSegment, mode: NormalizeMode) -> AudioSegment {
    normalize_samples(&mut segment.samples, mode);
    segment
}

pub fn normalize_samples(samples: &mut [f32], mode: NormalizeMode) {
    if samples.is_empty() {
        return;
    }
    match mode {
        NormalizeMode::None => {}
        NormalizeMode::Standardize => {
            let n = samples.len() as f64;
            let mean = samples.iter().map(|&v| v as f64).sum::<f64>() / n;
            let var = samples
                .iter()
                .map(|&v| {
                    let d = v as f64 - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            if var == 0.0 {
                samples.iter_mut().for_each(|v| *v = 0.0);
            } else {
                let std = var.sqrt();
                samples
                    .iter_mut()
                    .for_each(|v| *v = ((*v as f64 - mean) / std) as f32);
            }
        }
        NormalizeMode::MinMax => {
            let min = samples.iter().copied().fold(f32::INFINITY, f32::min);
            let max = samples.iter().copied().fold(f32::NEG_INFINITY, f32::max);
            let range = max - min;
            if range == 0.0 {
                samples.iter_mut().for_each(|v| *v = 0.0);
            } else {
                samples.iter_mut().for_each(|v| *v = (*v - min) / range);
            }
        }
    }
}

/// Linear-interpolation resampling used when a recording's native rate
/// differs from [`TARGET_SAMPLE_RATE`] and resampling is enabled.
pub fn resample_linear(samples: &[f32], from_rate: u32, to_rate: u32) -> Vec<f32> {
    if from_rate == to_rate || samples.is_empty() {
        return samples.to_vec();
    }
    let n_out = (samples.len() as u64 * to_rate as u64 / from_rate as u64) as usize;
    let step = from_rate as f64 / to_rate as f64;
    (0..n_out)
        .map(|i| {
            let pos = i as f64 * step;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(samples.len() - 1);
            let frac = (pos - lo as f64) as f32;
            samples[lo] * (1.0 - frac) + samples[hi] * frac
        })
        .collect()
}

#[cfg(test)]
pub(crate) fn test_meta(label: ClassId, n_samples: usize) -> Arc<RecordingMeta> {
    Arc::new(RecordingMeta {
        file_path: "test.wav".into(),
        subject_id: "s1".into(),
        label,
        sample_rate: TARGET_SAMPLE_RATE,
        n_samples,
    })
}
