//! Minimal RIFF/WAVE reader: PCM 16-bit (format code 1) and IEEE float
//! 32-bit (code 3), mono or multichannel. Multichannel data is averaged
//! down to mono and samples come back in [-1, 1].

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

/// Reads a WAV file; returns (sample_rate, mono samples in [-1, 1]).
pub fn parse_wav(path: &Path) -> Result<(u32, Vec<f32>)> {
    let bytes = fs::read(path)?;
    parse_wav_bytes(&bytes)
}

/// Same as [`parse_wav`] on an in-memory byte image.
pub fn parse_wav_bytes(bytes: &[u8]) -> Result<(u32, Vec<f32>)> {
    if bytes.len() < 12 {
        return Err(malformed("file shorter than RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed("missing RIFF tag"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("missing WAVE tag"));
    }

    // Walk the chunk list once, remembering fmt and data.
    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id: [u8; 4] = bytes[pos..pos + 4].try_into().unwrap();
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        if body_start + size > bytes.len() {
            return Err(malformed(format!(
                "chunk {:?} claims {size} bytes but only {} remain",
                String::from_utf8_lossy(&id),
                bytes.len() - body_start
            )));
        }
        let body = &bytes[body_start..body_start + size];
        match &id {
            b"fmt " => fmt = Some(FmtChunk::parse(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word-aligned
        pos = body_start + size + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| malformed("no fmt chunk"))?;
    let data = data.ok_or_else(|| malformed("no data chunk"))?;
    decode_samples(&fmt, data)
}

struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

impl FmtChunk {
    fn parse(body: &[u8]) -> Result<Self> {
        if body.len() < 16 {
            return Err(malformed("fmt chunk shorter than 16 bytes"));
        }
        let fmt = FmtChunk {
            format: u16::from_le_bytes(body[0..2].try_into().unwrap()),
            channels: u16::from_le_bytes(body[2..4].try_into().unwrap()),
            sample_rate: u32::from_le_bytes(body[4..8].try_into().unwrap()),
            bits_per_sample: u16::from_le_bytes(body[14..16].try_into().unwrap()),
        };
        if fmt.channels == 0 {
            return Err(malformed("zero channels"));
        }
        if fmt.sample_rate == 0 {
            return Err(malformed("zero sample rate"));
        }
        match (fmt.format, fmt.bits_per_sample) {
            (FORMAT_PCM, 16) | (FORMAT_IEEE_FLOAT, 32) => Ok(fmt),
            (f, b) => Err(Error::UnsupportedEncoding(format!(
                "format code {f} at {b} bits (only PCM16 and float32 are decoded)"
            ))),
        }
    }
}

fn decode_samples(fmt: &FmtChunk, data: &[u8]) -> Result<(u32, Vec<f32>)> {
    let bytes_per_sample = (fmt.bits_per_sample / 8) as usize;
    let frame = bytes_per_sample * fmt.channels as usize;
    let n_frames = data.len() / frame; // ragged tail bytes are ignored
    let channels = fmt.channels as usize;
    let scale = 1.0f32 / channels as f32;

    let mut mono = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let base = f * frame;
        let mut acc = 0.0f32;
        for c in 0..channels {
            let off = base + c * bytes_per_sample;
            let v = match fmt.format {
                FORMAT_PCM => {
                    i16::from_le_bytes(data[off..off + 2].try_into().unwrap()) as f32 / 32768.0
                }
                _ => f32::from_le_bytes(data[off..off + 4].try_into().unwrap()),
            };
            acc += v;
        }
        let v = acc * scale;
        if !v.is_finite() {
            return Err(malformed(format!("non-finite sample in frame {f}")));
        }
        mono.push(v.clamp(-1.0, 1.0));
    }
    Ok((fmt.sample_rate, mono))
}

fn malformed(reason: impl Into<String>) -> Error {
    Error::MalformedWav(reason.into())
}

/// Serializes samples as a mono PCM-16 WAV byte image. Used by the
/// synthetic-corpus writer and by tests.
pub fn encode_wav_pcm16(sample_rate: u32, samples: &[f32]) -> Vec<u8> {
    encode_wav_pcm16_multi(sample_rate, &[samples])
}

/// Multichannel PCM-16 encoder; `channels` holds one equally long slice
/// per channel.
pub fn encode_wav_pcm16_multi(sample_rate: u32, channels: &[&[f32]]) -> Vec<u8> {
    let n_ch = channels.len();
    let n = channels.first().map_or(0, |c| c.len());
    let data_len = n * n_ch * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&(n_ch as u16).to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    let byte_rate = sample_rate * n_ch as u32 * 2;
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&((n_ch * 2) as u16).to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for f in 0..n {
        for ch in channels {
            let v = (ch[f].clamp(-1.0, 1.0) * 32768.0)
                .round()
                .clamp(i16::MIN as f32, i16::MAX as f32) as i16;
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}
