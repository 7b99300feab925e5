//! Minimal RIFF/WAVE reader and writer for 16-bit PCM mono.

use std::fs;
use std::path::{Path, PathBuf};

use crate::spectral::TimeSignal;
use crate::{Error, Result};

const PCM: u16 = 1;
const EXTENSIBLE: u16 = 0xFFFE;
const FULL_SCALE: f64 = 32768.0;

/// Sample rates used by the evaluation corpora; others load with a warning.
pub const STANDARD_RATES: [u32; 2] = [8000, 16000];

#[derive(Debug, Clone, PartialEq)]
pub struct WavFile {
    pub path: Option<PathBuf>,
    pub sample_rate: u32,
    pub bit_depth: u16,
    pub channels: u16,
    pub samples: TimeSignal,
}

impl WavFile {
    pub fn is_standard_rate(&self) -> bool {
        STANDARD_RATES.contains(&self.sample_rate)
    }

    pub fn into_signal(self) -> TimeSignal {
        self.samples
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct Fmt {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn parse_fmt(body: &[u8]) -> Result<Fmt> {
    if body.len() < 16 {
        return Err(Error::MalformedWav(format!("fmt chunk too short ({} bytes)", body.len())));
    }
    let mut format = u16_at(body, 0);
    if format == EXTENSIBLE {
        if body.len() < 26 {
            return Err(Error::MalformedWav("truncated WAVE_FORMAT_EXTENSIBLE header".into()));
        }
        // first two bytes of the sub-format GUID carry the format tag
        format = u16_at(body, 24);
    }
    Ok(Fmt {
        format,
        channels: u16_at(body, 2),
        sample_rate: u32_at(body, 4),
        bits: u16_at(body, 14),
    })
}

pub fn decode_wav(bytes: &[u8]) -> Result<WavFile> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedWav("missing RIFF/WAVE header".into()));
    }
    let mut fmt = None;
    let mut data = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = u32_at(bytes, at + 4) as usize;
        let start = at + 8;
        let end = start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::MalformedWav(format!("chunk '{}' overruns file", String::from_utf8_lossy(id))))?;
        match id {
            b"fmt " => fmt = Some(parse_fmt(&bytes[start..end])?),
            b"data" => data = Some(&bytes[start..end]),
            _ => {}
        }
        at = end + (size & 1);
    }
    let fmt = fmt.ok_or_else(|| Error::MalformedWav("no fmt chunk".into()))?;
    if fmt.format != PCM {
        return Err(Error::UnsupportedEncoding(fmt.format));
    }
    if fmt.bits != 16 {
        return Err(Error::UnsupportedBitDepth(fmt.bits));
    }
    if fmt.channels != 1 {
        return Err(Error::Multichannel(fmt.channels));
    }
    if fmt.sample_rate == 0 {
        return Err(Error::MalformedWav("zero sample rate".into()));
    }
    let data = data.ok_or_else(|| Error::MalformedWav("no data chunk".into()))?;
    if data.len() % 2 != 0 {
        return Err(Error::MalformedWav("odd-length 16-bit data chunk".into()));
    }
    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / FULL_SCALE)
        .collect();
    Ok(WavFile {
        path: None,
        sample_rate: fmt.sample_rate,
        bit_depth: 16,
        channels: 1,
        samples: TimeSignal::new(samples, fmt.sample_rate)?,
    })
}

/// Clips to `[-1, 1]` and quantizes to 16-bit PCM.
pub fn quantize(sample: f64) -> i16 {
    (sample.clamp(-1.0, 1.0) * FULL_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn encode_wav(signal: &TimeSignal) -> Vec<u8> {
    let data_len = signal.len() * 2;
    let rate = signal.sample_rate();
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in signal.samples() {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    out
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<WavFile> {
    let path = path.as_ref();
    let mut wav = decode_wav(&fs::read(path)?)?;
    wav.path = Some(path.to_path_buf());
    Ok(wav)
}

pub fn write_wav(signal: &TimeSignal, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_wav(signal))?;
    Ok(())
}
