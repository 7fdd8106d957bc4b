//! RIFF/WAVE container parsing and byte-exact re-serialization.
//!
//! The parser walks the chunk list instead of assuming a 44-byte canonical
//! header, so `LIST`, `fact` and any unknown chunks survive a round trip.
//! Everything before the `data` payload is the header span, everything after
//! it (pad byte included) is the trailing span.

use std::ops::Range;

use crate::error::{Error, Result};

const WAVE_FORMAT_PCM: u16 = 0x0001;
const WAVE_FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Sample rates that need no diagnostic.
pub const TYPICAL_SAMPLE_RATES: [u32; 4] = [44_100, 48_000, 88_200, 96_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavFormat {
    pub audio_format: u16,
    pub num_channels: u16,
    pub sample_rate: u32,
    pub bits_per_sample: u16,
    pub block_align: u16,
    /// Sub-format code of a `WAVE_FORMAT_EXTENSIBLE` header.
    pub sub_format: Option<u16>,
}

impl WavFormat {
    pub fn is_pcm(&self) -> bool {
        match self.audio_format {
            WAVE_FORMAT_PCM => true,
            WAVE_FORMAT_EXTENSIBLE => self.sub_format == Some(WAVE_FORMAT_PCM),
            _ => false,
        }
    }

    pub fn bytes_per_sample(&self) -> usize {
        usize::from(self.bits_per_sample / 8)
    }

    /// Checks the format is integer PCM with a sample layout the LSB codec
    /// can address.
    pub fn validate_pcm(&self) -> Result<()> {
        if !self.is_pcm() {
            return Err(Error::UnsupportedFormat(format!(
                "audio format 0x{:04x} is not PCM",
                self.audio_format
            )));
        }
        if !matches!(self.bits_per_sample, 8 | 16 | 24 | 32) {
            return Err(Error::UnsupportedFormat(format!(
                "{} bits per sample",
                self.bits_per_sample
            )));
        }
        if self.num_channels == 0 {
            return Err(Error::UnsupportedFormat("zero channels".into()));
        }
        let expected = u32::from(self.num_channels) * u32::from(self.bits_per_sample) / 8;
        if u32::from(self.block_align) != expected {
            return Err(Error::UnsupportedFormat(format!(
                "block_align {} does not match {} channels x {} bits",
                self.block_align, self.num_channels, self.bits_per_sample
            )));
        }
        if self.sample_rate == 0 {
            return Err(Error::UnsupportedFormat("sample rate is zero".into()));
        }
        Ok(())
    }

    pub fn has_typical_rate(&self) -> bool {
        TYPICAL_SAMPLE_RATES.contains(&self.sample_rate)
    }

    /// Human-readable notes about unusual but accepted parameters.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if !self.has_typical_rate() {
            notes.push(format!(
                "sample rate {} Hz is not one of 44.1/48/88.2/96 kHz",
                self.sample_rate
            ));
        }
        notes
    }
}

/// A parsed WAV file that owns its full byte image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WavFile {
    raw: Vec<u8>,
    format: WavFormat,
    data: Range<usize>,
}

impl WavFile {
    pub fn format(&self) -> &WavFormat {
        &self.format
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn header_span(&self) -> Range<usize> {
        0..self.data.start
    }

    pub fn data_span(&self) -> Range<usize> {
        self.data.clone()
    }

    pub fn trailing_span(&self) -> Range<usize> {
        self.data.end..self.raw.len()
    }

    pub fn header(&self) -> &[u8] {
        &self.raw[self.header_span()]
    }

    pub fn data(&self) -> &[u8] {
        &self.raw[self.data.clone()]
    }

    /// Mutable view of the audio payload. Lengths cannot change through it.
    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.raw[self.data.clone()]
    }

    pub fn trailing(&self) -> &[u8] {
        &self.raw[self.trailing_span()]
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.raw
    }
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<WavFormat> {
    if body.len() < 16 {
        return Err(Error::MalformedRiff(format!(
            "fmt chunk is {} bytes, need at least 16",
            body.len()
        )));
    }
    let audio_format = le_u16(body, 0);
    let sub_format = if audio_format == WAVE_FORMAT_EXTENSIBLE && body.len() >= 26 {
        Some(le_u16(body, 24))
    } else {
        None
    };
    Ok(WavFormat {
        audio_format,
        num_channels: le_u16(body, 2),
        sample_rate: le_u32(body, 4),
        block_align: le_u16(body, 12),
        bits_per_sample: le_u16(body, 14),
        sub_format,
    })
}

/// Walks the chunk list and returns the format and the `data` payload span.
pub(crate) fn scan(bytes: &[u8]) -> Result<(WavFormat, Range<usize>)> {
    if bytes.is_empty() {
        return Err(Error::MalformedRiff("empty input".into()));
    }
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedRiff("missing RIFF/WAVE magic".into()));
    }

    let mut pos = 12;
    let mut format = None;
    loop {
        if pos + 8 > bytes.len() {
            return Err(Error::MalformedRiff(if format.is_none() {
                "no fmt chunk".into()
            } else {
                "no data chunk".into()
            }));
        }
        let id = &bytes[pos..pos + 4];
        let size = le_u32(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| {
                Error::MalformedRiff(format!(
                    "chunk {:?} at offset {} overruns the file",
                    String::from_utf8_lossy(id),
                    pos
                ))
            })?;

        match id {
            b"fmt " => format = Some(parse_fmt(&bytes[body_start..body_end])?),
            b"data" => {
                let format = format
                    .ok_or_else(|| Error::MalformedRiff("data chunk precedes fmt chunk".into()))?;
                return Ok((format, body_start..body_end));
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (size & 1);
    }
}

/// Parses a RIFF/WAVE image. The returned file keeps `bytes` verbatim.
pub fn parse_wav(bytes: Vec<u8>) -> Result<WavFile> {
    let (format, data) = scan(&bytes)?;
    Ok(WavFile {
        raw: bytes,
        format,
        data,
    })
}

/// Serializes a (possibly edited) WAV file.
pub fn write_wav(file: &WavFile) -> Vec<u8> {
    file.raw.clone()
}

/// Builds a canonical PCM header for a data payload of `data_len` bytes.
pub fn canonical_header(format: &WavFormat, data_len: u32) -> Vec<u8> {
    let mut h = Vec::with_capacity(44);
    h.extend_from_slice(b"RIFF");
    h.extend_from_slice(&(36 + data_len + (data_len & 1)).to_le_bytes());
    h.extend_from_slice(b"WAVE");
    h.extend_from_slice(b"fmt ");
    h.extend_from_slice(&16u32.to_le_bytes());
    h.extend_from_slice(&format.audio_format.to_le_bytes());
    h.extend_from_slice(&format.num_channels.to_le_bytes());
    h.extend_from_slice(&format.sample_rate.to_le_bytes());
    let byte_rate = format.sample_rate * u32::from(format.block_align);
    h.extend_from_slice(&byte_rate.to_le_bytes());
    h.extend_from_slice(&format.block_align.to_le_bytes());
    h.extend_from_slice(&format.bits_per_sample.to_le_bytes());
    h.extend_from_slice(b"data");
    h.extend_from_slice(&data_len.to_le_bytes());
    h
}

/// Reads the RIFF size field (declared file length minus 8).
pub(crate) fn riff_size(bytes: &[u8]) -> Option<u32> {
    (bytes.len() >= 8).then(|| le_u32(bytes, 4))
}
