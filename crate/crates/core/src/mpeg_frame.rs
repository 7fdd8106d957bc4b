//! MPEG-1/2/2.5 Layer III frame splitting.
//!
//! A stream is tiled as `leading ‖ frame* ‖ trailing`. Leading bytes hold an
//! ID3v2 tag or junk before the first sync word; trailing bytes hold an ID3v1
//! tag, a truncated last frame or anything that stops looking like frames.

use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpegVersion {
    Mpeg1,
    Mpeg2,
    Mpeg25,
}

const BITRATES_V1_L3: [u32; 15] = [
    0, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320,
];
const BITRATES_V2_L3: [u32; 15] = [0, 8, 16, 24, 32, 40, 48, 56, 64, 80, 96, 112, 128, 144, 160];
const SAMPLE_RATES_V1: [u32; 3] = [44_100, 48_000, 32_000];

/// Decoded 4-byte Layer III frame header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub raw: [u8; 4],
    pub version: MpegVersion,
    pub bitrate_kbps: u32,
    pub sample_rate: u32,
    pub padding: bool,
    /// Protection bit clear: a 16-bit CRC follows the header.
    pub crc_protected: bool,
    pub mono: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum HeaderError {
    NotLayer3,
    FreeBitrate,
}

impl FrameHeader {
    fn decode(b: [u8; 4]) -> std::result::Result<Self, HeaderError> {
        if b[0] != 0xFF || b[1] & 0xE0 != 0xE0 {
            return Err(HeaderError::NotLayer3);
        }
        let version = match (b[1] >> 3) & 3 {
            0 => MpegVersion::Mpeg25,
            2 => MpegVersion::Mpeg2,
            3 => MpegVersion::Mpeg1,
            _ => return Err(HeaderError::NotLayer3),
        };
        if (b[1] >> 1) & 3 != 1 {
            return Err(HeaderError::NotLayer3);
        }
        let bitrate_index = usize::from(b[2] >> 4);
        let rate_index = usize::from((b[2] >> 2) & 3);
        if bitrate_index == 15 || rate_index == 3 {
            return Err(HeaderError::NotLayer3);
        }
        if bitrate_index == 0 {
            return Err(HeaderError::FreeBitrate);
        }
        let (bitrate_kbps, sample_rate) = match version {
            MpegVersion::Mpeg1 => (BITRATES_V1_L3[bitrate_index], SAMPLE_RATES_V1[rate_index]),
            MpegVersion::Mpeg2 => (BITRATES_V2_L3[bitrate_index], SAMPLE_RATES_V1[rate_index] / 2),
            MpegVersion::Mpeg25 => (BITRATES_V2_L3[bitrate_index], SAMPLE_RATES_V1[rate_index] / 4),
        };
        Ok(FrameHeader {
            raw: b,
            version,
            bitrate_kbps,
            sample_rate,
            padding: b[2] & 0x02 != 0,
            crc_protected: b[1] & 0x01 == 0,
            mono: b[3] >> 6 == 3,
        })
    }

    /// Total frame length in bytes, header included.
    pub fn frame_len(&self) -> usize {
        let coefficient = match self.version {
            MpegVersion::Mpeg1 => 144,
            MpegVersion::Mpeg2 | MpegVersion::Mpeg25 => 72,
        };
        (coefficient * self.bitrate_kbps as usize * 1000) / self.sample_rate as usize
            + usize::from(self.padding)
    }

    pub fn side_info_len(&self) -> usize {
        match (self.version, self.mono) {
            (MpegVersion::Mpeg1, true) => 17,
            (MpegVersion::Mpeg1, false) => 32,
            (_, true) => 9,
            (_, false) => 17,
        }
    }

    /// Bytes between the frame start and the main data field.
    pub fn prefix_len(&self) -> usize {
        4 + if self.crc_protected { 2 } else { 0 } + self.side_info_len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mp3Frame {
    pub offset: usize,
    pub header: FrameHeader,
    pub len: usize,
    /// Main data field; excludes header, CRC and side information.
    pub data_span: Range<usize>,
}

impl Mp3Frame {
    pub fn span(&self) -> Range<usize> {
        self.offset..self.offset + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mp3Warning {
    /// The last frame's computed length runs past the end of the file.
    CorruptFrame { offset: usize, frame_len: usize, available: usize },
    /// Frames carry a CRC that is not recomputed after edits.
    CrcProtected { frames: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mp3Stream {
    raw: Vec<u8>,
    leading_end: usize,
    trailing_start: usize,
    frames: Vec<Mp3Frame>,
    warnings: Vec<Mp3Warning>,
}

impl Mp3Stream {
    pub fn as_bytes(&self) -> &[u8] {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn frames(&self) -> &[Mp3Frame] {
        &self.frames
    }

    pub fn leading_span(&self) -> Range<usize> {
        0..self.leading_end
    }

    pub fn trailing_span(&self) -> Range<usize> {
        self.trailing_start..self.raw.len()
    }

    pub fn warnings(&self) -> &[Mp3Warning] {
        &self.warnings
    }

    pub fn frame_data(&self, index: usize) -> &[u8] {
        &self.raw[self.frames[index].data_span.clone()]
    }

    /// Mutable data field of one frame; headers and side info stay out of reach.
    pub fn frame_data_mut(&mut self, index: usize) -> &mut [u8] {
        let span = self.frames[index].data_span.clone();
        &mut self.raw[span]
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.raw
    }
}

fn id3v2_len(bytes: &[u8]) -> usize {
    if bytes.len() < 10 || &bytes[0..3] != b"ID3" {
        return 0;
    }
    let size = bytes[6..10]
        .iter()
        .fold(0usize, |acc, &b| (acc << 7) | usize::from(b & 0x7F));
    let footer = if bytes[5] & 0x10 != 0 { 10 } else { 0 };
    (10 + size + footer).min(bytes.len())
}

fn header_at(bytes: &[u8], pos: usize) -> std::result::Result<FrameHeader, HeaderError> {
    match bytes.get(pos..pos + 4) {
        Some(b) => FrameHeader::decode([b[0], b[1], b[2], b[3]]),
        None => Err(HeaderError::NotLayer3),
    }
}

fn usable(header: &FrameHeader) -> bool {
    header.frame_len() > header.prefix_len()
}

/// Finds the first frame start at or after `from`. A candidate counts when its
/// successor is also a frame header or the file ends right after it.
fn find_sync(bytes: &[u8], from: usize) -> std::result::Result<usize, Error> {
    let mut saw_free = false;
    let mut truncated_candidate = None;
    for pos in from..bytes.len().saturating_sub(3) {
        match header_at(bytes, pos) {
            Ok(h) if usable(&h) => {
                let end = pos + h.frame_len();
                if end > bytes.len() {
                    truncated_candidate.get_or_insert(pos);
                    continue;
                }
                if end == bytes.len() || header_at(bytes, end).is_ok() {
                    return Ok(pos);
                }
            }
            Err(HeaderError::FreeBitrate) => saw_free = true,
            _ => {}
        }
    }
    if let Some(offset) = truncated_candidate {
        return Err(Error::CorruptFrame {
            offset,
            reason: "only frame is truncated".into(),
        });
    }
    Err(if saw_free {
        Error::FreeBitrate
    } else {
        Error::NoFramesFound
    })
}

/// Splits an MP3 image into frames.
pub fn parse_mp3(bytes: Vec<u8>) -> Result<Mp3Stream> {
    if bytes.is_empty() {
        return Err(Error::NoFramesFound);
    }
    let leading_end = find_sync(&bytes, id3v2_len(&bytes))?;

    let mut frames = Vec::new();
    let mut warnings = Vec::new();
    let mut pos = leading_end;
    while let Ok(header) = header_at(&bytes, pos) {
        let len = header.frame_len();
        if !usable(&header) {
            break;
        }
        if pos + len > bytes.len() {
            warnings.push(Mp3Warning::CorruptFrame {
                offset: pos,
                frame_len: len,
                available: bytes.len() - pos,
            });
            break;
        }
        frames.push(Mp3Frame {
            offset: pos,
            header,
            len,
            data_span: pos + header.prefix_len()..pos + len,
        });
        pos += len;
    }

    let crc_frames = frames.iter().filter(|f| f.header.crc_protected).count();
    if crc_frames > 0 {
        warnings.push(Mp3Warning::CrcProtected { frames: crc_frames });
    }
    for w in &warnings {
        log::warn!("{w:?}");
    }

    Ok(Mp3Stream {
        raw: bytes,
        leading_end,
        trailing_start: pos,
        frames,
        warnings,
    })
}

/// Reassembles the stream. Edits made through `frame_data_mut` are in place.
pub fn write_mp3(stream: &Mp3Stream) -> Vec<u8> {
    stream.raw.clone()
}
