//! Synthetic carriers for tests, benchmarks and demos.
//!
//! Frames produced here have valid Layer III headers and side-info sized
//! prefixes but random bodies; they parse like real MP3 streams, they do not
//! decode to meaningful audio.

use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};

use crate::riff_wav::{canonical_header, WavFormat};

pub fn pcm_format(num_channels: u16, sample_rate: u32, bits_per_sample: u16) -> WavFormat {
    WavFormat {
        audio_format: 1,
        num_channels,
        sample_rate,
        bits_per_sample,
        block_align: num_channels * bits_per_sample / 8,
        sub_format: None,
    }
}

/// Canonical 44-byte-header WAV around `data`.
pub fn wav_bytes(format: &WavFormat, data: &[u8]) -> Vec<u8> {
    let mut bytes = canonical_header(format, data.len() as u32);
    bytes.extend_from_slice(data);
    if data.len() % 2 == 1 {
        bytes.push(0);
    }
    bytes
}

/// WAV with `frames` sample-frames of uniformly random audio.
pub fn random_wav(format: &WavFormat, frames: usize, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut data = vec![0u8; frames * usize::from(format.block_align)];
    rng.fill_bytes(&mut data);
    wav_bytes(format, &data)
}

/// Smallest 16-bit stereo 44.1 kHz random WAV whose dense LSB capacity
/// holds `sealed_len` bytes.
pub fn random_wav_for_payload(sealed_len: usize, seed: u64) -> Vec<u8> {
    let format = pcm_format(2, 44_100, 16);
    // each 4-byte frame carries two low-order bytes
    let frames = ((sealed_len + 5) * 8).div_ceil(2) + 64;
    random_wav(&format, frames, seed)
}

fn header_bytes(bitrate_kbps: u32, crc: bool, padding: bool) -> [u8; 4] {
    const V1_L3: [u32; 15] = [0, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320];
    let index = V1_L3
        .iter()
        .position(|&b| b == bitrate_kbps)
        .filter(|&i| i > 0)
        .expect("bitrate must be a valid MPEG-1 Layer III bitrate") as u8;
    [
        0xFF,
        0xFA | u8::from(!crc),
        (index << 4) | (u8::from(padding) << 1),
        0x00,
    ]
}

/// `frames` MPEG-1 Layer III joint-stereo 44.1 kHz frames at a constant
/// bitrate with random bodies.
pub fn mp3_stream(frames: usize, bitrate_kbps: u32, crc: bool, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..frames {
        out.extend(random_frame(&mut rng, bitrate_kbps, crc, false));
    }
    out
}

/// Like [`mp3_stream`] but with a random padding bit per frame, mirroring the
/// alternating 417/418-byte frames of real 128 kbps 44.1 kHz encodes.
pub fn mp3_stream_padded(frames: usize, bitrate_kbps: u32, seed: u64) -> Vec<u8> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..frames {
        let padding = rng.random_bool(0.5);
        out.extend(random_frame(&mut rng, bitrate_kbps, false, padding));
    }
    out
}

fn random_frame(rng: &mut StdRng, bitrate_kbps: u32, crc: bool, padding: bool) -> Vec<u8> {
    let header = header_bytes(bitrate_kbps, crc, padding);
    let len = 144 * bitrate_kbps as usize * 1000 / 44_100 + usize::from(padding);
    let mut frame = vec![0u8; len];
    frame[..4].copy_from_slice(&header);
    rng.fill_bytes(&mut frame[4..]);
    frame
}
