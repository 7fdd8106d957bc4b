//! Method III: LSB embedding in MP3 frame data fields.
//!
//! The 40-bit preamble lives in the LSBs of the first 40 data-field bytes of
//! frame 0. Payload bits fill every data-field byte of frames
//! `1, 1 + (skip + 1), 1 + 2 (skip + 1), ...`, most significant bit first.
//! The skip value is not stored; both sides must agree on it.

use crate::error::{Error, Result};
use crate::mpeg_frame::Mp3Stream;
use crate::payload::{PayloadKind, SealedPayload};
use crate::preamble::{bits_msb_first, pack_bits, StegPreamble, PREAMBLE_BITS, PREAMBLE_LEN};

pub const DEFAULT_SKIP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mp3EmbedConfig {
    /// Unmodified frames between consecutive payload frames.
    pub skip: usize,
}

impl Default for Mp3EmbedConfig {
    fn default() -> Self {
        Mp3EmbedConfig { skip: DEFAULT_SKIP }
    }
}

impl Mp3EmbedConfig {
    /// Indices of the frames that carry payload bits.
    pub fn payload_frames(&self, frame_count: usize) -> impl Iterator<Item = usize> {
        (1..frame_count).step_by(self.skip.saturating_add(1))
    }
}

/// Absolute byte offsets of payload LSB carriers, in embedding order.
fn payload_positions<'a>(
    stream: &'a Mp3Stream,
    cfg: &Mp3EmbedConfig,
) -> impl Iterator<Item = usize> + 'a {
    cfg.payload_frames(stream.frames().len())
        .flat_map(move |i| stream.frames()[i].data_span.clone())
}

fn preamble_positions(stream: &Mp3Stream) -> Option<std::ops::Range<usize>> {
    let span = stream.frames().first()?.data_span.clone();
    (span.len() >= PREAMBLE_BITS).then(|| span.start..span.start + PREAMBLE_BITS)
}

/// Largest sealed payload, in bytes, that the stream can carry.
pub fn capacity_mp3(stream: &Mp3Stream, cfg: &Mp3EmbedConfig) -> Result<u64> {
    let frames = stream.frames();
    if frames.len() < 2 {
        return Err(Error::TooFewFrames { found: frames.len() });
    }
    if preamble_positions(stream).is_none() {
        return Ok(0);
    }
    let bits: usize = cfg
        .payload_frames(frames.len())
        .map(|i| frames[i].data_span.len())
        .sum();
    let by_file = stream.len() / 16;
    Ok((bits / 8).min(by_file).min(u32::MAX as usize) as u64)
}

/// Hides a text payload. Headers, CRCs and side information are untouched.
pub fn embed_mp3(
    stream: &Mp3Stream,
    sealed: &SealedPayload,
    cfg: &Mp3EmbedConfig,
) -> Result<Mp3Stream> {
    if sealed.kind() != PayloadKind::Text {
        return Err(Error::NotTextPayload);
    }
    let capacity = capacity_mp3(stream, cfg)?;
    let needed = sealed.len() as u64;
    if needed > capacity {
        return Err(Error::PayloadTooLarge { needed, capacity });
    }

    let preamble = StegPreamble {
        payload_len: sealed.len() as u32,
        dense: sealed.level().is_compressed(),
    }
    .to_bytes();
    let body = sealed.to_bytes();
    let positions: Vec<usize> = preamble_positions(stream)
        .into_iter()
        .flatten()
        .chain(payload_positions(stream, cfg).take(body.len() * 8))
        .collect();

    let mut raw = stream.as_bytes().to_vec();
    let bits = bits_msb_first(&preamble).chain(bits_msb_first(&body));
    for (pos, bit) in positions.into_iter().zip(bits) {
        raw[pos] = (raw[pos] & 0xFE) | bit;
    }
    crate::mpeg_frame::parse_mp3(raw)
}

pub fn extract_mp3(stream: &Mp3Stream, cfg: &Mp3EmbedConfig) -> Result<SealedPayload> {
    let capacity = capacity_mp3(stream, cfg)?;
    let header = preamble_positions(stream).ok_or(Error::NoHiddenData)?;
    let raw = stream.as_bytes();
    let record: [u8; PREAMBLE_LEN] = pack_bits(header.map(|p| raw[p] & 1), PREAMBLE_LEN)
        .try_into()
        .expect("five bytes");
    let preamble = StegPreamble::from_bytes(record).ok_or(Error::NoHiddenData)?;
    let len = u64::from(preamble.payload_len);
    if len == 0 || len > capacity {
        return Err(Error::NoHiddenData);
    }
    let len = len as usize;
    let bits = payload_positions(stream, cfg).map(|p| raw[p] & 1);
    SealedPayload::from_bytes(&pack_bits(bits, len)).map_err(|_| Error::NoHiddenData)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{mp3_stream, mp3_stream_padded};
    use crate::mpeg_frame::{parse_mp3, write_mp3};
    use crate::payload::{open_with, seal_with, CompressionLevel, KdfConfig};
    use proptest::prelude::*;

    const FAST: KdfConfig = KdfConfig { iterations: 16 };

    fn seal_text(m: &[u8]) -> SealedPayload {
        seal_with(&mut rand::rng(), &FAST, m, "pw", CompressionLevel::Off, PayloadKind::Text).unwrap()
    }

    /// Reference: enumerate selected frames by modular arithmetic.
    fn oracle_capacity(stream: &Mp3Stream, skip: usize) -> u64 {
        let mut bits = 0;
        for (i, f) in stream.frames().iter().enumerate() {
            if i >= 1 && (i - 1) % (skip + 1) == 0 {
                bits += f.data_span.len();
            }
        }
        ((bits / 8).min(stream.len() / 16)) as u64
    }

    #[test]
    fn one_sixteenth_cap() {
        let mut bytes = mp3_stream(3, 128, false, 1);
        bytes.resize(1600, 0);
        let stream = parse_mp3(bytes).unwrap();
        assert_eq!(stream.len() / 16, 100);
        let cap = capacity_mp3(&stream, &Mp3EmbedConfig { skip: 0 }).unwrap();
        // two payload frames of 381 data bytes each
        assert_eq!(cap, (2 * 381 / 8u64).min(stream.len() as u64 / 16));

        let stream = parse_mp3(mp3_stream(400, 128, false, 1)).unwrap();
        let cap = capacity_mp3(&stream, &Mp3EmbedConfig { skip: 0 }).unwrap();
        assert_eq!(cap, (400 * 417 / 16) as u64);
    }

    #[test]
    fn tiny_first_frame_gives_zero() {
        // MPEG-2.5, 8 kbps, 11.025 kHz: 52-byte frames with 31-byte data fields
        let mut bytes = Vec::new();
        for _ in 0..10 {
            bytes.extend_from_slice(&[0xFF, 0xE3, 0x10, 0x00]);
            bytes.extend_from_slice(&[0u8; 48]);
        }
        let stream = parse_mp3(bytes).unwrap();
        assert_eq!(stream.frames().len(), 10);
        assert_eq!(capacity_mp3(&stream, &Mp3EmbedConfig::default()).unwrap(), 0);
        assert_eq!(extract_mp3(&stream, &Mp3EmbedConfig::default()), Err(Error::NoHiddenData));
    }

    #[test]
    fn cap_tracks_bit_bound_when_smaller() {
        let stream = parse_mp3(mp3_stream_padded(200, 128, 4)).unwrap();
        for skip in [0, 1, 3, 7, 20] {
            let cap = capacity_mp3(&stream, &Mp3EmbedConfig { skip }).unwrap();
            assert_eq!(cap, oracle_capacity(&stream, skip), "skip {skip}");
        }
        let huge = capacity_mp3(&stream, &Mp3EmbedConfig { skip: 1000 }).unwrap();
        assert_eq!(huge, oracle_capacity(&stream, 1000));
    }

    #[test]
    fn huge_skip_selects_only_second_frame() {
        let stream = parse_mp3(mp3_stream(1, 128, false, 1)).unwrap();
        assert_eq!(
            capacity_mp3(&stream, &Mp3EmbedConfig::default()),
            Err(Error::TooFewFrames { found: 1 })
        );
        // frame 1 is always selected once a stream has two frames
        let stream = parse_mp3(mp3_stream(2, 128, false, 1)).unwrap();
        let cap = capacity_mp3(&stream, &Mp3EmbedConfig { skip: usize::MAX }).unwrap();
        assert_eq!(cap, (381 / 8u64).min(stream.len() as u64 / 16));
        let frames: Vec<usize> = Mp3EmbedConfig { skip: 5 }.payload_frames(6).collect();
        assert_eq!(frames, [1]);
        let none: Vec<usize> = Mp3EmbedConfig { skip: 5 }.payload_frames(1).collect();
        assert!(none.is_empty());
    }

    #[test]
    fn skip_zero_uses_every_frame_after_first() {
        let frames: Vec<usize> = Mp3EmbedConfig { skip: 0 }.payload_frames(5).collect();
        assert_eq!(frames, [1, 2, 3, 4]);
        let frames: Vec<usize> = Mp3EmbedConfig { skip: 3 }.payload_frames(10).collect();
        assert_eq!(frames, [1, 5, 9]);
    }

    #[test]
    fn rejects_non_text_and_oversize() {
        let stream = parse_mp3(mp3_stream(40, 128, false, 2)).unwrap();
        let doc = seal_with(&mut rand::rng(), &FAST, b"x", "pw", CompressionLevel::Off, PayloadKind::Doc).unwrap();
        assert_eq!(embed_mp3(&stream, &doc, &Mp3EmbedConfig::default()), Err(Error::NotTextPayload));
        let cfg = Mp3EmbedConfig::default();
        let cap = capacity_mp3(&stream, &cfg).unwrap() as usize;
        let fits = SealedPayload::from_bytes(&vec![0u8; cap]).unwrap();
        let over = SealedPayload::from_bytes(&vec![0u8; cap + 1]).unwrap();
        assert!(embed_mp3(&stream, &fits, &cfg).is_ok());
        assert_eq!(
            embed_mp3(&stream, &over, &cfg),
            Err(Error::PayloadTooLarge { needed: cap as u64 + 1, capacity: cap as u64 })
        );
    }

    #[test]
    fn edits_are_localized_lsbs() {
        let bytes = mp3_stream_padded(120, 128, 8);
        let stream = parse_mp3(bytes.clone()).unwrap();
        let cfg = Mp3EmbedConfig { skip: 2 };
        let s = seal_text(&[0x5Au8; 300]);
        let out = embed_mp3(&stream, &s, &cfg).unwrap();
        let encoded = write_mp3(&out);
        assert_eq!(encoded.len(), bytes.len());
        assert_eq!(out.frames(), stream.frames());

        let mut allowed = vec![false; bytes.len()];
        let start = stream.frames()[0].data_span.start;
        allowed[start..start + 40].fill(true);
        for (i, f) in stream.frames().iter().enumerate() {
            if i >= 1 && (i - 1) % 3 == 0 {
                for p in f.data_span.clone() {
                    allowed[p] = true;
                }
            }
        }
        for (i, (a, b)) in bytes.iter().zip(&encoded).enumerate() {
            if a != b {
                assert_eq!(a ^ b, 1);
                assert!(allowed[i], "offset {i}");
            }
        }
        assert_eq!(extract_mp3(&out, &cfg).unwrap(), s);
    }

    #[test]
    fn wrong_skip_never_yields_plaintext() {
        let stream = parse_mp3(mp3_stream_padded(300, 128, 12)).unwrap();
        let cfg = Mp3EmbedConfig { skip: 3 };
        let s = seal_text(b"the skip value is a shared secret");
        let out = embed_mp3(&stream, &s, &cfg).unwrap();
        for skip in 0..=8 {
            let got = extract_mp3(&out, &Mp3EmbedConfig { skip });
            if skip == 3 {
                assert_eq!(open_with(&FAST, &got.unwrap(), "pw").unwrap(), b"the skip value is a shared secret");
                continue;
            }
            match got {
                Err(Error::NoHiddenData) => {}
                Ok(sealed) => assert_eq!(open_with(&FAST, &sealed, "pw"), Err(Error::AuthenticationFailed)),
                Err(e) => panic!("skip {skip}: {e}"),
            }
        }
    }

    #[test]
    fn pristine_stream_has_no_message() {
        let mut misses = 0;
        for seed in 0..20 {
            let stream = parse_mp3(mp3_stream(50, 128, false, seed)).unwrap();
            match extract_mp3(&stream, &Mp3EmbedConfig::default()) {
                Err(Error::NoHiddenData) => misses += 1,
                Ok(sealed) => assert_eq!(open_with(&FAST, &sealed, "pw"), Err(Error::AuthenticationFailed)),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(misses >= 19);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip(seed in any::<u64>(), frames in 2usize..80, skip in 0usize..6, m in proptest::collection::vec(any::<u8>(), 0..200)) {
            let stream = parse_mp3(mp3_stream_padded(frames, 128, seed)).unwrap();
            let cfg = Mp3EmbedConfig { skip };
            let s = seal_text(&m);
            match embed_mp3(&stream, &s, &cfg) {
                Ok(out) => {
                    prop_assert_eq!(out.len(), stream.len());
                    prop_assert_eq!(out.frames(), stream.frames());
                    prop_assert_eq!(extract_mp3(&out, &cfg).unwrap(), s);
                }
                Err(Error::PayloadTooLarge { capacity, .. }) => {
                    prop_assert!(capacity < s.len() as u64);
                }
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
    }
}
