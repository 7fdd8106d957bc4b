//! Byte/bit comparison and sample-level distortion measurement.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::riff_wav::WavFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiffReport {
    pub identical: bool,
    pub len_a: u64,
    pub len_b: u64,
    pub first_diff_offset: Option<u64>,
    /// Bytes past the end of the shorter input count as differing, with all
    /// eight of their bits.
    pub differing_byte_count: u64,
    pub differing_bit_count: u64,
}

pub fn compare_files(a: &[u8], b: &[u8]) -> DiffReport {
    let common = a.len().min(b.len());
    let mut first = None;
    let mut bytes = 0u64;
    let mut bits = 0u64;
    for (i, (x, y)) in a[..common].iter().zip(&b[..common]).enumerate() {
        let d = x ^ y;
        if d != 0 {
            first.get_or_insert(i as u64);
            bytes += 1;
            bits += u64::from(d.count_ones());
        }
    }
    let excess = (a.len().max(b.len()) - common) as u64;
    if excess > 0 {
        first.get_or_insert(common as u64);
    }
    DiffReport {
        identical: first.is_none(),
        len_a: a.len() as u64,
        len_b: b.len() as u64,
        first_diff_offset: first,
        differing_byte_count: bytes + excess,
        differing_bit_count: bits + 8 * excess,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionReport {
    pub samples: u64,
    /// Largest absolute difference, in native sample units.
    pub max_sample_delta: u64,
    pub rms_delta: f64,
    pub modified_sample_fraction: f64,
}

/// Decodes one little-endian PCM sample word to a signed value.
fn sample_value(word: &[u8]) -> i64 {
    match word.len() {
        1 => i64::from(word[0]) - 128,
        2 => i64::from(i16::from_le_bytes([word[0], word[1]])),
        3 => {
            let v = i32::from_le_bytes([0, word[0], word[1], word[2]]) >> 8;
            i64::from(v)
        }
        4 => i64::from(i32::from_le_bytes([word[0], word[1], word[2], word[3]])),
        _ => unreachable!("validated sample width"),
    }
}

pub fn distortion(original: &WavFile, encoded: &WavFile) -> Result<DistortionReport> {
    let (fa, fb) = (original.format(), encoded.format());
    fa.validate_pcm()?;
    fb.validate_pcm()?;
    if fa.num_channels != fb.num_channels || fa.bits_per_sample != fb.bits_per_sample {
        return Err(Error::FormatMismatch(format!(
            "{}ch/{}bit vs {}ch/{}bit",
            fa.num_channels, fa.bits_per_sample, fb.num_channels, fb.bits_per_sample
        )));
    }
    if original.data().len() != encoded.data().len() {
        return Err(Error::FormatMismatch(format!(
            "data lengths differ: {} vs {}",
            original.data().len(),
            encoded.data().len()
        )));
    }

    let width = fa.bytes_per_sample();
    let mut samples = 0u64;
    let mut modified = 0u64;
    let mut max = 0u64;
    let mut sum_sq = 0f64;
    for (x, y) in original
        .data()
        .chunks_exact(width)
        .zip(encoded.data().chunks_exact(width))
    {
        samples += 1;
        let delta = sample_value(x).abs_diff(sample_value(y));
        if delta != 0 {
            modified += 1;
            max = max.max(delta);
            sum_sq += (delta as f64) * (delta as f64);
        }
    }
    let (rms_delta, modified_sample_fraction) = if samples == 0 {
        (0.0, 0.0)
    } else {
        (
            (sum_sq / samples as f64).sqrt(),
            modified as f64 / samples as f64,
        )
    };
    Ok(DistortionReport {
        samples,
        max_sample_delta: max,
        rms_delta,
        modified_sample_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{pcm_format, random_wav, wav_bytes};
    use crate::riff_wav::parse_wav;
    use proptest::prelude::*;

    fn naive(a: &[u8], b: &[u8]) -> (bool, u64, u64) {
        let n = a.len().max(b.len());
        let mut bytes = 0;
        let mut bits = 0;
        for i in 0..n {
            match (a.get(i), b.get(i)) {
                (Some(x), Some(y)) => {
                    if x != y {
                        bytes += 1;
                    }
                    for k in 0..8 {
                        if (x >> k) & 1 != (y >> k) & 1 {
                            bits += 1;
                        }
                    }
                }
                _ => {
                    bytes += 1;
                    bits += 8;
                }
            }
        }
        (bytes == 0, bytes, bits)
    }

    #[test]
    fn identity_and_single_flip() {
        let x = vec![1u8, 2, 3, 4];
        let r = compare_files(&x, &x);
        assert!(r.identical);
        assert_eq!((r.differing_byte_count, r.differing_bit_count, r.first_diff_offset), (0, 0, None));
        let mut y = x.clone();
        y[2] ^= 0x10;
        let r = compare_files(&x, &y);
        assert!(!r.identical);
        assert_eq!(r.differing_bit_count, 1);
        assert_eq!(r.first_diff_offset, Some(2));
    }

    #[test]
    fn length_difference_counts() {
        let r = compare_files(b"abc", b"abcde");
        assert!(!r.identical);
        assert_eq!(r.first_diff_offset, Some(3));
        assert_eq!(r.differing_byte_count, 2);
        assert_eq!(r.differing_bit_count, 16);
    }

    #[test]
    fn sample_decoding() {
        assert_eq!(sample_value(&[0]), -128);
        assert_eq!(sample_value(&[0xFF, 0x7F]), 32767);
        assert_eq!(sample_value(&[0x00, 0x00, 0x80]), -8_388_608);
        assert_eq!(sample_value(&[0xFF, 0xFF, 0xFF, 0xFF]), -1);
    }

    #[test]
    fn identical_wavs_report_zero() {
        let wav = parse_wav(random_wav(&pcm_format(2, 44_100, 16), 100, 1)).unwrap();
        let r = distortion(&wav, &wav).unwrap();
        assert_eq!(r.samples, 200);
        assert_eq!(r.max_sample_delta, 0);
        assert_eq!(r.rms_delta, 0.0);
        assert_eq!(r.modified_sample_fraction, 0.0);
    }

    #[test]
    fn known_deltas() {
        let format = pcm_format(1, 44_100, 16);
        let a = parse_wav(wav_bytes(&format, &[0, 0, 0, 0, 0, 0, 0, 0])).unwrap();
        // samples: 0 -> 1, 0 -> -1, 0 -> 0, 0 -> 3
        let b = parse_wav(wav_bytes(&format, &[1, 0, 0xFF, 0xFF, 0, 0, 3, 0])).unwrap();
        let r = distortion(&a, &b).unwrap();
        assert_eq!(r.max_sample_delta, 3);
        assert!((r.rms_delta - (11.0f64 / 4.0).sqrt()).abs() < 1e-12);
        assert_eq!(r.modified_sample_fraction, 0.75);
    }

    #[test]
    fn mismatched_formats() {
        let a = parse_wav(random_wav(&pcm_format(2, 44_100, 16), 10, 1)).unwrap();
        let b = parse_wav(random_wav(&pcm_format(1, 44_100, 16), 20, 1)).unwrap();
        let c = parse_wav(random_wav(&pcm_format(2, 44_100, 16), 11, 1)).unwrap();
        assert!(matches!(distortion(&a, &b), Err(Error::FormatMismatch(_))));
        assert!(matches!(distortion(&a, &c), Err(Error::FormatMismatch(_))));
    }

    proptest! {
        #[test]
        fn matches_naive_and_is_symmetric(a in proptest::collection::vec(any::<u8>(), 0..64), b in proptest::collection::vec(any::<u8>(), 0..64)) {
            let ab = compare_files(&a, &b);
            let ba = compare_files(&b, &a);
            let (same, bytes, bits) = naive(&a, &b);
            prop_assert_eq!(ab.identical, same);
            prop_assert_eq!(ab.identical, ba.identical);
            prop_assert_eq!(ab.differing_byte_count, bytes);
            prop_assert_eq!(ab.differing_bit_count, bits);
            prop_assert_eq!(ba.differing_bit_count, bits);
            prop_assert_eq!(ab.first_diff_offset, ba.first_diff_offset);
        }
    }
}
