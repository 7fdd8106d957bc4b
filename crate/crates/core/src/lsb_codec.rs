//! Method I: least-significant-bit embedding in PCM WAV data.
//!
//! Only the low-order byte of each sample word is eligible, walking the
//! interleaved samples so left and right channels alternate. The 40 preamble
//! bits always occupy the first 40 eligible bytes. Payload bits follow either
//! densely (every eligible byte) or sparsely (8 eligible bytes used, 8
//! skipped). Each payload byte is written most significant bit first.

use crate::error::{Error, Result};
use crate::payload::SealedPayload;
use crate::preamble::{bits_msb_first, pack_bits, StegPreamble, PREAMBLE_BITS, PREAMBLE_LEN};
use crate::riff_wav::WavFile;

/// Carrier positions for one WAV and mode, as offsets into the data region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LsbLayout {
    pub dense: bool,
    bytes_per_sample: usize,
    eligible: usize,
}

impl LsbLayout {
    pub fn new(wav: &WavFile, dense: bool) -> Result<Self> {
        let format = wav.format();
        format.validate_pcm()?;
        let block_align = usize::from(format.block_align);
        let frames = wav.data().len() / block_align;
        Ok(LsbLayout {
            dense,
            bytes_per_sample: format.bytes_per_sample(),
            eligible: frames * usize::from(format.num_channels),
        })
    }

    /// Number of low-order sample bytes in the data region.
    pub fn eligible_bytes(&self) -> usize {
        self.eligible
    }

    /// Number of positions available to payload bits after the preamble.
    pub fn payload_positions(&self) -> usize {
        let rest = self.eligible.saturating_sub(PREAMBLE_BITS);
        if self.dense {
            rest
        } else {
            (rest / 16) * 8 + (rest % 16).min(8)
        }
    }

    /// Data-region offset of the `i`-th preamble bit.
    pub fn preamble_position(&self, i: usize) -> usize {
        i * self.bytes_per_sample
    }

    /// Data-region offset of the `j`-th payload bit.
    pub fn payload_position(&self, j: usize) -> usize {
        let eligible_index = if self.dense {
            PREAMBLE_BITS + j
        } else {
            PREAMBLE_BITS + (j / 8) * 16 + j % 8
        };
        eligible_index * self.bytes_per_sample
    }

    /// Preamble and payload positions for a payload of `payload_len` bytes.
    pub fn carrier_positions(&self, payload_len: usize) -> impl Iterator<Item = usize> + '_ {
        (0..PREAMBLE_BITS)
            .map(|i| self.preamble_position(i))
            .chain((0..payload_len * 8).map(|j| self.payload_position(j)))
    }
}

fn capacity_for(layout: &LsbLayout, file_len: usize) -> u64 {
    if layout.eligible_bytes() < PREAMBLE_BITS {
        return 0;
    }
    let by_bits = layout.payload_positions() / 8;
    by_bits.min(file_len / 8).min(u32::MAX as usize) as u64
}

/// Largest sealed payload, in bytes, that fits the carrier in the given mode.
pub fn capacity_lsb(wav: &WavFile, dense: bool) -> Result<u64> {
    let layout = LsbLayout::new(wav, dense)?;
    Ok(capacity_for(&layout, wav.len()))
}

/// Hides `sealed` in the LSBs of `wav`'s data region. File length is unchanged.
pub fn embed_lsb(wav: &WavFile, sealed: &SealedPayload, dense: bool) -> Result<WavFile> {
    let layout = LsbLayout::new(wav, dense)?;
    let capacity = capacity_for(&layout, wav.len());
    let needed = sealed.len() as u64;
    if needed > capacity {
        return Err(Error::PayloadTooLarge { needed, capacity });
    }

    let preamble = StegPreamble {
        payload_len: sealed.len() as u32,
        dense,
    };
    let mut out = wav.clone();
    let data = out.data_mut();
    let preamble_bytes = preamble.to_bytes();
    let body = sealed.to_bytes();
    let bits = bits_msb_first(&preamble_bytes).chain(bits_msb_first(&body));
    for (pos, bit) in layout.carrier_positions(body.len()).zip(bits) {
        data[pos] = (data[pos] & 0xFE) | bit;
    }
    Ok(out)
}

fn read_preamble(layout: &LsbLayout, data: &[u8]) -> Option<StegPreamble> {
    if layout.eligible_bytes() < PREAMBLE_BITS {
        return None;
    }
    let bits = (0..PREAMBLE_BITS).map(|i| data[layout.preamble_position(i)] & 1);
    let bytes: [u8; PREAMBLE_LEN] = pack_bits(bits, PREAMBLE_LEN).try_into().ok()?;
    StegPreamble::from_bytes(bytes)
}

/// Locates the hidden payload and returns its layout and length.
fn locate(wav: &WavFile) -> Result<(LsbLayout, usize)> {
    let probe = LsbLayout::new(wav, true)?;
    let preamble = read_preamble(&probe, wav.data()).ok_or(Error::NoHiddenData)?;
    let layout = LsbLayout {
        dense: preamble.dense,
        ..probe
    };
    let len = preamble.payload_len as u64;
    if len == 0 || len > capacity_for(&layout, wav.len()) {
        return Err(Error::NoHiddenData);
    }
    Ok((layout, len as usize))
}

/// Recovers the sealed payload hidden by [`embed_lsb`].
pub fn extract_lsb(wav: &WavFile) -> Result<SealedPayload> {
    let (layout, len) = locate(wav)?;
    let data = wav.data();
    let bits = (0..len * 8).map(|j| data[layout.payload_position(j)] & 1);
    SealedPayload::from_bytes(&pack_bits(bits, len)).map_err(|_| Error::NoHiddenData)
}

/// Clears every LSB that carried preamble or payload bits.
pub fn remove_message(wav: &WavFile) -> Result<WavFile> {
    extract_lsb(wav)?;
    let (layout, len) = locate(wav)?;
    let mut out = wav.clone();
    let data = out.data_mut();
    for pos in layout.carrier_positions(len) {
        data[pos] &= 0xFE;
    }
    Ok(out)
}
