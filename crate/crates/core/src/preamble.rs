/// Length + flags record placed in front of every hidden payload.
///
/// Serialized big-endian: `len[31:24] len[23:16] len[15:8] len[7:0] flags`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StegPreamble {
    pub payload_len: u32,
    /// Dense layout; set whenever compression was requested.
    pub dense: bool,
}

pub const PREAMBLE_LEN: usize = 5;
pub const PREAMBLE_BITS: usize = PREAMBLE_LEN * 8;

const DENSE_FLAG: u8 = 0x01;

impl StegPreamble {
    pub fn to_bytes(self) -> [u8; PREAMBLE_LEN] {
        let mut out = [0u8; PREAMBLE_LEN];
        for (i, byte) in out[..4].iter_mut().enumerate() {
            *byte = (self.payload_len >> (24 - 8 * i)) as u8;
        }
        out[4] = if self.dense { DENSE_FLAG } else { 0 };
        out
    }

    /// `None` when reserved flag bits are set.
    pub fn from_bytes(bytes: [u8; PREAMBLE_LEN]) -> Option<Self> {
        if bytes[4] & !DENSE_FLAG != 0 {
            return None;
        }
        let payload_len = bytes[..4]
            .iter()
            .fold(0u32, |acc, &b| (acc << 8) | u32::from(b));
        Some(StegPreamble {
            payload_len,
            dense: bytes[4] & DENSE_FLAG != 0,
        })
    }
}

/// Iterates the bits of `bytes`, most significant first.
pub(crate) fn bits_msb_first(bytes: &[u8]) -> impl Iterator<Item = u8> + '_ {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
}

/// Packs bits (most significant first) back into bytes.
pub(crate) fn pack_bits(bits: impl Iterator<Item = u8>, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for (i, bit) in bits.take(len * 8).enumerate() {
        out[i / 8] |= (bit & 1) << (7 - i % 8);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_endian_layout() {
        let p = StegPreamble { payload_len: 0x0102_0304, dense: true };
        assert_eq!(p.to_bytes(), [1, 2, 3, 4, 1]);
        assert_eq!(StegPreamble::from_bytes(p.to_bytes()), Some(p));
        assert_eq!(StegPreamble::from_bytes([0, 0, 0, 1, 2]), None);
    }

    #[test]
    fn bit_order() {
        let bits: Vec<u8> = bits_msb_first(&[0b1000_0001]).collect();
        assert_eq!(bits, [1, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(pack_bits(bits.into_iter(), 1), [0b1000_0001]);
    }
}
