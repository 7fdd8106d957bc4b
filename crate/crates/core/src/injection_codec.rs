//! Method II: payload injection.
//!
//! Encoded layout, with RIFF and `data` size fields left as they were:
//!
//! ```text
//! header ‖ preamble (5) ‖ audio data ‖ trailing chunks ‖ sealed payload
//! ```
//!
//! Extraction trusts the preamble only when the file length equals the
//! carrier's declared RIFF length plus the preamble and the announced payload.

use crate::error::{Error, Result};
use crate::payload::{SealedPayload, ENVELOPE_OVERHEAD};
use crate::preamble::{StegPreamble, PREAMBLE_LEN};
use crate::riff_wav::{riff_size, scan, WavFile};

/// Returns the encoded file image. Never modifies an audio byte.
pub fn embed_injection(wav: &WavFile, sealed: &SealedPayload) -> Result<Vec<u8>> {
    let body = sealed.to_bytes();
    let payload_len = u32::try_from(body.len()).map_err(|_| Error::PayloadTooLarge {
        needed: body.len() as u64,
        capacity: u64::from(u32::MAX),
    })?;
    let preamble = StegPreamble {
        payload_len,
        dense: sealed.level().is_compressed(),
    };
    let raw = wav.as_bytes();
    let split = wav.header_span().end;
    let mut out = Vec::with_capacity(raw.len() + PREAMBLE_LEN + body.len());
    out.extend_from_slice(&raw[..split]);
    out.extend_from_slice(&preamble.to_bytes());
    out.extend_from_slice(&raw[split..]);
    out.extend_from_slice(&body);
    Ok(out)
}

struct Located {
    header_len: usize,
    payload_start: usize,
}

fn locate(bytes: &[u8]) -> Result<Located> {
    let (_, data) = scan(bytes).map_err(|_| Error::NoHiddenData)?;
    let header_len = data.start;
    let record: [u8; PREAMBLE_LEN] = bytes
        .get(header_len..header_len + PREAMBLE_LEN)
        .and_then(|r| r.try_into().ok())
        .ok_or(Error::NoHiddenData)?;
    let preamble = StegPreamble::from_bytes(record).ok_or(Error::NoHiddenData)?;
    let payload_len = preamble.payload_len as usize;
    if payload_len < ENVELOPE_OVERHEAD {
        return Err(Error::NoHiddenData);
    }
    let original_len = bytes
        .len()
        .checked_sub(PREAMBLE_LEN + payload_len)
        .filter(|&len| len >= header_len)
        .ok_or(Error::NoHiddenData)?;
    let declared = riff_size(bytes).map(|s| s as usize + 8);
    if declared != Some(original_len) {
        return Err(Error::NoHiddenData);
    }
    Ok(Located {
        header_len,
        payload_start: bytes.len() - payload_len,
    })
}

pub fn extract_injection(bytes: &[u8]) -> Result<SealedPayload> {
    let at = locate(bytes)?;
    SealedPayload::from_bytes(&bytes[at.payload_start..]).map_err(|_| Error::NoHiddenData)
}

/// Restores the original carrier byte for byte.
pub fn remove_injection(bytes: &[u8]) -> Result<Vec<u8>> {
    extract_injection(bytes)?;
    let at = locate(bytes)?;
    let mut out = Vec::with_capacity(at.payload_start - PREAMBLE_LEN);
    out.extend_from_slice(&bytes[..at.header_len]);
    out.extend_from_slice(&bytes[at.header_len + PREAMBLE_LEN..at.payload_start]);
    Ok(out)
}
