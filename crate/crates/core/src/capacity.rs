//! Pre-flight capacity report, shown before any encoding begins.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::lsb_codec::capacity_lsb;
use crate::mp3_codec::{capacity_mp3, Mp3EmbedConfig};
use crate::mpeg_frame::parse_mp3;
use crate::payload::ENVELOPE_OVERHEAD;
use crate::riff_wav::parse_wav;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LsbDense,
    LsbSparse,
    Injection,
    Mp3,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::LsbDense => "lsb (dense)",
            Method::LsbSparse => "lsb (sparse)",
            Method::Injection => "inject",
            Method::Mp3 => "mp3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CapacityReport {
    pub method: Method,
    pub carrier_bytes: u64,
    /// Largest sealed payload the method accepts; embedding one byte more fails.
    pub max_sealed_bytes: u64,
    /// `max_sealed_bytes` minus envelope overhead. Compression can move the
    /// real plaintext limit either way.
    pub estimated_max_plaintext_bytes: u64,
    pub envelope_overhead_bytes: u64,
    /// Injection has no carrier-derived limit, only the 32-bit length field.
    pub unbounded: bool,
}

pub fn report(carrier: &[u8], method: Method, mp3: &Mp3EmbedConfig) -> Result<CapacityReport> {
    let max_sealed_bytes = match method {
        Method::LsbDense | Method::LsbSparse => {
            let wav = parse_wav(carrier.to_vec())?;
            capacity_lsb(&wav, method == Method::LsbDense)?
        }
        Method::Injection => {
            parse_wav(carrier.to_vec())?;
            u64::from(u32::MAX)
        }
        Method::Mp3 => capacity_mp3(&parse_mp3(carrier.to_vec())?, mp3)?,
    };
    let overhead = ENVELOPE_OVERHEAD as u64;
    Ok(CapacityReport {
        method,
        carrier_bytes: carrier.len() as u64,
        max_sealed_bytes,
        estimated_max_plaintext_bytes: max_sealed_bytes.saturating_sub(overhead),
        envelope_overhead_bytes: overhead,
        unbounded: method == Method::Injection,
    })
}
