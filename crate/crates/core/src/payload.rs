//! The sealed message envelope.
//!
//! Plaintext is optionally DEFLATE-compressed, then encrypted with AES-256-GCM
//! under a key derived from the password with PBKDF2-HMAC-SHA256. Serialized
//! layout, with no framing (the embedding layer carries the length):
//!
//! ```text
//! flags (1) ‖ salt (16) ‖ nonce (12) ‖ ciphertext ‖ tag (16)
//! ```
//!
//! The flags byte is authenticated as associated data.

use std::fmt;
use std::io::{Read, Write};

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes256Gcm, Key, Nonce};
use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::error::{Error, Result};

pub const SALT_LEN: usize = 16;
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;
/// Bytes a sealed payload adds on top of the processed plaintext.
pub const ENVELOPE_OVERHEAD: usize = 1 + SALT_LEN + NONCE_LEN + TAG_LEN;
pub const DEFAULT_KDF_ITERATIONS: u32 = 100_000;

const RESERVED_MASK: u8 = 0xF0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompressionLevel {
    Off,
    Low,
    #[default]
    Medium,
    High,
}

impl CompressionLevel {
    fn bits(self) -> u8 {
        match self {
            CompressionLevel::Off => 0,
            CompressionLevel::Low => 1,
            CompressionLevel::Medium => 2,
            CompressionLevel::High => 3,
        }
    }

    fn from_bits(bits: u8) -> Self {
        match bits & 3 {
            0 => CompressionLevel::Off,
            1 => CompressionLevel::Low,
            2 => CompressionLevel::Medium,
            _ => CompressionLevel::High,
        }
    }

    fn preset(self) -> Option<Compression> {
        match self {
            CompressionLevel::Off => None,
            CompressionLevel::Low => Some(Compression::fast()),
            CompressionLevel::Medium => Some(Compression::default()),
            CompressionLevel::High => Some(Compression::best()),
        }
    }

    pub fn is_compressed(self) -> bool {
        self != CompressionLevel::Off
    }
}

impl fmt::Display for CompressionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompressionLevel::Off => "off",
            CompressionLevel::Low => "low",
            CompressionLevel::Medium => "medium",
            CompressionLevel::High => "high",
        })
    }
}

/// What the plaintext is, so extraction can restore it sensibly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadKind {
    /// UTF-16LE encoded text.
    Text,
    Doc,
    Pdf,
    Raw,
}

impl fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayloadKind::Text => "text",
            PayloadKind::Doc => "doc",
            PayloadKind::Pdf => "pdf",
            PayloadKind::Raw => "raw",
        })
    }
}

impl PayloadKind {
    fn bits(self) -> u8 {
        match self {
            PayloadKind::Text => 0,
            PayloadKind::Doc => 1,
            PayloadKind::Pdf => 2,
            PayloadKind::Raw => 3,
        }
    }

    fn from_bits(bits: u8) -> Self {
        match bits & 3 {
            0 => PayloadKind::Text,
            1 => PayloadKind::Doc,
            2 => PayloadKind::Pdf,
            _ => PayloadKind::Raw,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SealedPayload {
    flags: u8,
    salt: [u8; SALT_LEN],
    nonce: [u8; NONCE_LEN],
    ciphertext: Vec<u8>,
}

impl fmt::Debug for SealedPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SealedPayload")
            .field("level", &self.level())
            .field("kind", &self.kind())
            .field("len", &self.len())
            .finish_non_exhaustive()
    }
}

impl SealedPayload {
    pub fn level(&self) -> CompressionLevel {
        CompressionLevel::from_bits(self.flags)
    }

    pub fn kind(&self) -> PayloadKind {
        PayloadKind::from_bits(self.flags >> 2)
    }

    pub fn flags(&self) -> u8 {
        self.flags
    }

    pub fn salt(&self) -> &[u8; SALT_LEN] {
        &self.salt
    }

    pub fn nonce(&self) -> &[u8; NONCE_LEN] {
        &self.nonce
    }

    /// Ciphertext including the trailing authentication tag.
    pub fn ciphertext(&self) -> &[u8] {
        &self.ciphertext
    }

    /// Serialized length in bytes.
    pub fn len(&self) -> usize {
        1 + SALT_LEN + NONCE_LEN + self.ciphertext.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        out.push(self.flags);
        out.extend_from_slice(&self.salt);
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < ENVELOPE_OVERHEAD {
            return Err(Error::MalformedPayload(format!(
                "{} bytes is shorter than the {ENVELOPE_OVERHEAD}-byte envelope",
                bytes.len()
            )));
        }
        let flags = bytes[0];
        if flags & RESERVED_MASK != 0 {
            return Err(Error::MalformedPayload(format!(
                "reserved flag bits set: 0x{flags:02x}"
            )));
        }
        let mut salt = [0u8; SALT_LEN];
        salt.copy_from_slice(&bytes[1..1 + SALT_LEN]);
        let mut nonce = [0u8; NONCE_LEN];
        nonce.copy_from_slice(&bytes[1 + SALT_LEN..1 + SALT_LEN + NONCE_LEN]);
        Ok(SealedPayload {
            flags,
            salt,
            nonce,
            ciphertext: bytes[1 + SALT_LEN + NONCE_LEN..].to_vec(),
        })
    }
}

/// Key-derivation settings shared by sealing and opening.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KdfConfig {
    pub iterations: u32,
}

impl Default for KdfConfig {
    fn default() -> Self {
        KdfConfig {
            iterations: DEFAULT_KDF_ITERATIONS,
        }
    }
}

impl KdfConfig {
    fn derive(&self, password: &str, salt: &[u8; SALT_LEN]) -> Key<Aes256Gcm> {
        let mut key = Key::<Aes256Gcm>::default();
        pbkdf2::pbkdf2_hmac::<Sha256>(password.as_bytes(), salt, self.iterations, &mut key);
        key
    }
}

fn compress(plaintext: &[u8], level: CompressionLevel) -> Vec<u8> {
    match level.preset() {
        None => plaintext.to_vec(),
        Some(preset) => {
            let mut enc = DeflateEncoder::new(Vec::with_capacity(plaintext.len() / 2), preset);
            enc.write_all(plaintext).expect("writing to a Vec cannot fail");
            enc.finish().expect("writing to a Vec cannot fail")
        }
    }
}

fn decompress(processed: Vec<u8>, level: CompressionLevel) -> Result<Vec<u8>> {
    if !level.is_compressed() {
        return Ok(processed);
    }
    let mut out = Vec::with_capacity(processed.len() * 2);
    DeflateDecoder::new(processed.as_slice())
        .read_to_end(&mut out)
        .map_err(|_| Error::DecompressionFailed)?;
    Ok(out)
}

/// Compresses and encrypts `plaintext` with fresh randomness from `rng`.
pub fn seal_with<R: RngCore + CryptoRng>(
    rng: &mut R,
    kdf: &KdfConfig,
    plaintext: &[u8],
    password: &str,
    level: CompressionLevel,
    kind: PayloadKind,
) -> Result<SealedPayload> {
    if password.is_empty() {
        return Err(Error::EmptyPassword);
    }
    let flags = level.bits() | (kind.bits() << 2);
    let mut salt = [0u8; SALT_LEN];
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut salt);
    rng.fill_bytes(&mut nonce);

    let processed = compress(plaintext, level);
    let cipher = Aes256Gcm::new(&kdf.derive(password, &salt));
    let ciphertext = cipher
        .encrypt(
            Nonce::from_slice(&nonce),
            Payload {
                msg: &processed,
                aad: &[flags],
            },
        )
        .expect("AES-GCM encryption of an in-memory buffer cannot fail");

    Ok(SealedPayload {
        flags,
        salt,
        nonce,
        ciphertext,
    })
}

/// Seals with the thread-local CSPRNG and the default key derivation.
pub fn seal(
    plaintext: &[u8],
    password: &str,
    level: CompressionLevel,
    kind: PayloadKind,
) -> Result<SealedPayload> {
    seal_with(&mut rand::rng(), &KdfConfig::default(), plaintext, password, level, kind)
}

pub fn open_with(kdf: &KdfConfig, sealed: &SealedPayload, password: &str) -> Result<Vec<u8>> {
    if password.is_empty() {
        return Err(Error::EmptyPassword);
    }
    let cipher = Aes256Gcm::new(&kdf.derive(password, &sealed.salt));
    let processed = cipher
        .decrypt(
            Nonce::from_slice(&sealed.nonce),
            Payload {
                msg: &sealed.ciphertext,
                aad: &[sealed.flags],
            },
        )
        .map_err(|_| Error::AuthenticationFailed)?;
    decompress(processed, sealed.level())
}

/// Authenticates, decrypts and decompresses with the default key derivation.
pub fn open(sealed: &SealedPayload, password: &str) -> Result<Vec<u8>> {
    open_with(&KdfConfig::default(), sealed, password)
}

pub fn text_to_utf16le(text: &str) -> Vec<u8> {
    text.encode_utf16().flat_map(u16::to_le_bytes).collect()
}

pub fn utf16le_to_text(bytes: &[u8]) -> Result<String> {
    if !bytes.len().is_multiple_of(2) {
        return Err(Error::MalformedPayload("odd-length UTF-16 text".into()));
    }
    let units: Vec<u16> = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    String::from_utf16(&units).map_err(|e| Error::MalformedPayload(e.to_string()))
}
