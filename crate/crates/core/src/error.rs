use thiserror::Error;

/// Errors raised by the container parsers, the payload envelope and the
/// embedding methods.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed RIFF/WAV container: {0}")]
    MalformedRiff(String),

    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),

    #[error("no MPEG audio frames found")]
    NoFramesFound,

    #[error("free-bitrate MPEG frames are not supported")]
    FreeBitrate,

    #[error("corrupt MPEG frame at offset {offset}: {reason}")]
    CorruptFrame { offset: usize, reason: String },

    #[error("carrier has too few MPEG frames ({found}, need at least 2)")]
    TooFewFrames { found: usize },

    #[error("password must not be empty")]
    EmptyPassword,

    #[error("malformed sealed payload: {0}")]
    MalformedPayload(String),

    #[error("authentication failed: wrong password or corrupted data")]
    AuthenticationFailed,

    #[error("decompression failed after successful authentication")]
    DecompressionFailed,

    #[error("payload of {needed} bytes exceeds carrier capacity of {capacity} bytes")]
    PayloadTooLarge { needed: u64, capacity: u64 },

    #[error("no hidden data found in carrier")]
    NoHiddenData,

    #[error("MP3 carriers only accept text payloads")]
    NotTextPayload,

    #[error("format mismatch: {0}")]
    FormatMismatch(String),
}

impl Error {
    /// Stable identifier printed by the command-line tool.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MalformedRiff(_) => "MalformedRiff",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::NoFramesFound => "NoFramesFound",
            Error::FreeBitrate => "FreeBitrate",
            Error::CorruptFrame { .. } => "CorruptFrame",
            Error::TooFewFrames { .. } => "TooFewFrames",
            Error::EmptyPassword => "EmptyPassword",
            Error::MalformedPayload(_) => "MalformedPayload",
            Error::AuthenticationFailed => "AuthenticationFailed",
            Error::DecompressionFailed => "DecompressionFailed",
            Error::PayloadTooLarge { .. } => "PayloadTooLarge",
            Error::NoHiddenData => "NoHiddenData",
            Error::NotTextPayload => "NotTextPayload",
            Error::FormatMismatch(_) => "FormatMismatch",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
