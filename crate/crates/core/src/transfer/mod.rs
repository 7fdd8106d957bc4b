//! LAN file transfer with explicit receiver consent.
//!
//! The sender offers a file on the receiver's control port. Nothing but the
//! offer crosses the wire until the receiver answers ACCEPT with a freshly
//! bound, OS-assigned data port; the file is then streamed there in
//! length-prefixed chunks and verified against the offered SHA-256 digest.
//! There is no transport encryption; confidentiality comes from the sealed
//! steganographic payload.

mod receiver;
mod sender;
mod session;
pub mod wire;

use std::io;
use std::net::SocketAddr;

use thiserror::Error;

pub use receiver::{
    receive_daemon, AutoAccept, AutoReject, Decision, DecisionSource, ReceiverConfig,
    ReceiverHandle,
};
pub use sender::{send_file, SenderConfig, TransferReport};
pub use session::{SessionState, TransferSession};
pub use wire::Offer;

pub const DEFAULT_CONTROL_PORT: u16 = 47555;
pub const PORT_ENV: &str = "STEGOSONIC_PORT";
pub const DIR_ENV: &str = "STEGOSONIC_DIR";

/// Control port from `STEGOSONIC_PORT`, falling back to the default.
pub fn control_port_from_env() -> u16 {
    std::env::var(PORT_ENV)
        .ok()
        .and_then(|p| p.parse().ok())
        .unwrap_or(DEFAULT_CONTROL_PORT)
}

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("connection refused by {0}")]
    ConnectionRefused(SocketAddr),

    #[error("receiver rejected the offer")]
    OfferRejected,

    #[error("receiver reported a checksum mismatch")]
    ChecksumMismatch,

    #[error("timed out waiting for {0}")]
    Timeout(&'static str),

    #[error("port {0} is already in use")]
    PortInUse(SocketAddr),

    #[error("receiver ran out of disk space")]
    DiskFull,

    #[error("receiver failed to store the file")]
    ReceiverFailed,

    #[error("invalid file name {0:?}")]
    InvalidFileName(String),

    #[error("illegal session transition {from} -> {to}")]
    IllegalTransition { from: SessionState, to: SessionState },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl TransferError {
    pub fn name(&self) -> &'static str {
        match self {
            TransferError::ConnectionRefused(_) => "ConnectionRefused",
            TransferError::OfferRejected => "OfferRejected",
            TransferError::ChecksumMismatch => "ChecksumMismatch",
            TransferError::Timeout(_) => "Timeout",
            TransferError::PortInUse(_) => "PortInUse",
            TransferError::DiskFull => "DiskFull",
            TransferError::ReceiverFailed => "ReceiverFailed",
            TransferError::InvalidFileName(_) => "InvalidFileName",
            TransferError::IllegalTransition { .. } => "IllegalTransition",
            TransferError::Protocol(_) => "Protocol",
            TransferError::Io(_) => "Io",
        }
    }
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut)
}
