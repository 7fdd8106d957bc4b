use std::fs::File;
use std::io::{self, BufReader, Read};
use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::path::Path;
use std::time::Duration;

use rand::RngCore;
use sha2::{Digest, Sha256};

use super::session::{SessionState, TransferSession};
use super::wire::{self, Offer, Reply, ResultStatus, CHUNK_SIZE};
use super::{is_timeout, TransferError};

#[derive(Debug, Clone, Copy)]
pub struct SenderConfig {
    /// How long the receiver may deliberate over the offer.
    pub decision_timeout: Duration,
    /// Read/write timeout once streaming has begun.
    pub io_timeout: Duration,
}

impl Default for SenderConfig {
    fn default() -> Self {
        SenderConfig {
            decision_timeout: Duration::from_secs(60),
            io_timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransferReport {
    pub session: TransferSession,
    pub peer: SocketAddr,
}

fn digest_file(path: &Path) -> io::Result<(u64, [u8; 32])> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; CHUNK_SIZE];
    let mut size = 0u64;
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        size += n as u64;
    }
    Ok((size, hasher.finalize().into()))
}

fn connect(addr: SocketAddr, timeout: Duration) -> Result<TcpStream, TransferError> {
    TcpStream::connect_timeout(&addr, timeout).map_err(|e| match e.kind() {
        io::ErrorKind::ConnectionRefused => TransferError::ConnectionRefused(addr),
        _ if is_timeout(&e) => TransferError::Timeout("connection"),
        _ => TransferError::Io(e),
    })
}

fn read_reply(control: &mut TcpStream, what: &'static str) -> Result<Reply, TransferError> {
    let body = wire::read_record(control).map_err(|e| match e {
        TransferError::Io(io) if is_timeout(&io) => TransferError::Timeout(what),
        other => other,
    })?;
    Reply::decode(&body)
}

/// Offers `path` to the receiver at `address` and streams it once accepted.
pub fn send_file<A: ToSocketAddrs>(
    address: A,
    path: &Path,
    config: &SenderConfig,
) -> Result<TransferReport, TransferError> {
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .filter(|n| wire::valid_file_name(n))
        .ok_or_else(|| TransferError::InvalidFileName(path.display().to_string()))?
        .to_owned();
    let (file_size, digest) = digest_file(path)?;
    let mut offer_id = [0u8; wire::OFFER_ID_LEN];
    rand::rng().fill_bytes(&mut offer_id);
    let offer = Offer {
        offer_id,
        file_name,
        file_size,
        digest,
    };
    let mut session = TransferSession::new(offer.clone());

    let peer = address
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| TransferError::Protocol("address resolved to nothing".into()))?;
    let mut control = connect(peer, config.io_timeout)?;
    control.set_write_timeout(Some(config.io_timeout))?;
    wire::write_record(&mut control, &offer.encode())?;

    control.set_read_timeout(Some(config.decision_timeout))?;
    let data_port = match read_reply(&mut control, "the receiver's decision")? {
        Reply::Reject { offer_id: id } if id == offer_id => {
            session.advance(SessionState::Rejected)?;
            return Err(TransferError::OfferRejected);
        }
        Reply::Accept { offer_id: id, data_port } if id == offer_id => data_port,
        other => return Err(TransferError::Protocol(format!("expected ACCEPT/REJECT, got {other:?}"))),
    };
    session.advance(SessionState::Accepted)?;
    session.data_port = Some(data_port);

    let mut data = connect(SocketAddr::new(peer.ip(), data_port), config.io_timeout)?;
    data.set_write_timeout(Some(config.io_timeout))?;
    session.advance(SessionState::Streaming)?;

    let mut reader = BufReader::new(File::open(path)?);
    let mut buf = vec![0u8; CHUNK_SIZE];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        wire::write_chunk(&mut data, &buf[..n])?;
        session.bytes_moved += n as u64;
    }
    wire::write_end(&mut data)?;

    control.set_read_timeout(Some(config.io_timeout))?;
    let outcome = read_reply(&mut control, "the receiver's confirmation");
    match outcome {
        Ok(Reply::Result { offer_id: id, status }) if id == offer_id => match status {
            ResultStatus::Complete => {
                session.advance(SessionState::Complete)?;
                Ok(TransferReport { session, peer })
            }
            ResultStatus::ChecksumMismatch => Err(TransferError::ChecksumMismatch),
            ResultStatus::Failed => Err(TransferError::ReceiverFailed),
        },
        Ok(other) => Err(TransferError::Protocol(format!("expected RESULT, got {other:?}"))),
        Err(e) => Err(e),
    }
}
