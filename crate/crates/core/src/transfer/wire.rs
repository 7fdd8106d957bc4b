//! Transfer wire format. All integers are big-endian.
//!
//! Control channel records are framed as `len:u32 ‖ body`:
//!
//! ```text
//! OFFER   version:1 ‖ offer_id:8 ‖ name_len:2 ‖ name ‖ size:8 ‖ digest:32
//! ACCEPT  offer_id:8 ‖ data_port:2                         (10-byte body)
//! REJECT  offer_id:8                                       (8-byte body)
//! RESULT  offer_id:8 ‖ status:1                            (9-byte body)
//! ```
//!
//! The data channel carries `chunk_len:u32 ‖ bytes` repeated, ended by a
//! zero-length chunk.

use std::io::{self, Read, Write};

use super::TransferError;

pub const PROTO_VERSION: u8 = 1;
pub const DIGEST_LEN: usize = 32;
pub const OFFER_ID_LEN: usize = 8;
pub const CHUNK_SIZE: usize = 64 * 1024;

const MAX_RECORD: usize = 1 + OFFER_ID_LEN + 2 + u16::MAX as usize + 8 + DIGEST_LEN;
const MAX_CHUNK: usize = 16 * 1024 * 1024;

pub type OfferId = [u8; OFFER_ID_LEN];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Offer {
    pub offer_id: OfferId,
    pub file_name: String,
    pub file_size: u64,
    pub digest: [u8; DIGEST_LEN],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultStatus {
    Complete = 0,
    ChecksumMismatch = 1,
    Failed = 2,
}

/// Messages the receiver sends back on the control channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reply {
    Accept { offer_id: OfferId, data_port: u16 },
    Reject { offer_id: OfferId },
    Result { offer_id: OfferId, status: ResultStatus },
}

/// A file name is acceptable when it names a single path component.
pub fn valid_file_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && !name.contains(['/', '\\', '\0'])
        && name.len() <= u16::MAX as usize
}

impl Offer {
    pub fn encode(&self) -> Vec<u8> {
        let name = self.file_name.as_bytes();
        let mut body = Vec::with_capacity(1 + OFFER_ID_LEN + 2 + name.len() + 8 + DIGEST_LEN);
        body.push(PROTO_VERSION);
        body.extend_from_slice(&self.offer_id);
        body.extend_from_slice(&(name.len() as u16).to_be_bytes());
        body.extend_from_slice(name);
        body.extend_from_slice(&self.file_size.to_be_bytes());
        body.extend_from_slice(&self.digest);
        body
    }

    pub fn decode(body: &[u8]) -> Result<Self, TransferError> {
        let bad = |why: &str| TransferError::Protocol(format!("bad OFFER: {why}"));
        let (&version, rest) = body.split_first().ok_or_else(|| bad("empty"))?;
        if version != PROTO_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        if rest.len() < OFFER_ID_LEN + 2 {
            return Err(bad("truncated"));
        }
        let offer_id: OfferId = rest[..OFFER_ID_LEN].try_into().unwrap();
        let name_len = usize::from(u16::from_be_bytes([rest[8], rest[9]]));
        let rest = &rest[OFFER_ID_LEN + 2..];
        if rest.len() != name_len + 8 + DIGEST_LEN {
            return Err(bad("length mismatch"));
        }
        let file_name = String::from_utf8(rest[..name_len].to_vec())
            .map_err(|_| bad("file name is not UTF-8"))?;
        let file_size = u64::from_be_bytes(rest[name_len..name_len + 8].try_into().unwrap());
        let digest = rest[name_len + 8..].try_into().unwrap();
        Ok(Offer {
            offer_id,
            file_name,
            file_size,
            digest,
        })
    }
}

impl Reply {
    pub fn encode(&self) -> Vec<u8> {
        match *self {
            Reply::Accept { offer_id, data_port } => {
                let mut b = offer_id.to_vec();
                b.extend_from_slice(&data_port.to_be_bytes());
                b
            }
            Reply::Reject { offer_id } => offer_id.to_vec(),
            Reply::Result { offer_id, status } => {
                let mut b = offer_id.to_vec();
                b.push(status as u8);
                b
            }
        }
    }

    pub fn decode(body: &[u8]) -> Result<Self, TransferError> {
        let id = |b: &[u8]| -> OfferId { b[..OFFER_ID_LEN].try_into().unwrap() };
        match body.len() {
            10 => Ok(Reply::Accept {
                offer_id: id(body),
                data_port: u16::from_be_bytes([body[8], body[9]]),
            }),
            8 => Ok(Reply::Reject { offer_id: id(body) }),
            9 => {
                let status = match body[8] {
                    0 => ResultStatus::Complete,
                    1 => ResultStatus::ChecksumMismatch,
                    2 => ResultStatus::Failed,
                    s => return Err(TransferError::Protocol(format!("unknown status {s}"))),
                };
                Ok(Reply::Result {
                    offer_id: id(body),
                    status,
                })
            }
            n => Err(TransferError::Protocol(format!("unexpected {n}-byte reply"))),
        }
    }
}

pub fn write_record<W: Write>(w: &mut W, body: &[u8]) -> io::Result<()> {
    let mut frame = Vec::with_capacity(4 + body.len());
    frame.extend_from_slice(&(body.len() as u32).to_be_bytes());
    frame.extend_from_slice(body);
    w.write_all(&frame)?;
    w.flush()
}

pub fn read_record<R: Read>(r: &mut R) -> Result<Vec<u8>, TransferError> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_RECORD {
        return Err(TransferError::Protocol(format!("{len}-byte record is too large")));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    Ok(body)
}

pub fn write_chunk<W: Write>(w: &mut W, bytes: &[u8]) -> io::Result<()> {
    w.write_all(&(bytes.len() as u32).to_be_bytes())?;
    w.write_all(bytes)
}

pub fn write_end<W: Write>(w: &mut W) -> io::Result<()> {
    w.write_all(&0u32.to_be_bytes())?;
    w.flush()
}

/// Reads one chunk into `buf`; an empty result marks the end of the stream.
pub fn read_chunk<R: Read>(r: &mut R, buf: &mut Vec<u8>) -> Result<(), TransferError> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_CHUNK {
        return Err(TransferError::Protocol(format!("{len}-byte chunk is too large")));
    }
    buf.resize(len, 0);
    r.read_exact(buf)?;
    Ok(())
}
