use std::io::{ErrorKind, Read, Write};

use crate::error::{Result, TransportError};

pub const MAGIC: [u8; 4] = *b"FDNV";
pub const VERSION: u8 = 0x01;
/// Magic, version, type and payload length.
pub const HEADER_LEN: usize = 14;
pub const TRAILER_LEN: usize = 4;
/// Largest payload accepted or produced: 4 GiB.
pub const MAX_PAYLOAD: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    Hello = 0x01,
    Config = 0x02,
    GlobalWeights = 0x03,
    ClientUpdate = 0x04,
    EvalReport = 0x05,
    Shutdown = 0x06,
    Error = 0x7F,
}

impl MessageType {
    pub const ALL: [MessageType; 7] = [
        MessageType::Hello,
        MessageType::Config,
        MessageType::GlobalWeights,
        MessageType::ClientUpdate,
        MessageType::EvalReport,
        MessageType::Shutdown,
        MessageType::Error,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        MessageType::ALL.into_iter().find(|t| *t as u8 == b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub msg_type: MessageType,
    pub payload: Vec<u8>,
}

impl Message {
    pub fn new(msg_type: MessageType, payload: Vec<u8>) -> Self {
        Message { msg_type, payload }
    }
}

fn check_size(len: u64, limit: u64) -> Result<()> {
    if len > limit {
        return Err(TransportError::Size { len, limit });
    }
    Ok(())
}

/// Complete frame bytes for one message.
pub fn frame_message(msg_type: MessageType, payload: &[u8]) -> Result<Vec<u8>> {
    check_size(payload.len() as u64, MAX_PAYLOAD)?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + TRAILER_LEN);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(msg_type as u8);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out.extend_from_slice(&crc32fast::hash(payload).to_le_bytes());
    Ok(out)
}

/// Writes one frame without copying the payload.
pub fn write_message<W: Write>(w: &mut W, msg_type: MessageType, payload: &[u8]) -> Result<()> {
    check_size(payload.len() as u64, MAX_PAYLOAD)?;
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4] = VERSION;
    header[5] = msg_type as u8;
    header[6..].copy_from_slice(&(payload.len() as u64).to_le_bytes());
    w.write_all(&header)?;
    w.write_all(payload)?;
    w.write_all(&crc32fast::hash(payload).to_le_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_message<R: Read>(r: &mut R) -> Result<Message> {
    read_message_limited(r, MAX_PAYLOAD)
}

/// Reads exactly one frame. The header is validated before any payload
/// byte is consumed, and nothing past the trailing checksum is read.
pub fn read_message_limited<R: Read>(r: &mut R, limit: u64) -> Result<Message> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Err(TransportError::Protocol(format!("bad magic {:02x?}", &header[..4])));
    }
    if header[4] != VERSION {
        return Err(TransportError::Protocol(format!("unsupported version {:#04x}", header[4])));
    }
    let msg_type = MessageType::from_byte(header[5])
        .ok_or_else(|| TransportError::Protocol(format!("unknown message type {:#04x}", header[5])))?;
    let len = u64::from_le_bytes(header[6..].try_into().unwrap());
    check_size(len, limit.min(MAX_PAYLOAD))?;

    // grow as bytes arrive rather than trusting the declared length up front
    let mut payload = Vec::with_capacity(len.min(1 << 20) as usize);
    r.by_ref().take(len).read_to_end(&mut payload)?;
    if (payload.len() as u64) < len {
        return Err(std::io::Error::new(
            ErrorKind::UnexpectedEof,
            format!("stream ended after {} of {len} payload bytes", payload.len()),
        )
        .into());
    }
    let mut crc = [0u8; TRAILER_LEN];
    r.read_exact(&mut crc)?;
    let expected = u32::from_le_bytes(crc);
    let found = crc32fast::hash(&payload);
    if expected != found {
        return Err(TransportError::Integrity { expected, found });
    }
    Ok(Message { msg_type, payload })
}
