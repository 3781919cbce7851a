use thiserror::Error;

use crate::frame::MessageType;

pub type Result<T, E = TransportError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("malformed payload at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    #[error("cannot encode: {0}")]
    Encode(String),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("checksum mismatch: frame says {expected:#010x}, payload hashes to {found:#010x}")]
    Integrity { expected: u32, found: u32 },

    #[error("payload of {len} bytes exceeds the {limit}-byte limit")]
    Size { len: u64, limit: u64 },

    #[error("unexpected {found:?} while {phase}")]
    OutOfOrder { phase: String, found: MessageType },

    #[error("peer reported an error: {0}")]
    Remote(String),

    #[error("incompatible weights: {0}")]
    Weights(#[from] fednod_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TransportError {
    pub(crate) fn decode(offset: usize, reason: impl Into<String>) -> Self {
        TransportError::Decode {
            offset,
            reason: reason.into(),
        }
    }
}
