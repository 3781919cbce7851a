//! Wire protocol between the federated server and its clients.
//!
//! Every message is framed as
//!
//! ```text
//! "FDNV" | version u8 | type u8 | payload_len u64 LE | payload | crc32(payload) u32 LE
//! ```
//!
//! Model parameters travel as a weights payload: a tensor count followed by
//! named, shaped tensors of little-endian `f32`.

mod error;
mod frame;
mod session;
mod weights;

pub use error::{Result, TransportError};
pub use frame::{
    frame_message, read_message, read_message_limited, write_message, Message, MessageType, HEADER_LEN, MAGIC,
    MAX_PAYLOAD, TRAILER_LEN, VERSION,
};
pub use session::{Channel, Phase, Session};
pub use weights::{
    decode_tensors, decode_update, decode_weights, encode_tensors, encode_update, encode_weights, UpdatePayload,
    MAX_RANK,
};
