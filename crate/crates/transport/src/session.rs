use std::fmt;
use std::io::{Read, Write};

use crate::error::{Result, TransportError};
use crate::frame::{read_message, write_message, Message, MessageType};

/// Where a connection is in `HELLO -> CONFIG -> (GLOBAL_WEIGHTS ->
/// CLIENT_UPDATE [-> EVAL_REPORT])* -> SHUTDOWN`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Connected,
    Greeted,
    Ready,
    Training,
    Closed,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Connected => "awaiting HELLO",
            Phase::Greeted => "awaiting CONFIG",
            Phase::Ready => "between rounds",
            Phase::Training => "awaiting CLIENT_UPDATE",
            Phase::Closed => "closed",
        })
    }
}

/// Tracks both directions of one connection; both peers run the same
/// machine, so either side detects an out-of-order message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    phase: Phase,
}

impl Default for Session {
    fn default() -> Self {
        Session { phase: Phase::Connected }
    }
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn advance(&mut self, t: MessageType) -> Result<()> {
        use MessageType as M;
        use Phase as P;
        let next = match (self.phase, t) {
            (P::Closed, _) => None,
            (_, M::Error) => Some(P::Closed),
            (P::Connected, M::Hello) => Some(P::Greeted),
            (P::Greeted, M::Config) => Some(P::Ready),
            (P::Greeted | P::Ready, M::Shutdown) => Some(P::Closed),
            (P::Ready, M::GlobalWeights) => Some(P::Training),
            (P::Ready, M::EvalReport) => Some(P::Ready),
            (P::Training, M::ClientUpdate) => Some(P::Ready),
            _ => None,
        };
        match next {
            Some(p) => {
                self.phase = p;
                Ok(())
            }
            None => Err(TransportError::OutOfOrder {
                phase: self.phase.to_string(),
                found: t,
            }),
        }
    }
}

/// A framed, session-checked connection.
pub struct Channel<R, W> {
    reader: R,
    writer: W,
    session: Session,
}

impl<R: Read, W: Write> Channel<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Channel {
            reader,
            writer,
            session: Session::new(),
        }
    }

    pub fn phase(&self) -> Phase {
        self.session.phase()
    }

    pub fn send(&mut self, t: MessageType, payload: &[u8]) -> Result<()> {
        self.session.advance(t)?;
        write_message(&mut self.writer, t, payload)
    }

    /// Reports `reason` to the peer and closes the session. Write errors
    /// are ignored since the connection is being torn down anyway.
    pub fn abort(&mut self, reason: &str) {
        if self.session.phase() != Phase::Closed {
            let _ = self.send(MessageType::Error, reason.as_bytes());
        }
    }

    /// Receives the next message. An out-of-order message is answered with
    /// ERROR; an ERROR from the peer surfaces as [`TransportError::Remote`].
    pub fn recv(&mut self) -> Result<Message> {
        let msg = read_message(&mut self.reader)?;
        if let Err(e) = self.session.advance(msg.msg_type) {
            self.abort(&e.to_string());
            return Err(e);
        }
        if msg.msg_type == MessageType::Error {
            return Err(TransportError::Remote(String::from_utf8_lossy(&msg.payload).into_owned()));
        }
        Ok(msg)
    }

    /// Receives a message that must be of type `t`.
    pub fn expect(&mut self, t: MessageType) -> Result<Vec<u8>> {
        let msg = self.recv()?;
        if msg.msg_type != t {
            let e = TransportError::Protocol(format!("expected {t:?}, got {:?}", msg.msg_type));
            self.abort(&e.to_string());
            return Err(e);
        }
        Ok(msg.payload)
    }

    pub fn into_parts(self) -> (R, W) {
        (self.reader, self.writer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use MessageType as M;

    #[test]
    fn full_session() {
        let mut s = Session::new();
        for t in [M::Hello, M::Config, M::GlobalWeights, M::ClientUpdate, M::EvalReport] {
            s.advance(t).unwrap();
        }
        s.advance(M::GlobalWeights).unwrap();
        s.advance(M::ClientUpdate).unwrap();
        s.advance(M::Shutdown).unwrap();
        assert_eq!(s.phase(), Phase::Closed);
        assert!(s.advance(M::Hello).is_err());
    }

    #[test]
    fn out_of_order() {
        let mut s = Session::new();
        assert!(s.advance(M::Config).is_err());
        s.advance(M::Hello).unwrap();
        assert!(s.advance(M::GlobalWeights).is_err());
        s.advance(M::Config).unwrap();
        assert!(s.advance(M::ClientUpdate).is_err());
        s.advance(M::GlobalWeights).unwrap();
        assert!(s.advance(M::Shutdown).is_err());
        s.advance(M::Error).unwrap();
        assert_eq!(s.phase(), Phase::Closed);
    }
}
