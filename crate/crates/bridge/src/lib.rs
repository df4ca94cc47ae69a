//! Live bridge between the simulator and an operator UI over WebSocket.
//!
//! The message format lives in [`protocol`], the tick-driven episode in
//! [`session`] and the network side in [`server`].

pub mod protocol;
pub mod server;
pub mod session;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use protocol::{
    decode_command, decode_snapshot, encode_command, encode_snapshot, ClientCommand, MessageType, OperatorMessage,
    ProtocolError, Snapshot,
};
pub use server::{resolve_port, serve_blocking, start, ServeOptions, ServerHandle};
pub use session::{JournalEntry, Session, SessionSetup};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("session setup: {0}")]
    Setup(String),
    #[error("replay: {0}")]
    Replay(String),
    #[error("runtime: {0}")]
    Runtime(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// A finished live session: enough to replay it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub setup: SessionSetup,
    pub boundaries: u64,
    pub journal: Vec<JournalEntry>,
    pub final_snapshot: Snapshot,
}

impl SessionLog {
    pub fn of(session: &Session) -> Self {
        Self {
            setup: session.setup().clone(),
            boundaries: session.boundaries(),
            journal: session.journal().to_vec(),
            final_snapshot: session.snapshot(),
        }
    }

    /// Replays the journal and checks the final snapshot matches.
    pub fn verify(&self) -> Result<(), BridgeError> {
        let replayed = Session::replay(self.setup.clone(), &self.journal, self.boundaries)?;
        if replayed.snapshot() != self.final_snapshot {
            return Err(BridgeError::Replay("final snapshot differs after replay".into()));
        }
        Ok(())
    }
}
