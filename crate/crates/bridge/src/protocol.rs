//! Wire format. Every message is one JSON object with exactly the fields
//! `type`, `tick` and `payload`; see `schema/bridge-protocol.schema.json`.

use exswarm_core::competence::ResourceLedger;
use exswarm_core::geom::Vec2;
use exswarm_core::swarm::PostureCommand;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const PROTOCOL_VERSION: u32 = 1;

pub const SCHEMA: &str = include_str!("../schema/bridge-protocol.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageType {
    Snapshot,
    Command,
    Ack,
    Error,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    #[serde(rename = "type")]
    kind: MessageType,
    tick: u64,
    payload: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotView {
    pub id: u32,
    pub position: Vec2,
    pub heading: f64,
    pub f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec2>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeStatus {
    Running,
    GoalReached,
    BudgetExhausted,
    Aborted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalStatus {
    pub status: EpisodeStatus,
    pub metric_value: f64,
}

/// Full observable state for one tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub tick: u64,
    /// World step; restarts at 0 after a reset while `tick` keeps counting.
    pub time: u64,
    pub paused: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human: Option<Pose>,
    pub robots: Vec<RobotView>,
    /// Positions of discovered objects only; undiscovered ones stay hidden.
    pub discovered: Vec<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posture: Option<PostureCommand>,
    pub resources: ResourceLedger,
    pub goal: GoalStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorMessage {
    Posture { command: PostureCommand },
    MoveHuman { velocity: Vec2 },
    Pause,
    Resume,
    Reset { seed: u64 },
}

impl OperatorMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            OperatorMessage::Posture { .. } => "posture",
            OperatorMessage::MoveHuman { .. } => "move_human",
            OperatorMessage::Pause => "pause",
            OperatorMessage::Resume => "resume",
            OperatorMessage::Reset { .. } => "reset",
        }
    }
}

/// A decoded command with the client's tick, used for ack correlation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClientCommand {
    pub tick: u64,
    pub message: OperatorMessage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ack {
    pub kind: String,
    pub client_tick: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Malformed,
    UnexpectedType,
    InvalidCommand,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorReply {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("expected a {expected:?} message, got {found:?}")]
    UnexpectedType { expected: MessageType, found: MessageType },
    #[error("invalid command: {0}")]
    InvalidCommand(String),
}

impl ProtocolError {
    pub fn reply(&self) -> ErrorReply {
        let code = match self {
            ProtocolError::Malformed(_) => ErrorCode::Malformed,
            ProtocolError::UnexpectedType { .. } => ErrorCode::UnexpectedType,
            ProtocolError::InvalidCommand(_) => ErrorCode::InvalidCommand,
        };
        ErrorReply {
            code,
            message: self.to_string(),
        }
    }
}

fn encode<T: Serialize>(kind: MessageType, tick: u64, payload: &T) -> String {
    let env = Envelope {
        kind,
        tick,
        payload: serde_json::to_value(payload).expect("protocol payloads serialize"),
    };
    serde_json::to_string(&env).expect("envelope serializes")
}

fn decode<T: DeserializeOwned>(text: &str, expected: MessageType) -> Result<(u64, T), ProtocolError> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    if env.kind != expected {
        return Err(ProtocolError::UnexpectedType {
            expected,
            found: env.kind,
        });
    }
    let payload = serde_json::from_value(env.payload).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    Ok((env.tick, payload))
}

pub fn encode_snapshot(s: &Snapshot) -> String {
    encode(MessageType::Snapshot, s.tick, s)
}

pub fn decode_snapshot(text: &str) -> Result<Snapshot, ProtocolError> {
    let (tick, s): (u64, Snapshot) = decode(text, MessageType::Snapshot)?;
    if tick != s.tick {
        return Err(ProtocolError::Malformed(format!("envelope tick {tick} != snapshot tick {}", s.tick)));
    }
    Ok(s)
}

pub fn encode_command(c: &ClientCommand) -> String {
    encode(MessageType::Command, c.tick, &c.message)
}

pub fn decode_command(text: &str) -> Result<ClientCommand, ProtocolError> {
    let (tick, message) = decode(text, MessageType::Command)?;
    if let OperatorMessage::MoveHuman { velocity } = message {
        if !velocity.is_finite() {
            return Err(ProtocolError::InvalidCommand("velocity must be finite".into()));
        }
    }
    Ok(ClientCommand { tick, message })
}

pub fn encode_ack(tick: u64, ack: &Ack) -> String {
    encode(MessageType::Ack, tick, ack)
}

pub fn decode_ack(text: &str) -> Result<(u64, Ack), ProtocolError> {
    decode(text, MessageType::Ack)
}

pub fn encode_error(tick: u64, err: &ErrorReply) -> String {
    encode(MessageType::Error, tick, err)
}

pub fn decode_error(text: &str) -> Result<(u64, ErrorReply), ProtocolError> {
    decode(text, MessageType::Error)
}
