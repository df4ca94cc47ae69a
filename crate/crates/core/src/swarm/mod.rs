//! Extended swarming: strictly local robot rules that form body postures
//! around the human and a decentralized fusion field pointing at sensed
//! objects of interest.

mod config;
mod fusion;
mod graph;
mod posture;
mod readout;
mod robot;

use thiserror::Error;

pub use config::{default_gains, PostureGains, SwarmConfig};
pub use fusion::{local_fusion, update_fusion_field, FusionCell, FusionField};
pub use graph::{communication_graph, CommGraph};
pub use posture::{PostureCommand, PostureKind};
pub use readout::{gradient_readout, readout_from_percept, GradientReadout, HumanAvatar};
pub use robot::{posture_step, robot_velocity, RobotState, SwarmRobotPolicy, LIMB_LINK_FRACTION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwarmError {
    #[error("swarm config: {0}")]
    Config(String),
    #[error("unknown posture `{0}`")]
    UnknownPosture(String),
    #[error("invalid posture command: {0}")]
    InvalidCommand(String),
}
