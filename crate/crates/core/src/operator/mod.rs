//! Human-side decision making: scripted operators, supervision with trust
//! calibration and task allocation designs.

mod allocation;
mod layers;
mod policy;
mod trust;

use thiserror::Error;

pub use allocation::{build_allocation, AllocationDesign, Loa, TaskAssignment};
pub use layers::{AdaptiveLayer, AnticipatoryLayer, ModelBasedLayer, ReactiveLayer};
pub use policy::{
    scripted_decide, HumanController, OperatorDecision, OperatorPolicy, OperatorState, StubClaimPolicy, TeleopHandle,
    TeleopInput,
};
pub use trust::{
    supervisory_step, CalibrationTag, SupervisoryAction, SupervisoryDecision, TrustBucket, TrustModel, SWARM_AI,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("invalid operator policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid trust model: {0}")]
    InvalidTrust(String),
    #[error("situation bucket {0} is not in the trust model")]
    UnknownBucket(usize),
    #[error("task `{task}`: {reason}")]
    LoaViolation { task: String, reason: String },
}
