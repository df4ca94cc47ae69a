//! Layers of the operator policy stack.
//!
//! Reactive and model-based layers have implementations. Adaptive and
//! anticipatory layers are interfaces only; nothing in the crate implements
//! them.

use super::policy::{scripted_decide, OperatorDecision, OperatorState};
use super::trust::{supervisory_step, SupervisoryAction, TrustModel};
use super::OperatorError;
use crate::competence::{EpisodeSummary, Situation};
use crate::rng::StreamRng;
use crate::swarm::GradientReadout;
use crate::world::Percept;

/// Fast per-step loop on the current percept.
pub trait ReactiveLayer {
    fn react(&mut self, percept: &Percept, readout: &GradientReadout, rng: &mut StreamRng) -> OperatorDecision;
}

impl ReactiveLayer for OperatorState {
    fn react(&mut self, percept: &Percept, readout: &GradientReadout, rng: &mut StreamRng) -> OperatorDecision {
        scripted_decide(self, percept, readout, rng)
    }
}

/// Per-situation decision from an internal model of the AI.
pub trait ModelBasedLayer {
    fn supervise(&self, situation: &Situation, true_competence: f64) -> Result<SupervisoryAction, OperatorError>;
}

impl ModelBasedLayer for TrustModel {
    fn supervise(&self, situation: &Situation, true_competence: f64) -> Result<SupervisoryAction, OperatorError> {
        let value = situation
            .number(&self.axis)
            .ok_or_else(|| OperatorError::InvalidTrust(format!("situation has no numeric `{}`", self.axis)))?;
        let bucket = self
            .bucket_of(value)
            .ok_or_else(|| OperatorError::InvalidTrust(format!("{value} outside every bucket")))?;
        supervisory_step(self, bucket, true_competence)
    }
}

/// Updates its model from observed episodes.
pub trait AdaptiveLayer {
    fn observe(&mut self, situation: &Situation, outcome: &EpisodeSummary);
}

/// Predicts future situations to act ahead of them.
pub trait AnticipatoryLayer {
    fn anticipate(&self, history: &[Situation]) -> Option<Situation>;
}
