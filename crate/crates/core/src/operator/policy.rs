//! Scripted human decision matrices.

use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trust::TrustModel;
use super::OperatorError;
use crate::geom::Vec2;
use crate::rng::StreamRng;
use crate::swarm::{readout_from_percept, GradientReadout, PostureCommand};
use crate::world::{Action, DecisionMatrix, Percept, PolicyError, Relay};

/// Operator behavior as configured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum OperatorPolicy {
    /// Reactive: isotropic unit-speed random walk.
    RandomWalk,
    /// Reactive: follow the fusion field once its readout reaches `threshold`,
    /// otherwise keep the swarm dispersed as a search posture.
    GradientFollower { threshold: f64 },
    /// Cognitive: decide per situation whether to deploy the swarm, then act
    /// as a gradient follower (deployed) or a random walker (withheld).
    SupervisorScript { trust: TrustModel, threshold: f64 },
    /// Live commands from the bridge.
    Teleop,
}

impl OperatorPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorPolicy::RandomWalk => "random_walk",
            OperatorPolicy::GradientFollower { .. } => "gradient_follower",
            OperatorPolicy::SupervisorScript { .. } => "supervisor_script",
            OperatorPolicy::Teleop => "teleop",
        }
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        match self {
            OperatorPolicy::GradientFollower { threshold } | OperatorPolicy::SupervisorScript { threshold, .. }
                if !(0.0..=1.0).contains(threshold) =>
            {
                Err(OperatorError::InvalidPolicy(format!("threshold {threshold} outside [0,1]")))
            }
            OperatorPolicy::SupervisorScript { trust, .. } => trust.validate(),
            _ => Ok(()),
        }
    }
}

/// Operator inputs injected by a live session, consumed once per step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TeleopInput {
    pub velocity: Option<Vec2>,
    pub posture: Option<PostureCommand>,
}

pub type TeleopHandle = Arc<Mutex<TeleopInput>>;

/// Per-episode reactive state of an operator.
#[derive(Clone, Debug)]
pub enum OperatorState {
    RandomWalk,
    GradientFollower { threshold: f64 },
    Teleop(TeleopHandle),
}

/// What the operator wants this step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OperatorDecision {
    pub velocity: Option<Vec2>,
    pub posture: Option<PostureCommand>,
}

/// Reactive operator rule for one step.
pub fn scripted_decide(
    state: &mut OperatorState,
    percept: &Percept,
    readout: &GradientReadout,
    rng: &mut StreamRng,
) -> OperatorDecision {
    match state {
        OperatorState::RandomWalk => {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            OperatorDecision {
                velocity: Some(Vec2::from_angle(angle)),
                posture: None,
            }
        }
        OperatorState::GradientFollower { threshold } => {
            let own = percept.nearest_detection().map(|d| d.offset);
            if readout.magnitude >= *threshold {
                OperatorDecision {
                    velocity: own.or(readout.direction),
                    posture: Some(PostureCommand::FollowGradient),
                }
            } else {
                OperatorDecision {
                    velocity: own,
                    posture: Some(PostureCommand::Disperse),
                }
            }
        }
        OperatorState::Teleop(handle) => {
            let mut input = handle.lock().expect("teleop input lock");
            let taken = *input;
            input.velocity = None;
            input.posture = None;
            OperatorDecision {
                velocity: taken.velocity,
                posture: taken.posture,
            }
        }
    }
}

/// Decision matrix of the human agent.
///
/// Posture changes are relayed once each (one message per command), and the
/// human's own detections are broadcast into the fusion field.
#[derive(Debug)]
pub struct HumanController {
    state: OperatorState,
    posture: Option<PostureCommand>,
    seq: u64,
    broadcast: (f64, Option<Vec2>),
    relays_sent: u64,
}

impl HumanController {
    pub fn new(state: OperatorState) -> Self {
        Self {
            state,
            posture: None,
            seq: 0,
            broadcast: (0.0, None),
            relays_sent: 0,
        }
    }

    pub fn posture(&self) -> Option<PostureCommand> {
        self.posture
    }

    /// Number of posture commands this operator has emitted.
    pub fn commands_sent(&self) -> u64 {
        self.relays_sent
    }
}

impl DecisionMatrix for HumanController {
    fn decide(&mut self, percept: &Percept, rng: &mut StreamRng) -> Result<Vec<Action>, PolicyError> {
        let readout = readout_from_percept(percept);
        let decision = scripted_decide(&mut self.state, percept, &readout, rng);
        let mut actions = Vec::with_capacity(4);
        if let Some(v) = decision.velocity {
            actions.push(Action::moving(v));
        }
        if let Some(cmd) = decision.posture {
            if self.posture != Some(cmd) {
                self.posture = Some(cmd);
                self.seq += 1;
                self.relays_sent += 1;
                actions.push(Action::Relay(Relay {
                    seq: self.seq,
                    command: cmd,
                    hops: Some(0),
                }));
            }
        }
        let own = percept
            .strongest_detection()
            .map_or((0.0, None), |d| (d.strength, d.offset.normalized()));
        if own != self.broadcast {
            self.broadcast = own;
            actions.push(Action::Broadcast {
                value: own.0,
                direction: own.1,
            });
        }
        if !percept.local_detections.is_empty() {
            actions.push(Action::MarkGoalClaim);
        }
        Ok(actions)
    }
}

/// Test stand-in: on its first decision claims with fixed probability,
/// afterwards idles. Never moves.
#[derive(Clone, Copy, Debug)]
pub struct StubClaimPolicy {
    pub probability: f64,
    flipped: bool,
}

impl StubClaimPolicy {
    pub fn new(probability: f64) -> Self {
        Self {
            probability,
            flipped: false,
        }
    }
}

impl DecisionMatrix for StubClaimPolicy {
    fn decide(&mut self, _percept: &Percept, rng: &mut StreamRng) -> Result<Vec<Action>, PolicyError> {
        if std::mem::replace(&mut self.flipped, true) {
            return Ok(vec![Action::NoOp]);
        }
        if rng.random_bool(self.probability.clamp(0.0, 1.0)) {
            Ok(vec![Action::MarkGoalClaim])
        } else {
            Ok(vec![Action::NoOp])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, StreamPurpose};
    use crate::world::{AgentBody, AgentId, AgentKind};

    fn empty_percept() -> Percept {
        Percept {
            self_state: AgentBody::new(AgentId(0), AgentKind::Human, Vec2::ZERO),
            neighbor_summaries: vec![],
            local_detections: vec![],
        }
    }

    #[test]
    fn follower_follows_strong_gradient() {
        let mut s = OperatorState::GradientFollower { threshold: 0.2 };
        let readout = GradientReadout {
            direction: Some(Vec2::new(1.0, 0.0)),
            magnitude: 0.5,
        };
        let mut rng = substream(0, AgentId(0), 0, StreamPurpose::Decide);
        let d = scripted_decide(&mut s, &empty_percept(), &readout, &mut rng);
        assert_eq!(d.posture, Some(PostureCommand::FollowGradient));
        assert_eq!(d.velocity, Some(Vec2::new(1.0, 0.0)));
    }

    #[test]
    fn follower_disperses_without_gradient() {
        let mut s = OperatorState::GradientFollower { threshold: 0.2 };
        let mut rng = substream(0, AgentId(0), 0, StreamPurpose::Decide);
        let d = scripted_decide(&mut s, &empty_percept(), &GradientReadout::default(), &mut rng);
        assert_eq!(d.posture, Some(PostureCommand::Disperse));
    }

    #[test]
    fn random_walk_is_isotropic() {
        // Mean of 1e4 i.i.d. unit vectors has expected norm ~0.009.
        let mut s = OperatorState::RandomWalk;
        let mut sum = Vec2::ZERO;
        for k in 0..10_000u64 {
            let mut rng = substream(11, AgentId(0), k, StreamPurpose::Decide);
            let d = scripted_decide(&mut s, &empty_percept(), &GradientReadout::default(), &mut rng);
            let v = d.velocity.unwrap();
            assert!((v.length() - 1.0).abs() < 1e-12);
            sum += v;
        }
        assert!((sum / 10_000.0).length() <= 0.05);
    }

    #[test]
    fn posture_relayed_once_per_change() {
        let mut h = HumanController::new(OperatorState::GradientFollower { threshold: 0.2 });
        let mut relays = 0;
        for k in 0..5u64 {
            let mut rng = substream(0, AgentId(0), k, StreamPurpose::Decide);
            let acts = h.decide(&empty_percept(), &mut rng).unwrap();
            relays += acts.iter().filter(|a| matches!(a, Action::Relay(_))).count();
        }
        assert_eq!(relays, 1);
        assert_eq!(h.commands_sent(), 1);
    }

    #[test]
    fn teleop_input_consumed_once() {
        let handle: TeleopHandle = Arc::default();
        handle.lock().unwrap().velocity = Some(Vec2::new(0.0, 1.0));
        let mut s = OperatorState::Teleop(handle.clone());
        let mut rng = substream(0, AgentId(0), 0, StreamPurpose::Decide);
        let first = scripted_decide(&mut s, &empty_percept(), &GradientReadout::default(), &mut rng);
        let second = scripted_decide(&mut s, &empty_percept(), &GradientReadout::default(), &mut rng);
        assert_eq!(first.velocity, Some(Vec2::new(0.0, 1.0)));
        assert_eq!(second.velocity, None);
    }

    #[test]
    fn threshold_validated() {
        assert!(OperatorPolicy::GradientFollower { threshold: 1.5 }.validate().is_err());
        assert!(OperatorPolicy::GradientFollower { threshold: 0.2 }.validate().is_ok());
    }
}
