//! Agent-world coupling: world state, agent bodies, sensing, stepping and
//! episode execution.
//!
//! The world is a 2-D continuous arena advanced in discrete steps of one
//! time unit. Agents sense through [`perceive`], decide through a
//! [`DecisionMatrix`], and act on the world through [`step`].

mod dynamics;
mod episode;
mod perception;
mod trace;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;
use crate::swarm::PostureCommand;

pub use dynamics::{resolve_motion, step, StepCost, StepOutput, StepWarning};
pub use episode::{run_episode, DecisionMatrix, PolicyError, PolicyFailure, PolicySet, Scenario, Simulation};
pub use perception::{perceive, Detection, NeighborSummary, Percept};
pub use trace::{EpisodeTrace, Outcome, StateRecord, TraceError, TraceRecord};

/// Environment parameter: standard deviation (m) of detection position noise.
pub const SENSOR_NOISE_SIGMA: &str = "sensor_noise_sigma";
/// Environment parameter: how close (m) a claiming agent must be to an object.
pub const CLAIM_RADIUS: &str = "claim_radius";
pub const DEFAULT_CLAIM_RADIUS: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent-{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Human,
    Robot,
    AiController,
}

impl AgentKind {
    pub fn is_artificial(self) -> bool {
        !matches!(self, AgentKind::Human)
    }
}

/// Axis-aligned rectangular arena.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub min: Vec2,
    pub max: Vec2,
}

impl Arena {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            min: Vec2::ZERO,
            max: Vec2::new(width, height),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectOfInterest {
    pub position: Vec2,
    pub strength: f64,
    pub discovered: bool,
    /// Clutter that artificial sensors respond to and humans see through.
    /// Never counts toward goals and cannot be claimed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub decoy: bool,
}

impl ObjectOfInterest {
    pub fn target(position: Vec2, strength: f64) -> Self {
        Self {
            position,
            strength,
            discovered: false,
            decoy: false,
        }
    }

    pub fn decoy(position: Vec2, strength: f64) -> Self {
        Self {
            decoy: true,
            ..Self::target(position, strength)
        }
    }

    pub fn visible_to(&self, kind: AgentKind) -> bool {
        !self.decoy || kind.is_artificial()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub time: u64,
    pub arena: Arena,
    pub objects: Vec<ObjectOfInterest>,
    pub obstacles: Vec<Obstacle>,
    pub env_params: BTreeMap<String, f64>,
}

impl WorldState {
    pub fn new(arena: Arena) -> Self {
        Self {
            time: 0,
            arena,
            objects: Vec::new(),
            obstacles: Vec::new(),
            env_params: BTreeMap::new(),
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.env_params.get(name).copied()
    }

    pub fn claim_radius(&self) -> f64 {
        self.param(CLAIM_RADIUS).unwrap_or(DEFAULT_CLAIM_RADIUS)
    }

    pub fn discovered_count(&self) -> usize {
        self.objects.iter().filter(|o| o.discovered).count()
    }

    /// Objects that count toward goals.
    pub fn target_count(&self) -> usize {
        self.objects.iter().filter(|o| !o.decoy).count()
    }

    /// Checks positions, strengths and obstacle geometry.
    pub fn validate(&self) -> Result<(), WorldError> {
        if !(self.arena.min.x <= self.arena.max.x && self.arena.min.y <= self.arena.max.y) {
            return Err(WorldError::Invariant("arena bounds inverted".into()));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if !self.arena.contains(o.position) {
                return Err(WorldError::Invariant(format!("object {i} outside arena")));
            }
            if !(0.0..=1.0).contains(&o.strength) {
                return Err(WorldError::Invariant(format!(
                    "object {i} strength {} outside [0,1]",
                    o.strength
                )));
            }
        }
        for (i, ob) in self.obstacles.iter().enumerate() {
            if !(ob.radius >= 0.0) || !ob.center.is_finite() {
                return Err(WorldError::Invariant(format!("obstacle {i} malformed")));
            }
        }
        Ok(())
    }
}

/// Relayed posture command as carried hop-by-hop through the swarm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relay {
    /// Issue number; larger supersedes smaller.
    pub seq: u64,
    pub command: PostureCommand,
    /// Communication hops to the human, when known.
    pub hops: Option<u32>,
}

/// Public state an agent exposes to agents within its communication range.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Beacon {
    /// Last broadcast fusion value in [0,1].
    pub fusion: f64,
    /// Pointer toward the source of `fusion`, unit length.
    pub direction: Option<Vec2>,
    pub relay: Option<Relay>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentBody {
    pub id: AgentId,
    pub kind: AgentKind,
    pub position: Vec2,
    pub heading: f64,
    pub max_speed: f64,
    pub sense_radius: f64,
    pub comm_radius: f64,
    #[serde(default)]
    pub beacon: Beacon,
}

impl AgentBody {
    pub fn new(id: AgentId, kind: AgentKind, position: Vec2) -> Self {
        Self {
            id,
            kind,
            position,
            heading: 0.0,
            max_speed: 1.0,
            sense_radius: 0.0,
            comm_radius: 0.0,
            beacon: Beacon::default(),
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if !(self.max_speed > 0.0) {
            return Err(WorldError::Invariant(format!("{}: max_speed must be > 0", self.id)));
        }
        if !(self.sense_radius >= 0.0) || !(self.comm_radius >= 0.0) {
            return Err(WorldError::Invariant(format!("{}: negative radius", self.id)));
        }
        if !self.position.is_finite() {
            return Err(WorldError::Invariant(format!("{}: non-finite position", self.id)));
        }
        Ok(())
    }
}

/// Looks up a body in an id-sorted slice.
pub fn find_body(bodies: &[AgentBody], id: AgentId) -> Option<&AgentBody> {
    bodies
        .binary_search_by_key(&id, |b| b.id)
        .ok()
        .map(|i| &bodies[i])
}

/// Effector commands. An agent may issue at most one action of each kind
/// per step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// Desired displacement for this step; clamped to `max_speed`.
    Move { velocity: Vec2 },
    /// Publishes a fusion value in [0,1] (and its pointer) to neighbors.
    Broadcast {
        value: f64,
        direction: Option<Vec2>,
    },
    /// Publishes a posture command for neighbors to adopt.
    Relay(Relay),
    /// Claims any undiscovered object within the claim radius.
    MarkGoalClaim,
    NoOp,
}

impl Action {
    pub fn moving(velocity: Vec2) -> Self {
        Action::Move { velocity }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("unknown agent id {0}")]
    UnknownAgentId(AgentId),
    #[error("world invariant violated: {0}")]
    Invariant(String),
}
