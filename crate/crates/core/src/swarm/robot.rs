//! Per-robot local controller: command relay, fusion update and posture
//! velocity, all computed from the robot's own percept.

use std::collections::BTreeMap;

use super::fusion::{local_fusion, FusionCell};
use super::{PostureCommand, SwarmConfig};
use crate::geom::Vec2;
use crate::rng::StreamRng;
use crate::world::{Action, AgentId, AgentKind, DecisionMatrix, NeighborSummary, Percept, PolicyError, Relay};

/// Fraction of the communication radius used as limb link length.
pub const LIMB_LINK_FRACTION: f64 = 0.9;

/// What a robot carries between steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotState {
    pub command: PostureCommand,
    pub seq: u64,
    /// Hops to the human, when some neighbor knows a route.
    pub hops: Option<u32>,
    pub cell: FusionCell,
}

impl RobotState {
    pub fn new(command: PostureCommand) -> Self {
        Self {
            command,
            seq: 0,
            hops: None,
            cell: FusionCell::default(),
        }
    }

    pub fn relay(&self) -> Relay {
        Relay {
            seq: self.seq,
            command: self.command,
            hops: self.hops,
        }
    }

    /// Adopts the newest command relayed by any neighbor and recomputes
    /// the hop count to the human. Commands advance one hop per step.
    pub fn absorb_relays(&mut self, percept: &Percept) {
        let newest = percept
            .neighbor_summaries
            .iter()
            .filter_map(|n| n.relay)
            .fold(None, |best: Option<Relay>, r| match best {
                Some(b) if b.seq >= r.seq => Some(b),
                _ => Some(r),
            });
        if let Some(r) = newest {
            if r.seq > self.seq {
                self.seq = r.seq;
                self.command = r.command;
            }
        }
        self.hops = if percept.human_neighbor().is_some() {
            Some(1)
        } else {
            percept
                .neighbor_summaries
                .iter()
                .filter(|n| n.kind == AgentKind::Robot)
                .filter_map(|n| n.relay.and_then(|r| r.hops))
                .min()
                .map(|h| h.saturating_add(1))
        };
    }
}

/// Neighbor closest to the human along the relay chain: the human itself
/// when in range, else the robot with the fewest hops (lowest id on ties).
fn toward_human(percept: &Percept) -> Option<&NeighborSummary> {
    if let Some(h) = percept.human_neighbor() {
        return Some(h);
    }
    percept
        .neighbor_summaries
        .iter()
        .filter(|n| n.kind == AgentKind::Robot)
        .filter_map(|n| n.relay.and_then(|r| r.hops).map(|h| (h, n)))
        .fold(None, |best: Option<(u32, &NeighborSummary)>, (h, n)| match best {
            Some((bh, _)) if bh <= h => best,
            _ => Some((h, n)),
        })
        .map(|(_, n)| n)
}

fn separation(percept: &Percept, distance: f64) -> Vec2 {
    let mut push = Vec2::ZERO;
    for n in &percept.neighbor_summaries {
        let d = n.offset.length();
        if d < distance {
            let away = match (-n.offset).normalized() {
                Some(u) => u,
                // Coincident robots split deterministically by id order.
                None => {
                    let sign = if n.id > percept.self_state.id { -1.0 } else { 1.0 };
                    Vec2::new(sign, 0.0)
                }
            };
            push += away * ((distance - d) / distance);
        }
    }
    push
}

fn centroid(percept: &Percept) -> Option<Vec2> {
    let n = percept.neighbor_summaries.len();
    (n > 0).then(|| {
        percept
            .neighbor_summaries
            .iter()
            .fold(Vec2::ZERO, |acc, nb| acc + nb.offset)
            / n as f64
    })
}

/// Velocity for one robot under its current command.
pub fn robot_velocity(percept: &Percept, state: &RobotState, config: &SwarmConfig) -> Vec2 {
    let kind = state.command.kind();
    let gains = config.gains(kind);
    let sep = separation(percept, config.separation_distance) * gains.separation;
    match state.command {
        PostureCommand::Hold => Vec2::ZERO,
        PostureCommand::Contract => {
            let pull = toward_human(percept)
                .map(|n| n.offset.clamp_length(1.0))
                .or_else(|| centroid(percept).map(|c| c.clamp_length(1.0)))
                .unwrap_or(Vec2::ZERO);
            pull * gains.cohesion + sep
        }
        PostureCommand::Disperse => {
            let push = centroid(percept)
                .and_then(|c| {
                    let reach = 0.5 * config.comm_radius;
                    let strength = (1.0 - c.length() / reach).max(0.0);
                    (-c).normalized().map(|u| u * strength)
                })
                .unwrap_or(Vec2::ZERO);
            push * gains.cohesion + sep
        }
        PostureCommand::ExtendLimb { bearing, length } => {
            let link = LIMB_LINK_FRACTION * config.comm_radius;
            let rank = state.hops.unwrap_or(u32::MAX);
            let pred = toward_human(percept);
            match pred {
                Some(p) if f64::from(rank.saturating_sub(1)) * link < length => {
                    let slot = p.offset + Vec2::from_angle(bearing) * link;
                    slot.clamp_length(1.0) * gains.target + sep
                }
                Some(p) => p.offset.clamp_length(1.0) * gains.cohesion + sep,
                None => sep,
            }
        }
        PostureCommand::FollowGradient => {
            let along = state.cell.direction.unwrap_or(Vec2::ZERO);
            along * gains.target + sep
        }
    }
}

/// Synchronous posture round: every robot's velocity from its own view.
pub fn posture_step(
    percepts: &BTreeMap<AgentId, Percept>,
    states: &BTreeMap<AgentId, RobotState>,
    config: &SwarmConfig,
) -> BTreeMap<AgentId, Vec2> {
    percepts
        .iter()
        .filter_map(|(id, p)| states.get(id).map(|s| (*id, robot_velocity(p, s, config))))
        .collect()
}

/// Decision matrix of one swarm robot.
#[derive(Clone, Debug)]
pub struct SwarmRobotPolicy {
    config: SwarmConfig,
    state: RobotState,
    last_relay: Option<Relay>,
}

impl SwarmRobotPolicy {
    pub fn new(config: SwarmConfig, initial: PostureCommand) -> Self {
        Self {
            config,
            state: RobotState::new(initial),
            last_relay: None,
        }
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }
}

impl DecisionMatrix for SwarmRobotPolicy {
    fn decide(&mut self, percept: &Percept, _rng: &mut StreamRng) -> Result<Vec<Action>, PolicyError> {
        self.state.absorb_relays(percept);
        let previous = self.state.cell;
        self.state.cell = local_fusion(previous.value, percept, self.config.decay);
        let velocity = robot_velocity(percept, &self.state, &self.config);

        let mut actions = vec![Action::moving(velocity)];
        if self.state.cell != previous {
            actions.push(Action::Broadcast {
                value: self.state.cell.value,
                direction: self.state.cell.direction,
            });
        }
        let relay = self.state.relay();
        if self.last_relay != Some(relay) {
            actions.push(Action::Relay(relay));
            self.last_relay = Some(relay);
        }
        if self.config.robots_claim && !percept.local_detections.is_empty() {
            actions.push(Action::MarkGoalClaim);
        }
        Ok(actions)
    }
}
