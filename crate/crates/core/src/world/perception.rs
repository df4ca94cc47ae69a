use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{find_body, AgentBody, AgentId, AgentKind, Relay, WorldError, WorldState, SENSOR_NOISE_SIGMA};
use crate::geom::Vec2;
use crate::rng::StreamRng;

/// What another agent within communication range reveals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborSummary {
    pub id: AgentId,
    pub kind: AgentKind,
    /// Neighbor position relative to the perceiving agent.
    pub offset: Vec2,
    pub fusion: f64,
    pub relay: Option<Relay>,
}

/// An object of interest inside sensing range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Noisy object position relative to the perceiving agent.
    pub offset: Vec2,
    pub strength: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Percept {
    pub self_state: AgentBody,
    /// Sorted by id.
    pub neighbor_summaries: Vec<NeighborSummary>,
    /// In world object order.
    pub local_detections: Vec<Detection>,
}

impl Percept {
    pub fn strongest_detection(&self) -> Option<&Detection> {
        self.local_detections
            .iter()
            .fold(None, |best: Option<&Detection>, d| match best {
                Some(b) if b.strength >= d.strength => Some(b),
                _ => Some(d),
            })
    }

    pub fn nearest_detection(&self) -> Option<&Detection> {
        self.local_detections
            .iter()
            .fold(None, |best: Option<&Detection>, d| match best {
                Some(b) if b.offset.length() <= d.offset.length() => Some(b),
                _ => Some(d),
            })
    }

    pub fn human_neighbor(&self) -> Option<&NeighborSummary> {
        self.neighbor_summaries.iter().find(|n| n.kind == AgentKind::Human)
    }
}

/// Builds the local view of one agent.
///
/// Neighbors are agents within `comm_radius`; detections are undiscovered
/// objects within `sense_radius`. Gaussian noise with the world's
/// `sensor_noise_sigma` is added to each detection offset, one pair of draws
/// per in-range object, so content outside the radii never touches `rng`.
pub fn perceive(
    world: &WorldState,
    bodies: &[AgentBody],
    agent: AgentId,
    rng: &mut StreamRng,
) -> Result<Percept, WorldError> {
    let me = find_body(bodies, agent).ok_or(WorldError::UnknownAgentId(agent))?;

    let neighbor_summaries = bodies
        .iter()
        .filter(|b| b.id != agent && b.position.distance(me.position) <= me.comm_radius)
        .map(|b| NeighborSummary {
            id: b.id,
            kind: b.kind,
            offset: b.position - me.position,
            fusion: b.beacon.fusion,
            relay: b.beacon.relay,
        })
        .collect();

    let sigma = world.param(SENSOR_NOISE_SIGMA).unwrap_or(0.0);
    let noise = if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).map_err(|e| WorldError::Invariant(format!("sensor noise: {e}")))?)
    } else {
        None
    };

    let local_detections = world
        .objects
        .iter()
        .filter(|o| !o.discovered && o.visible_to(me.kind) && o.position.distance(me.position) <= me.sense_radius)
        .map(|o| {
            let mut offset = o.position - me.position;
            if let Some(n) = &noise {
                offset += Vec2::new(n.sample(rng), n.sample(rng));
            }
            Detection {
                offset,
                strength: o.strength,
            }
        })
        .collect();

    Ok(Percept {
        self_state: me.clone(),
        neighbor_summaries,
        local_detections,
    })
}
