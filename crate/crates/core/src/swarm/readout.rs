use serde::{Deserialize, Serialize};

use super::PostureCommand;
use crate::geom::Vec2;
use crate::world::{AgentBody, AgentId, AgentKind, Percept};

/// What the human senses of the fusion field through nearby robots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GradientReadout {
    /// Unit vector toward the strongest in-range robot; `None` if every
    /// in-range value is zero.
    pub direction: Option<Vec2>,
    pub magnitude: f64,
}

/// The human as a special swarm agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanAvatar {
    pub body: AgentBody,
    pub posture: PostureCommand,
    pub readout: GradientReadout,
}

/// Points the human at the in-range robot with the largest field value.
///
/// `robots` holds `(id, absolute position, f)`; robots beyond the human's
/// `comm_radius` are ignored. Ties go to the lowest id.
pub fn gradient_readout(human: &AgentBody, robots: &[(AgentId, Vec2, f64)]) -> GradientReadout {
    let mut in_range: Vec<_> = robots
        .iter()
        .filter(|(_, p, _)| p.distance(human.position) <= human.comm_radius)
        .collect();
    in_range.sort_by_key(|(id, _, _)| *id);
    let best = in_range.into_iter().fold(None, |best: Option<&(AgentId, Vec2, f64)>, r| match best {
        Some(b) if b.2 >= r.2 => Some(b),
        _ => Some(r),
    });
    match best {
        Some(&(_, pos, f)) if f > 0.0 => GradientReadout {
            direction: (pos - human.position).normalized(),
            magnitude: f,
        },
        _ => GradientReadout::default(),
    }
}

/// Same rule applied to an already-localized percept.
pub fn readout_from_percept(percept: &Percept) -> GradientReadout {
    let me = &percept.self_state;
    let robots: Vec<_> = percept
        .neighbor_summaries
        .iter()
        .filter(|n| n.kind == AgentKind::Robot)
        .map(|n| (n.id, me.position + n.offset, n.fusion))
        .collect();
    gradient_readout(me, &robots)
}
