//! One-step world dynamics: kinematics with slide-along collision
//! resolution, beacon updates and goal claims.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Action, AgentBody, AgentId, Arena, Obstacle, WorldError, WorldState};
use crate::geom::Vec2;

const MAX_SLIDES: usize = 8;
const EPS: f64 = 1e-12;

/// Non-fatal problems found while applying actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepWarning {
    NonFiniteVelocity { agent: AgentId, time: u64 },
    InvalidBroadcast { agent: AgentId, time: u64 },
    DuplicateAction { agent: AgentId, time: u64 },
}

/// Resources consumed by one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepCost {
    pub distance: f64,
    pub messages: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub world: WorldState,
    pub bodies: Vec<AgentBody>,
    pub warnings: Vec<StepWarning>,
    pub cost: StepCost,
}

#[derive(Default)]
struct Intent {
    velocity: Option<Vec2>,
    broadcast: Option<(f64, Option<Vec2>)>,
    relay: Option<super::Relay>,
    claim: bool,
}

/// Advances the world by one step.
///
/// Agents missing from `actions` do nothing. Moves are applied first, then
/// beacons are updated (visible to others from the next step), then claims
/// are resolved at the new positions.
pub fn step(
    world: &WorldState,
    bodies: &[AgentBody],
    actions: &BTreeMap<AgentId, Vec<Action>>,
) -> Result<StepOutput, WorldError> {
    let mut warnings = Vec::new();
    let mut intents: Vec<Intent> = bodies.iter().map(|_| Intent::default()).collect();

    for (&id, list) in actions {
        let idx = bodies
            .binary_search_by_key(&id, |b| b.id)
            .map_err(|_| WorldError::UnknownAgentId(id))?;
        let intent = &mut intents[idx];
        for action in list {
            let duplicate = match *action {
                Action::Move { velocity } => {
                    if !velocity.is_finite() {
                        warnings.push(StepWarning::NonFiniteVelocity { agent: id, time: world.time });
                        false
                    } else {
                        intent.velocity.replace(velocity).is_some()
                    }
                }
                Action::Broadcast { value, direction } => {
                    let dir_ok = direction.is_none_or(Vec2::is_finite);
                    if !(0.0..=1.0).contains(&value) || !dir_ok {
                        warnings.push(StepWarning::InvalidBroadcast { agent: id, time: world.time });
                        false
                    } else {
                        intent.broadcast.replace((value, direction)).is_some()
                    }
                }
                Action::Relay(relay) => intent.relay.replace(relay).is_some(),
                Action::MarkGoalClaim => std::mem::replace(&mut intent.claim, true),
                Action::NoOp => false,
            };
            if duplicate {
                warnings.push(StepWarning::DuplicateAction { agent: id, time: world.time });
            }
        }
    }

    let mut next_world = world.clone();
    let mut next_bodies = bodies.to_vec();
    let mut cost = StepCost::default();

    for (body, intent) in next_bodies.iter_mut().zip(&intents) {
        if let Some(v) = intent.velocity {
            let v = v.clamp_length(body.max_speed);
            let target = resolve_motion(body.position, v, &world.arena, &world.obstacles);
            let moved = target - body.position;
            let dist = moved.length();
            if dist > 0.0 {
                body.heading = moved.angle();
            }
            cost.distance += dist;
            body.position = target;
        }
        if let Some((value, direction)) = intent.broadcast {
            body.beacon.fusion = value;
            body.beacon.direction = direction;
            cost.messages += 1;
        }
        if let Some(relay) = intent.relay {
            body.beacon.relay = Some(relay);
            cost.messages += 1;
        }
    }

    let claim_radius = world.claim_radius();
    for (body, intent) in next_bodies.iter().zip(&intents) {
        if !intent.claim {
            continue;
        }
        for obj in next_world.objects.iter_mut().filter(|o| !o.discovered && !o.decoy) {
            if obj.position.distance(body.position) <= claim_radius {
                obj.discovered = true;
            }
        }
    }

    next_world.time = world.time + 1;
    Ok(StepOutput {
        world: next_world,
        bodies: next_bodies,
        warnings,
        cost,
    })
}

/// Moves a point by `displacement`, sliding along arena walls and circular
/// obstacles instead of penetrating them.
///
/// The returned displacement never exceeds `|displacement|`: every contact
/// consumes part of the path and removes the into-surface component of the
/// remainder.
pub fn resolve_motion(start: Vec2, displacement: Vec2, arena: &Arena, obstacles: &[Obstacle]) -> Vec2 {
    let mut pos = arena.clamp(start);
    let mut remaining = displacement;
    for _ in 0..MAX_SLIDES {
        if remaining.length_squared() <= EPS * EPS {
            break;
        }
        match first_contact(pos, remaining, arena, obstacles) {
            None => {
                pos = arena.clamp(pos + remaining);
                break;
            }
            Some(Contact { t, normal, snap }) => {
                pos = snap(pos + remaining * t);
                let rest = remaining * (1.0 - t);
                let into = rest.dot(normal);
                remaining = if into < 0.0 { rest - normal * into } else { rest };
            }
        }
    }
    pos
}

struct Contact {
    t: f64,
    /// Outward surface normal at the contact point.
    normal: Vec2,
    snap: Box<dyn Fn(Vec2) -> Vec2>,
}

fn first_contact(pos: Vec2, d: Vec2, arena: &Arena, obstacles: &[Obstacle]) -> Option<Contact> {
    let mut best: Option<Contact> = None;
    let mut consider = |c: Contact| {
        if best.as_ref().is_none_or(|b| c.t < b.t) {
            best = Some(c);
        }
    };

    let walls = [
        (d.x < 0.0, arena.min.x - pos.x, d.x, Vec2::new(1.0, 0.0), true, arena.min.x),
        (d.x > 0.0, arena.max.x - pos.x, d.x, Vec2::new(-1.0, 0.0), true, arena.max.x),
        (d.y < 0.0, arena.min.y - pos.y, d.y, Vec2::new(0.0, 1.0), false, arena.min.y),
        (d.y > 0.0, arena.max.y - pos.y, d.y, Vec2::new(0.0, -1.0), false, arena.max.y),
    ];
    for (moving_toward, gap, speed, normal, is_x, wall) in walls {
        if !moving_toward {
            continue;
        }
        let t = gap / speed;
        if t < 1.0 {
            let t = t.max(0.0);
            consider(Contact {
                t,
                normal,
                snap: Box::new(move |p: Vec2| if is_x { Vec2::new(wall, p.y) } else { Vec2::new(p.x, wall) }),
            });
        }
    }

    for ob in obstacles {
        let f = pos - ob.center;
        let a = d.length_squared();
        let b = 2.0 * f.dot(d);
        let c = f.length_squared() - ob.radius * ob.radius;
        if b >= 0.0 {
            // Moving tangentially or away.
            continue;
        }
        let t = if c <= 0.0 {
            0.0
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                continue;
            }
            (-b - disc.sqrt()) / (2.0 * a)
        };
        if (0.0..1.0).contains(&t) {
            let hit = pos + d * t;
            let normal = (hit - ob.center).normalized().unwrap_or(Vec2::new(1.0, 0.0));
            let center = ob.center;
            let radius = ob.radius;
            consider(Contact {
                t,
                normal,
                snap: Box::new(move |p: Vec2| {
                    let n = (p - center).normalized().unwrap_or(normal);
                    center + n * radius
                }),
            });
        }
    }
    best
}
