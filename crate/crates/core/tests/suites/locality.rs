//! Metamorphic locality checks: a robot's percept and decision must not
//! change when everything outside its radii is removed or rearranged.
#![allow(dead_code)]

use exswarm_core::geom::Vec2;
use exswarm_core::rng::{substream, StreamPurpose};
use exswarm_core::swarm::{PostureCommand, SwarmConfig, SwarmRobotPolicy};
use exswarm_core::world::{
    perceive, AgentBody, AgentId, AgentKind, Arena, Beacon, DecisionMatrix, ObjectOfInterest, Relay, WorldState,
    SENSOR_NOISE_SIGMA,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIDE: f64 = 30.0;

fn random_point(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::new(rng.random_range(0.0..SIDE), rng.random_range(0.0..SIDE))
}

fn random_beacon(rng: &mut ChaCha8Rng) -> Beacon {
    let commands = [
        PostureCommand::Contract,
        PostureCommand::Disperse,
        PostureCommand::FollowGradient,
        PostureCommand::Hold,
        PostureCommand::ExtendLimb {
            bearing: 1.0,
            length: 4.0,
        },
    ];
    Beacon {
        fusion: rng.random_range(0.0..=1.0),
        direction: rng.random_bool(0.7).then(|| Vec2::from_angle(rng.random_range(0.0..6.3))),
        relay: rng.random_bool(0.6).then(|| Relay {
            seq: rng.random_range(0..5),
            command: commands[rng.random_range(0..commands.len())],
            hops: rng.random_bool(0.8).then(|| rng.random_range(0..6)),
        }),
    }
}

fn random_scene(rng: &mut ChaCha8Rng) -> (WorldState, Vec<AgentBody>) {
    let mut world = WorldState::new(Arena::new(SIDE, SIDE));
    if rng.random_bool(0.5) {
        world.env_params.insert(SENSOR_NOISE_SIGMA.into(), rng.random_range(0.01..0.5));
    }
    for _ in 0..rng.random_range(0..6) {
        let mut o = ObjectOfInterest::target(random_point(rng), rng.random_range(0.1..=1.0));
        o.decoy = rng.random_bool(0.2);
        world.objects.push(o);
    }
    let n = rng.random_range(1..30u32);
    let human = rng.random_bool(0.5);
    let bodies = (0..n)
        .map(|i| {
            let kind = if human && i == 0 { AgentKind::Human } else { AgentKind::Robot };
            let mut b = AgentBody::new(AgentId(i), kind, random_point(rng));
            b.comm_radius = rng.random_range(1.0..10.0);
            b.sense_radius = rng.random_range(0.5..5.0);
            b.beacon = random_beacon(rng);
            b
        })
        .collect();
    (world, bodies)
}

/// Everything the agent at `me` cannot perceive removed.
fn masked(world: &WorldState, bodies: &[AgentBody], me: &AgentBody) -> (WorldState, Vec<AgentBody>) {
    let mut w = world.clone();
    w.objects.retain(|o| o.position.distance(me.position) <= me.sense_radius);
    let b = bodies
        .iter()
        .filter(|b| b.id == me.id || b.position.distance(me.position) <= me.comm_radius)
        .cloned()
        .collect();
    (w, b)
}

/// Out-of-range agents and objects moved elsewhere out of range, with new
/// beacons.
fn scrambled(
    rng: &mut ChaCha8Rng,
    world: &WorldState,
    bodies: &[AgentBody],
    me: &AgentBody,
) -> (WorldState, Vec<AgentBody>) {
    let far = |rng: &mut ChaCha8Rng, r: f64| loop {
        let p = random_point(rng);
        if p.distance(me.position) > r {
            return p;
        }
    };
    let mut w = world.clone();
    for o in &mut w.objects {
        if o.position.distance(me.position) > me.sense_radius {
            o.position = far(rng, me.sense_radius);
            o.strength = rng.random_range(0.1..=1.0);
        }
    }
    let b = bodies
        .iter()
        .map(|b| {
            let mut b = b.clone();
            if b.id != me.id && b.position.distance(me.position) > me.comm_radius {
                b.position = far(rng, me.comm_radius);
                b.beacon = random_beacon(rng);
            }
            b
        })
        .collect();
    (w, b)
}

pub struct LocalityOutcome {
    pub scenes: u64,
    pub robots_checked: u64,
    pub violations: Vec<String>,
}

/// Compares each robot's percept and actions in the full scene against the
/// masked and scrambled variants.
pub fn run(seed: u64, scenes: u64) -> LocalityOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = SwarmConfig::default();
    let mut checked = 0u64;
    let mut violations = Vec::new();
    for scene in 0..scenes {
        let (world, bodies) = random_scene(&mut rng);
        for me in bodies.iter().filter(|b| b.kind == AgentKind::Robot) {
            let (mw, mb) = masked(&world, &bodies, me);
            let (sw, sb) = scrambled(&mut rng, &world, &bodies, me);
            let view = |w: &WorldState, b: &[AgentBody]| {
                let mut prng = substream(scene, me.id, 3, StreamPurpose::Perceive);
                let p = perceive(w, b, me.id, &mut prng).unwrap();
                let mut policy = SwarmRobotPolicy::new(config.clone(), PostureCommand::Contract);
                let mut drng = substream(scene, me.id, 3, StreamPurpose::Decide);
                let actions = policy.decide(&p, &mut drng).unwrap();
                (p, actions)
            };
            let full = view(&world, &bodies);
            for (label, alt) in [("masked", view(&mw, &mb)), ("scrambled", view(&sw, &sb))] {
                if alt != full {
                    violations.push(format!("scene {scene} {} {label}", me.id));
                }
            }
            checked += 1;
        }
    }
    LocalityOutcome {
        scenes,
        robots_checked: checked,
        violations,
    }
}
