//! Fusion-field oracle: after enough rounds every robot holds the best
//! `detection * decay^hops` over all robots, computed here by BFS.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use exswarm_core::geom::Vec2;
use exswarm_core::rng::{substream, StreamPurpose};
use exswarm_core::swarm::{communication_graph, update_fusion_field};
use exswarm_core::world::{perceive, AgentBody, AgentId, AgentKind, Arena, ObjectOfInterest, Percept, WorldState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Topology {
    pub world: WorldState,
    pub bodies: Vec<AgentBody>,
    pub decay: f64,
}

fn random_topology(rng: &mut ChaCha8Rng) -> Topology {
    let n = rng.random_range(1..=50u32);
    let side = rng.random_range(5.0..40.0);
    let mut world = WorldState::new(Arena::new(side, side));
    let comm = rng.random_range(2.0..8.0);
    let sense = rng.random_range(0.5..4.0);
    let positions: Vec<Vec2> = (0..n)
        .map(|_| Vec2::new(rng.random_range(0.0..side), rng.random_range(0.0..side)))
        .collect();
    for _ in 0..rng.random_range(0..4) {
        // Mostly near some robot so that sources are common.
        let p = if rng.random_bool(0.8) {
            let near = positions[rng.random_range(0..positions.len())];
            Arena::new(side, side).clamp(near + Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        } else {
            Vec2::new(rng.random_range(0.0..side), rng.random_range(0.0..side))
        };
        world.objects.push(ObjectOfInterest::target(p, rng.random_range(0.05..=1.0)));
    }
    let bodies = positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut b = AgentBody::new(AgentId(i as u32), AgentKind::Robot, p);
            b.comm_radius = comm;
            b.sense_radius = sense;
            b
        })
        .collect();
    Topology {
        world,
        bodies,
        decay: rng.random_range(0.2..0.95),
    }
}

/// Strongest undiscovered object within sense range of `b`, by geometry.
fn detection(world: &WorldState, b: &AgentBody) -> f64 {
    world
        .objects
        .iter()
        .filter(|o| o.position.distance(b.position) <= b.sense_radius)
        .map(|o| o.strength)
        .fold(0.0, f64::max)
}

/// Breadth-first hop distances over edges `dist <= comm`, computed here
/// from positions rather than with the crate's graph type.
fn bfs(bodies: &[AgentBody], src: usize) -> Vec<Option<u32>> {
    let mut hops = vec![None; bodies.len()];
    hops[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for v in 0..bodies.len() {
            if hops[v].is_none() && bodies[u].position.distance(bodies[v].position) <= bodies[u].comm_radius {
                hops[v] = Some(hops[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    hops
}

fn oracle(t: &Topology) -> Vec<f64> {
    let det: Vec<f64> = t.bodies.iter().map(|b| detection(&t.world, b)).collect();
    let hops: Vec<Vec<Option<u32>>> = (0..t.bodies.len()).map(|d| bfs(&t.bodies, d)).collect();
    (0..t.bodies.len())
        .map(|i| {
            (0..t.bodies.len())
                .filter_map(|d| hops[d][i].map(|h| det[d] * t.decay.powi(h as i32)))
                .fold(0.0, f64::max)
        })
        .collect()
}

pub fn percepts(t: &Topology) -> BTreeMap<AgentId, Percept> {
    t.bodies
        .iter()
        .map(|b| {
            let mut rng = substream(0, b.id, 0, StreamPurpose::Perceive);
            (b.id, perceive(&t.world, &t.bodies, b.id, &mut rng).unwrap())
        })
        .collect()
}

pub struct FusionOutcome {
    pub cases: usize,
    pub with_sources: usize,
    pub max_error: f64,
    pub mismatches: Vec<String>,
}

/// Runs `cases` random topologies and compares against the oracle to `tol`.
pub fn run(seed: u64, cases: usize, tol: f64) -> FusionOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = FusionOutcome {
        cases,
        with_sources: 0,
        max_error: 0.0,
        mismatches: Vec::new(),
    };
    for case in 0..cases {
        let t = random_topology(&mut rng);
        let graph = communication_graph(&t.bodies, t.bodies[0].comm_radius);
        let percepts = percepts(&t);
        let mut values: BTreeMap<AgentId, f64> = BTreeMap::new();
        // Detections enter on the first round; each further round adds a hop.
        for _ in 0..=graph.diameter() {
            values = update_fusion_field(&values, &percepts, t.decay)
                .into_iter()
                .map(|(id, c)| (id, c.value))
                .collect();
        }
        let want = oracle(&t);
        out.with_sources += usize::from(want.iter().any(|&f| f > 0.0));
        for (i, b) in t.bodies.iter().enumerate() {
            let err = (values[&b.id] - want[i]).abs();
            out.max_error = out.max_error.max(err);
            if err > tol {
                out.mismatches.push(format!("case {case} robot {i}: got {} want {}", values[&b.id], want[i]));
            }
        }
    }
    out
}
