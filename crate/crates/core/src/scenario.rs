//! Registered scenario constructors and per-arm agent rosters.
//!
//! The human, when present, is always `agent-0`; robots are `agent-1..=n`.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::competence::{GoalSpec, ResourceLedger, Situation};
use crate::geom::Vec2;
use crate::operator::{HumanController, OperatorPolicy, OperatorState, StubClaimPolicy, TeleopHandle};
use crate::rng::{stream, StreamPurpose};
use crate::swarm::{PostureCommand, SwarmConfig, SwarmRobotPolicy};
use crate::world::{
    run_episode, AgentBody, AgentId, AgentKind, Arena, EpisodeTrace, ObjectOfInterest, PolicySet, Scenario, WorldError,
    WorldState, SENSOR_NOISE_SIGMA,
};

pub const TARGET_SEARCH: &str = "target_search";
pub const COIN_CLAIM: &str = "coin_claim";
pub const THRESHOLD_STUB: &str = "threshold_stub";

pub const SCENARIOS: [&str; 3] = [TARGET_SEARCH, COIN_CLAIM, THRESHOLD_STUB];

pub const HUMAN_ID: AgentId = AgentId(0);

pub const TARGET_SEARCH_ARENA: f64 = 60.0;
pub const HUMAN_MAX_SPEED: f64 = 0.5;
pub const HUMAN_SENSE_RADIUS: f64 = 2.0;
/// Decoys stronger than this outshine the target in the fusion field.
pub const TARGET_STRENGTH: f64 = 0.5;
/// `threshold_stub` places its object on the agent iff `x` is below this.
pub const STUB_THRESHOLD: f64 = 0.5;

/// Situation variables read by `target_search`. Only the distance is required.
pub const VAR_TARGET_DISTANCE: &str = "target_distance";
pub const VAR_TARGET_BEARING: &str = "target_bearing";
/// Shrinks every communication radius by the factor `1 - interference`.
pub const VAR_INTERFERENCE: &str = "interference";
pub const VAR_SENSOR_NOISE: &str = "sensor_noise";
/// Strength of the decoys near the start; 0 places none.
pub const VAR_DECOY_STRENGTH: &str = "decoy_strength";
pub const DECOY_COUNT: usize = 2;
/// Decoys sit this far from the arena center.
pub const DECOY_DISTANCE: (f64, f64) = (1.5, 3.5);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("scenario `{scenario}` needs numeric situation variable `{variable}`")]
    MissingVariable { scenario: String, variable: String },
    #[error("scenario `{scenario}`: {reason}")]
    InvalidSituation { scenario: String, reason: String },
    #[error("invalid arm: {0}")]
    InvalidArm(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

pub fn is_registered(id: &str) -> bool {
    SCENARIOS.contains(&id)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmArm {
    #[serde(default = "hold")]
    pub initial_posture: PostureCommand,
}

fn hold() -> PostureCommand {
    PostureCommand::Hold
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubArm {
    pub claim_probability: f64,
}

/// Which agents take part in an allocation arm and how they decide.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swarm: Option<SwarmArm>,
    /// Replaces the human with a claim-by-coin stub.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stub: Option<StubArm>,
}

impl ArmSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.operator.is_none() && self.swarm.is_none() && self.stub.is_none() {
            out.push("arm has no agents".to_string());
        }
        if self.operator.is_some() && self.stub.is_some() {
            out.push("operator and stub are exclusive".to_string());
        }
        if let Some(op) = &self.operator {
            if let Err(e) = op.validate() {
                out.push(e.to_string());
            }
        }
        if let Some(s) = &self.stub {
            if !(0.0..=1.0).contains(&s.claim_probability) {
                out.push(format!("stub claim_probability {} outside [0,1]", s.claim_probability));
            }
        }
        out
    }

    pub fn is_supervised(&self) -> bool {
        matches!(self.operator, Some(OperatorPolicy::SupervisorScript { .. }))
    }

    /// Concrete agents for one episode. `deploy` is the supervisor's choice
    /// and is ignored by unsupervised arms. A withheld swarm leaves the human
    /// walking alone, like the human-only arm.
    pub fn roster(&self, deploy: bool) -> Roster {
        let robots = self.swarm.as_ref().map(|s| s.initial_posture);
        match &self.operator {
            Some(OperatorPolicy::SupervisorScript { threshold, .. }) if deploy => Roster {
                human: Some(HumanRole::Operator(OperatorState::GradientFollower { threshold: *threshold })),
                robots: Some(robots.unwrap_or(PostureCommand::Hold)),
            },
            Some(OperatorPolicy::SupervisorScript { .. }) => Roster {
                human: Some(HumanRole::Operator(OperatorState::RandomWalk)),
                robots: None,
            },
            Some(op) => Roster {
                human: Some(HumanRole::Operator(match op {
                    OperatorPolicy::RandomWalk => OperatorState::RandomWalk,
                    OperatorPolicy::GradientFollower { threshold } => OperatorState::GradientFollower { threshold: *threshold },
                    _ => OperatorState::Teleop(TeleopHandle::default()),
                })),
                robots,
            },
            None => Roster {
                human: self.stub.as_ref().map(|s| HumanRole::Stub(s.claim_probability)),
                robots,
            },
        }
    }
}

#[derive(Clone, Debug)]
pub enum HumanRole {
    Operator(OperatorState),
    Stub(f64),
}

#[derive(Clone, Debug)]
pub struct Roster {
    pub human: Option<HumanRole>,
    /// Initial posture of the robots, when the swarm takes part.
    pub robots: Option<PostureCommand>,
}

impl Roster {
    pub fn policies(&self, swarm: &SwarmConfig) -> PolicySet {
        let mut set = PolicySet::new();
        match &self.human {
            Some(HumanRole::Operator(state)) => {
                set.insert(HUMAN_ID, Box::new(HumanController::new(state.clone())));
            }
            Some(HumanRole::Stub(p)) => {
                set.insert(HUMAN_ID, Box::new(StubClaimPolicy::new(*p)));
            }
            None => {}
        }
        if let Some(initial) = self.robots {
            for i in 1..=swarm.n_robots {
                set.insert(AgentId(i as u32), Box::new(SwarmRobotPolicy::new(swarm.clone(), initial)));
            }
        }
        set
    }
}

fn required(scenario: &str, situation: &Situation, var: &str) -> Result<f64, ScenarioError> {
    situation.number(var).ok_or_else(|| ScenarioError::MissingVariable {
        scenario: scenario.into(),
        variable: var.into(),
    })
}

/// Builds the initial world for `id`. Random placement draws from the
/// scenario stream of `seed`, so every arm sharing a seed sees the same
/// target and spawn layout.
pub fn build_scenario(
    id: &str,
    situation: &Situation,
    swarm: &SwarmConfig,
    roster: &Roster,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    match id {
        TARGET_SEARCH => target_search(situation, swarm, roster, seed),
        COIN_CLAIM => stub_world(None),
        THRESHOLD_STUB => stub_world(Some(required(id, situation, "x")?)),
        other => Err(ScenarioError::UnknownScenario(other.into())),
    }
}

/// Builds the world for `id` and runs one episode of `roster` on it.
pub fn run_roster_episode(
    id: &str,
    situation: &Situation,
    swarm: &SwarmConfig,
    roster: &Roster,
    goal: &GoalSpec,
    limits: &ResourceLedger,
    seed: u64,
) -> Result<EpisodeTrace, ScenarioError> {
    let scenario = build_scenario(id, situation, swarm, roster, seed)?;
    Ok(run_episode(&scenario, situation, roster.policies(swarm), goal, limits, seed)?)
}

fn stub_world(x: Option<f64>) -> Result<Scenario, ScenarioError> {
    let mut world = WorldState::new(Arena::new(10.0, 10.0));
    let here = world.arena.center();
    let at = match x {
        Some(x) if x >= STUB_THRESHOLD => Vec2::new(0.5, 0.5),
        _ => here,
    };
    world.objects.push(ObjectOfInterest::target(at, 1.0));
    let mut agent = AgentBody::new(HUMAN_ID, AgentKind::Human, here);
    agent.sense_radius = 1.0;
    Ok(Scenario::new(world, vec![agent])?)
}

fn target_search(situation: &Situation, swarm: &SwarmConfig, roster: &Roster, seed: u64) -> Result<Scenario, ScenarioError> {
    let distance = required(TARGET_SEARCH, situation, VAR_TARGET_DISTANCE)?;
    let interference = situation.number(VAR_INTERFERENCE).unwrap_or(0.0);
    let noise = situation.number(VAR_SENSOR_NOISE).unwrap_or(0.0);
    let decoy = situation.number(VAR_DECOY_STRENGTH).unwrap_or(0.0);
    let half = TARGET_SEARCH_ARENA / 2.0;
    let invalid = |reason: String| ScenarioError::InvalidSituation {
        scenario: TARGET_SEARCH.into(),
        reason,
    };
    if !(0.0..half).contains(&distance) {
        return Err(invalid(format!("target_distance {distance} outside [0, {half})")));
    }
    if !(0.0..=1.0).contains(&interference) {
        return Err(invalid(format!("interference {interference} outside [0,1]")));
    }
    if !(0.0..=1.0).contains(&decoy) {
        return Err(invalid(format!("decoy_strength {decoy} outside [0,1]")));
    }
    if !(noise >= 0.0) {
        return Err(invalid(format!("sensor_noise {noise} is negative")));
    }

    let mut rng = stream(seed, StreamPurpose::Scenario);
    let bearing = match situation.number(VAR_TARGET_BEARING) {
        Some(b) => b,
        None => rng.random_range(0.0..TAU),
    };
    let mut world = WorldState::new(Arena::new(TARGET_SEARCH_ARENA, TARGET_SEARCH_ARENA));
    if noise > 0.0 {
        world.env_params.insert(SENSOR_NOISE_SIGMA.into(), noise);
    }
    let center = world.arena.center();
    world.objects.push(ObjectOfInterest::target(center + Vec2::from_angle(bearing) * distance, TARGET_STRENGTH));
    // Drawn unconditionally so the spawn layout does not depend on decoys.
    let decoys: Vec<Vec2> = (0..DECOY_COUNT)
        .map(|_| center + Vec2::from_angle(rng.random_range(0.0..TAU)) * rng.random_range(DECOY_DISTANCE.0..DECOY_DISTANCE.1))
        .collect();
    if decoy > 0.0 {
        world.objects.extend(decoys.into_iter().map(|at| ObjectOfInterest::decoy(at, decoy)));
    }

    let comm = swarm.comm_radius * (1.0 - interference);
    let mut bodies = Vec::new();
    if roster.human.is_some() {
        let mut h = AgentBody::new(HUMAN_ID, AgentKind::Human, center);
        h.max_speed = HUMAN_MAX_SPEED;
        h.sense_radius = HUMAN_SENSE_RADIUS;
        h.comm_radius = comm;
        bodies.push(h);
    }
    if roster.robots.is_some() {
        for i in 1..=swarm.n_robots {
            // Uniform over the spawn disk.
            let r = swarm.spawn_radius * rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..TAU);
            let mut b = AgentBody::new(AgentId(i as u32), AgentKind::Robot, center + Vec2::from_angle(a) * r);
            b.max_speed = swarm.max_speed;
            b.sense_radius = swarm.sense_radius;
            b.comm_radius = comm;
            bodies.push(b);
        }
    }
    Ok(Scenario::new(world, bodies)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::competence::VariableValue;

    fn situation(d: f64) -> Situation {
        Situation::default().with(VAR_TARGET_DISTANCE, VariableValue::Number(d))
    }

    fn joint() -> ArmSpec {
        ArmSpec {
            operator: Some(OperatorPolicy::GradientFollower { threshold: 0.2 }),
            swarm: Some(SwarmArm {
                initial_posture: PostureCommand::Disperse,
            }),
            stub: None,
        }
    }

    #[test]
    fn target_at_requested_distance() {
        let cfg = SwarmConfig::default();
        let s = build_scenario(TARGET_SEARCH, &situation(12.0), &cfg, &joint().roster(true), 3).unwrap();
        let c = s.world.arena.center();
        assert!((s.world.objects[0].position.distance(c) - 12.0).abs() < 1e-9);
        assert_eq!(s.bodies.len(), 1 + cfg.n_robots);
        assert!(s.bodies[1..].iter().all(|b| b.position.distance(c) <= cfg.spawn_radius));
    }

    #[test]
    fn same_seed_same_layout_across_arms() {
        let cfg = SwarmConfig::default();
        let nat = ArmSpec {
            operator: Some(OperatorPolicy::RandomWalk),
            ..ArmSpec::default()
        };
        let a = build_scenario(TARGET_SEARCH, &situation(9.0), &cfg, &nat.roster(true), 8).unwrap();
        let b = build_scenario(TARGET_SEARCH, &situation(9.0), &cfg, &joint().roster(true), 8).unwrap();
        assert_eq!(a.world.objects, b.world.objects);
        assert_eq!(a.bodies.len(), 1);
    }

    #[test]
    fn interference_shrinks_comm_radius() {
        let cfg = SwarmConfig::default();
        let s = situation(5.0).with(VAR_INTERFERENCE, VariableValue::Number(0.5));
        let sc = build_scenario(TARGET_SEARCH, &s, &cfg, &joint().roster(true), 1).unwrap();
        assert!(sc.bodies.iter().all(|b| (b.comm_radius - cfg.comm_radius * 0.5).abs() < 1e-12));
    }

    #[test]
    fn decoy_does_not_move_spawns() {
        let cfg = SwarmConfig::default();
        let plain = build_scenario(TARGET_SEARCH, &situation(9.0), &cfg, &joint().roster(true), 4).unwrap();
        let s = situation(9.0).with(VAR_DECOY_STRENGTH, VariableValue::Number(0.7));
        let cluttered = build_scenario(TARGET_SEARCH, &s, &cfg, &joint().roster(true), 4).unwrap();
        assert_eq!(plain.bodies, cluttered.bodies);
        assert_eq!(cluttered.world.objects.len(), 1 + DECOY_COUNT);
        assert!(cluttered.world.objects[1].decoy);
        assert_eq!(cluttered.world.target_count(), 1);
    }

    #[test]
    fn missing_distance() {
        let cfg = SwarmConfig::default();
        let err = build_scenario(TARGET_SEARCH, &Situation::default(), &cfg, &joint().roster(true), 1).unwrap_err();
        assert!(matches!(err, ScenarioError::MissingVariable { .. }));
    }

    #[test]
    fn unknown_id() {
        let cfg = SwarmConfig::default();
        assert!(build_scenario("maze", &situation(1.0), &cfg, &joint().roster(true), 1).is_err());
    }

    #[test]
    fn withheld_supervision_walks_alone() {
        let arm = ArmSpec {
            operator: Some(OperatorPolicy::SupervisorScript {
                trust: crate::operator::TrustModel {
                    axis: "x".into(),
                    buckets: vec![],
                    deploy_threshold: 0.5,
                },
                threshold: 0.2,
            }),
            swarm: Some(SwarmArm {
                initial_posture: PostureCommand::Disperse,
            }),
            stub: None,
        };
        let r = arm.roster(false);
        assert!(r.robots.is_none());
        assert!(matches!(r.human, Some(HumanRole::Operator(OperatorState::RandomWalk))));
        assert_eq!(arm.roster(true).robots, Some(PostureCommand::Disperse));
    }

    #[test]
    fn arm_needs_agents() {
        assert!(!ArmSpec::default().violations().is_empty());
        assert!(joint().violations().is_empty());
    }
}
