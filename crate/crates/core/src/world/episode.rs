use std::collections::BTreeMap;

use thiserror::Error;

use super::{perceive, step, Action, AgentBody, AgentId, EpisodeTrace, Outcome, Percept, StateRecord, StepOutput, StepWarning, WorldError, WorldState};
use crate::competence::{GoalSpec, ResourceLedger, Situation};
use crate::rng::{substream, StreamPurpose, StreamRng};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{reason}")]
pub struct PolicyError {
    pub reason: String,
}

impl PolicyError {
    pub fn new(reason: impl Into<String>) -> Self {
        Self { reason: reason.into() }
    }
}

/// An agent's decision matrix: maps what it senses to effector actions.
///
/// Internal state lives in the implementor. Implementations must be
/// deterministic given their state, the percept and the supplied stream.
pub trait DecisionMatrix: Send {
    fn decide(&mut self, percept: &Percept, rng: &mut StreamRng) -> Result<Vec<Action>, PolicyError>;
}

impl<F> DecisionMatrix for F
where
    F: FnMut(&Percept, &mut StreamRng) -> Result<Vec<Action>, PolicyError> + Send,
{
    fn decide(&mut self, percept: &Percept, rng: &mut StreamRng) -> Result<Vec<Action>, PolicyError> {
        self(percept, rng)
    }
}

pub type PolicySet = BTreeMap<AgentId, Box<dyn DecisionMatrix>>;

/// Initial world and bodies of an episode.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub world: WorldState,
    /// Sorted by id, ids unique.
    pub bodies: Vec<AgentBody>,
}

impl Scenario {
    pub fn new(world: WorldState, mut bodies: Vec<AgentBody>) -> Result<Self, WorldError> {
        bodies.sort_by_key(|b| b.id);
        let s = Self { world, bodies };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        self.world.validate()?;
        for pair in self.bodies.windows(2) {
            if pair[0].id >= pair[1].id {
                return Err(WorldError::Invariant(format!("bodies unsorted or duplicate at {}", pair[1].id)));
            }
        }
        for b in &self.bodies {
            b.validate()?;
            if !self.world.arena.contains(b.position) {
                return Err(WorldError::Invariant(format!("{} outside arena", b.id)));
            }
        }
        Ok(())
    }
}

/// A running agent-world loop. One call to [`Simulation::plan`] performs
/// perceive and decide for every agent and previews the resulting step;
/// [`Simulation::commit`] applies it.
pub struct Simulation {
    world: WorldState,
    bodies: Vec<AgentBody>,
    policies: PolicySet,
    seed: u64,
}

/// A policy failed; the episode cannot continue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyFailure {
    pub agent: AgentId,
    pub reason: String,
}

impl Simulation {
    pub fn new(scenario: Scenario, policies: PolicySet, seed: u64) -> Result<Self, WorldError> {
        scenario.validate()?;
        if let Some(&id) = policies.keys().find(|id| super::find_body(&scenario.bodies, **id).is_none()) {
            return Err(WorldError::UnknownAgentId(id));
        }
        Ok(Self {
            world: scenario.world,
            bodies: scenario.bodies,
            policies,
            seed,
        })
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn bodies(&self) -> &[AgentBody] {
        &self.bodies
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn snapshot(&self) -> StateRecord {
        StateRecord {
            world: self.world.clone(),
            bodies: self.bodies.clone(),
        }
    }

    /// Percept of `agent` at the current step, using its perception stream.
    pub fn percept(&self, agent: AgentId) -> Result<Percept, WorldError> {
        let mut rng = substream(self.seed, agent, self.world.time, StreamPurpose::Perceive);
        perceive(&self.world, &self.bodies, agent, &mut rng)
    }

    pub fn plan(&mut self) -> Result<StepOutput, PolicyFailure> {
        let t = self.world.time;
        let mut actions = BTreeMap::new();
        for (&id, policy) in self.policies.iter_mut() {
            let mut prng = substream(self.seed, id, t, StreamPurpose::Perceive);
            let percept = perceive(&self.world, &self.bodies, id, &mut prng).map_err(|e| PolicyFailure {
                agent: id,
                reason: e.to_string(),
            })?;
            let mut drng = substream(self.seed, id, t, StreamPurpose::Decide);
            let chosen = policy.decide(&percept, &mut drng).map_err(|e| PolicyFailure {
                agent: id,
                reason: e.reason,
            })?;
            actions.insert(id, chosen);
        }
        step(&self.world, &self.bodies, &actions).map_err(|e| PolicyFailure {
            agent: match e {
                WorldError::UnknownAgentId(id) => id,
                _ => AgentId(u32::MAX),
            },
            reason: e.to_string(),
        })
    }

    pub fn commit(&mut self, out: StepOutput) -> Vec<StepWarning> {
        self.world = out.world;
        self.bodies = out.bodies;
        out.warnings
    }

    /// Replaces the world and bodies wholesale (used by live sessions).
    pub fn reset(&mut self, scenario: Scenario, policies: PolicySet, seed: u64) -> Result<(), WorldError> {
        *self = Simulation::new(scenario, policies, seed)?;
        Ok(())
    }
}

/// Runs one episode: perceive, decide and step until the goal holds or a
/// budget component would be exceeded.
///
/// A step whose distance or message cost would overrun `limits` is not
/// applied, so `resources_spent` never exceeds `limits`.
pub fn run_episode(
    scenario: &Scenario,
    situation: &Situation,
    policies: PolicySet,
    goal: &GoalSpec,
    limits: &ResourceLedger,
    seed: u64,
) -> Result<EpisodeTrace, WorldError> {
    let mut sim = Simulation::new(scenario.clone(), policies, seed)?;
    let mut spent = ResourceLedger::default();
    let mut states = vec![sim.snapshot()];
    let mut warnings = Vec::new();

    let outcome = loop {
        if goal.is_met(&states, &spent) {
            break Outcome::GoalReached;
        }
        if spent.steps >= limits.steps {
            break Outcome::BudgetExhausted;
        }
        let out = match sim.plan() {
            Ok(out) => out,
            Err(failure) => {
                break Outcome::Aborted {
                    reason: format!("{}: {}", failure.agent, failure.reason),
                }
            }
        };
        let distance = spent.distance + out.cost.distance;
        let messages = spent.messages + out.cost.messages;
        if distance > limits.distance || messages > limits.messages {
            break Outcome::BudgetExhausted;
        }
        spent = ResourceLedger {
            steps: spent.steps + 1,
            distance,
            messages,
        };
        warnings.extend(sim.commit(out));
        states.push(sim.snapshot());
    };

    Ok(EpisodeTrace {
        seed,
        situation: situation.clone(),
        states,
        outcome,
        resources_spent: spent,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::competence::Metric;
    use crate::geom::Vec2;
    use crate::world::{AgentKind, Arena, ObjectOfInterest};

    fn one_robot_scenario() -> Scenario {
        let mut world = WorldState::new(Arena::new(10.0, 10.0));
        world.objects.push(ObjectOfInterest::target(Vec2::new(9.0, 9.0), 1.0));
        Scenario::new(world, vec![AgentBody::new(AgentId(0), AgentKind::Robot, Vec2::new(1.0, 1.0))]).unwrap()
    }

    fn drifter() -> PolicySet {
        let mut p: PolicySet = BTreeMap::new();
        p.insert(
            AgentId(0),
            Box::new(|_: &Percept, _: &mut StreamRng| Ok(vec![Action::moving(Vec2::new(0.5, 0.0))])),
        );
        p
    }

    #[test]
    fn zero_step_budget() {
        let sc = one_robot_scenario();
        let goal = GoalSpec::find_all("g");
        let trace = run_episode(&sc, &Situation::default(), drifter(), &goal, &ResourceLedger::new(0, 10.0, 10), 1).unwrap();
        assert_eq!(trace.states.len(), 1);
        assert_eq!(trace.outcome, Outcome::BudgetExhausted);
        assert_eq!(trace.resources_spent.steps, 0);
    }

    #[test]
    fn goal_true_initially() {
        let sc = one_robot_scenario();
        let goal = GoalSpec::new("g", Metric::DiscoveredCount, 0.0, 0.0).unwrap();
        let trace = run_episode(&sc, &Situation::default(), drifter(), &goal, &ResourceLedger::new(5, 10.0, 10), 1).unwrap();
        assert_eq!(trace.outcome, Outcome::GoalReached);
        assert_eq!(trace.steps_used(), 0);
    }

    #[test]
    fn distance_budget_is_never_overrun() {
        let sc = one_robot_scenario();
        let goal = GoalSpec::find_all("g");
        let limits = ResourceLedger::new(100, 1.2, 10);
        let trace = run_episode(&sc, &Situation::default(), drifter(), &goal, &limits, 1).unwrap();
        assert_eq!(trace.outcome, Outcome::BudgetExhausted);
        assert_eq!(trace.resources_spent.steps, 2);
        assert!(trace.resources_spent.within(&limits));
        trace.check(Some(&goal)).unwrap();
    }

    #[test]
    fn policy_failure_aborts() {
        let sc = one_robot_scenario();
        let mut p: PolicySet = BTreeMap::new();
        p.insert(
            AgentId(0),
            Box::new(|_: &Percept, _: &mut StreamRng| Err(PolicyError::new("sensor fault"))),
        );
        let trace = run_episode(&sc, &Situation::default(), p, &GoalSpec::find_all("g"), &ResourceLedger::new(5, 10.0, 10), 1)
            .unwrap();
        assert!(matches!(trace.outcome, Outcome::Aborted { ref reason } if reason.contains("sensor fault")));
    }

    #[test]
    fn policy_for_unknown_agent_rejected() {
        let sc = one_robot_scenario();
        let mut p = drifter();
        p.insert(AgentId(3), Box::new(|_: &Percept, _: &mut StreamRng| Ok(vec![])));
        assert!(matches!(
            Simulation::new(sc, p, 0),
            Err(WorldError::UnknownAgentId(AgentId(3)))
        ));
    }

    #[test]
    fn trace_round_trips_through_jsonl() {
        let sc = one_robot_scenario();
        let trace = run_episode(&sc, &Situation::default(), drifter(), &GoalSpec::find_all("g"), &ResourceLedger::new(4, 10.0, 10), 3)
            .unwrap();
        let text = trace.to_jsonl();
        assert_eq!(text.lines().count(), trace.states.len() + 2);
        let back = EpisodeTrace::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back, trace);
    }
}
