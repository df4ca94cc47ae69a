//! A live, operator-driven episode advanced one tick at a time.
//!
//! Commands are queued on arrival and applied at the start of the next
//! [`Session::advance`] call, in arrival order. Every applied command is
//! written to the journal together with the boundary index it was applied
//! at, so [`Session::replay`] reproduces the run exactly.

use std::collections::VecDeque;

use exswarm_core::competence::{GoalSpec, ResourceLedger, Situation};
use exswarm_core::operator::{OperatorState, TeleopHandle};
use exswarm_core::scenario::{build_scenario, HumanRole, Roster, ScenarioError, HUMAN_ID};
use exswarm_core::swarm::{PostureCommand, SwarmConfig};
use exswarm_core::world::{AgentKind, Simulation};
use serde::{Deserialize, Serialize};

use crate::protocol::{EpisodeStatus, GoalStatus, OperatorMessage, Pose, ProtocolError, RobotView, Snapshot};
use crate::BridgeError;

/// Everything needed to (re)build the live world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSetup {
    pub scenario: String,
    pub situation: Situation,
    pub swarm: SwarmConfig,
    pub goal: GoalSpec,
    pub limits: ResourceLedger,
    pub seed: u64,
    /// Robot posture before the operator issues anything.
    #[serde(default = "default_posture")]
    pub initial_posture: PostureCommand,
}

fn default_posture() -> PostureCommand {
    PostureCommand::Hold
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    /// Number of `advance` calls completed before this entry was applied.
    pub boundary: u64,
    /// Session tick at the time of application.
    pub tick: u64,
    pub message: OperatorMessage,
}

pub struct Session {
    setup: SessionSetup,
    sim: Simulation,
    teleop: TeleopHandle,
    seed: u64,
    tick: u64,
    boundaries: u64,
    paused: bool,
    posture: Option<PostureCommand>,
    spent: ResourceLedger,
    states: Vec<exswarm_core::world::StateRecord>,
    status: EpisodeStatus,
    pending: VecDeque<OperatorMessage>,
    journal: Vec<JournalEntry>,
}

impl Session {
    pub fn new(setup: SessionSetup) -> Result<Self, BridgeError> {
        setup.swarm.validate().map_err(|e| BridgeError::Setup(e.to_string()))?;
        let teleop = TeleopHandle::default();
        let sim = build_sim(&setup, &teleop, setup.seed)?;
        let states = vec![sim.snapshot()];
        Ok(Self {
            seed: setup.seed,
            setup,
            sim,
            teleop,
            tick: 0,
            boundaries: 0,
            paused: false,
            posture: None,
            spent: ResourceLedger::default(),
            states,
            status: EpisodeStatus::Running,
            pending: VecDeque::new(),
            journal: Vec::new(),
        })
    }

    pub fn setup(&self) -> &SessionSetup {
        &self.setup
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn journal(&self) -> &[JournalEntry] {
        &self.journal
    }

    pub fn boundaries(&self) -> u64 {
        self.boundaries
    }

    /// Checks a command against this session and queues it.
    pub fn submit(&mut self, message: OperatorMessage) -> Result<(), ProtocolError> {
        match message {
            OperatorMessage::Posture { command } => command
                .validate(self.setup.swarm.n_robots, self.setup.swarm.separation_distance)
                .map_err(|e| ProtocolError::InvalidCommand(e.to_string()))?,
            OperatorMessage::MoveHuman { velocity } if !velocity.is_finite() => {
                return Err(ProtocolError::InvalidCommand("velocity must be finite".into()))
            }
            _ => {}
        }
        self.pending.push_back(message);
        Ok(())
    }

    /// Applies queued commands, then steps the world once unless paused or
    /// finished. The tick counts world-advancing boundaries only.
    pub fn advance(&mut self) -> Result<Snapshot, BridgeError> {
        while let Some(message) = self.pending.pop_front() {
            self.journal.push(JournalEntry {
                boundary: self.boundaries,
                tick: self.tick,
                message,
            });
            self.apply(message)?;
        }
        self.boundaries += 1;
        if !self.paused {
            self.tick += 1;
            if self.status == EpisodeStatus::Running {
                self.step_world();
            }
        }
        Ok(self.snapshot())
    }

    fn apply(&mut self, message: OperatorMessage) -> Result<(), BridgeError> {
        match message {
            OperatorMessage::Pause => self.paused = true,
            OperatorMessage::Resume => self.paused = false,
            OperatorMessage::Posture { command } => {
                self.teleop.lock().expect("teleop lock").posture = Some(command);
                self.posture = Some(command);
            }
            OperatorMessage::MoveHuman { velocity } => {
                self.teleop.lock().expect("teleop lock").velocity = Some(velocity);
            }
            OperatorMessage::Reset { seed } => {
                self.teleop = TeleopHandle::default();
                self.sim = build_sim(&self.setup, &self.teleop, seed)?;
                self.seed = seed;
                self.states = vec![self.sim.snapshot()];
                self.spent = ResourceLedger::default();
                self.posture = None;
                self.status = EpisodeStatus::Running;
            }
        }
        Ok(())
    }

    fn step_world(&mut self) {
        let (goal, limits) = (&self.setup.goal, &self.setup.limits);
        if goal.is_met(&self.states, &self.spent) {
            self.status = EpisodeStatus::GoalReached;
            return;
        }
        if self.spent.steps >= limits.steps {
            self.status = EpisodeStatus::BudgetExhausted;
            return;
        }
        let out = match self.sim.plan() {
            Ok(out) => out,
            Err(_) => {
                self.status = EpisodeStatus::Aborted;
                return;
            }
        };
        let distance = self.spent.distance + out.cost.distance;
        let messages = self.spent.messages + out.cost.messages;
        if distance > limits.distance || messages > limits.messages {
            self.status = EpisodeStatus::BudgetExhausted;
            return;
        }
        self.spent = ResourceLedger {
            steps: self.spent.steps + 1,
            distance,
            messages,
        };
        self.sim.commit(out);
        // Metrics may integrate over the whole history, so keep every state.
        self.states.push(self.sim.snapshot());
        if goal.is_met(&self.states, &self.spent) {
            self.status = EpisodeStatus::GoalReached;
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        let world = self.sim.world();
        let mut human = None;
        let mut robots = Vec::new();
        for b in self.sim.bodies() {
            match b.kind {
                AgentKind::Human => {
                    human = Some(Pose {
                        position: b.position,
                        heading: b.heading,
                    })
                }
                AgentKind::Robot => robots.push(RobotView {
                    id: b.id.0,
                    position: b.position,
                    heading: b.heading,
                    f: b.beacon.fusion,
                    direction: b.beacon.direction,
                }),
                AgentKind::AiController => {}
            }
        }
        Snapshot {
            tick: self.tick,
            time: world.time,
            paused: self.paused,
            human,
            robots,
            discovered: world.objects.iter().filter(|o| o.discovered).map(|o| o.position).collect(),
            posture: self.posture,
            resources: self.spent,
            goal: GoalStatus {
                status: self.status,
                metric_value: self.setup.goal.value(&self.states, &self.spent),
            },
        }
    }

    /// Rebuilds a session from `setup` and re-applies `journal` at the
    /// recorded boundaries, advancing `boundaries` times in total.
    pub fn replay(setup: SessionSetup, journal: &[JournalEntry], boundaries: u64) -> Result<Session, BridgeError> {
        let mut s = Session::new(setup)?;
        let mut entries = journal.iter().peekable();
        for b in 0..boundaries {
            while let Some(e) = entries.next_if(|e| e.boundary == b) {
                s.submit(e.message).map_err(|err| BridgeError::Replay(err.to_string()))?;
            }
            s.advance()?;
        }
        if entries.next().is_some() {
            return Err(BridgeError::Replay("journal extends past the replayed boundaries".into()));
        }
        Ok(s)
    }
}

fn build_sim(setup: &SessionSetup, teleop: &TeleopHandle, seed: u64) -> Result<Simulation, BridgeError> {
    let roster = Roster {
        human: Some(HumanRole::Operator(OperatorState::Teleop(teleop.clone()))),
        robots: Some(setup.initial_posture),
    };
    let scenario = build_scenario(&setup.scenario, &setup.situation, &setup.swarm, &roster, seed)?;
    if exswarm_core::world::find_body(&scenario.bodies, HUMAN_ID).is_none() {
        return Err(BridgeError::Setup(format!("scenario `{}` has no human", setup.scenario)));
    }
    let policies = roster.policies(&setup.swarm);
    Simulation::new(scenario, policies, seed).map_err(|e| BridgeError::Setup(e.to_string()))
}

impl From<ScenarioError> for BridgeError {
    fn from(e: ScenarioError) -> Self {
        BridgeError::Setup(e.to_string())
    }
}
