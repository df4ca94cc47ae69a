//! Episode traces and their line-delimited JSON form.
//!
//! A serialized trace is one header record, one `state` record per world
//! state (initial state included) and one footer record:
//!
//! ```text
//! {"record":"header","seed":7,"situation":{...}}
//! {"record":"state","step":0,"world":{...},"bodies":[...]}
//! ...
//! {"record":"footer","outcome":{"kind":"goal_reached"},"resources_spent":{...},"warnings":[]}
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AgentBody, StepWarning, WorldState};
use crate::competence::{GoalSpec, Metric, ResourceLedger, Situation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    BudgetExhausted,
    Aborted { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub world: WorldState,
    pub bodies: Vec<AgentBody>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub seed: u64,
    pub situation: Situation,
    pub states: Vec<StateRecord>,
    pub outcome: Outcome,
    pub resources_spent: ResourceLedger,
    #[serde(default)]
    pub warnings: Vec<StepWarning>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TraceRecord {
    Header {
        seed: u64,
        situation: Situation,
    },
    State {
        step: u64,
        world: WorldState,
        bodies: Vec<AgentBody>,
    },
    Footer {
        outcome: Outcome,
        resources_spent: ResourceLedger,
        warnings: Vec<StepWarning>,
    },
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Structure { line: usize, message: String },
    #[error("trace invariant violated: {0}")]
    Invariant(String),
}

impl EpisodeTrace {
    pub fn steps_used(&self) -> u64 {
        self.resources_spent.steps
    }

    pub fn final_state(&self) -> &StateRecord {
        self.states.last().expect("trace holds at least the initial state")
    }

    pub fn metric_value(&self, metric: Metric) -> f64 {
        metric.evaluate(&self.states, &self.resources_spent)
    }

    /// Checks the structural invariants; with a goal, also that a
    /// `GoalReached` outcome is backed by the final state.
    pub fn check(&self, goal: Option<&GoalSpec>) -> Result<(), TraceError> {
        if self.states.len() as u64 != self.resources_spent.steps + 1 {
            return Err(TraceError::Invariant(format!(
                "{} states for {} steps",
                self.states.len(),
                self.resources_spent.steps
            )));
        }
        for pair in self.states.windows(2) {
            if pair[1].world.time != pair[0].world.time + 1 {
                return Err(TraceError::Invariant("time not strictly increasing by 1".into()));
            }
            if pair[0].bodies.len() != pair[1].bodies.len()
                || pair[0].world.objects.len() != pair[1].world.objects.len()
            {
                return Err(TraceError::Invariant("agent or object count changed".into()));
            }
            for (a, b) in pair[0].bodies.iter().zip(&pair[1].bodies) {
                if a.position.distance(b.position) > a.max_speed + 1e-9 {
                    return Err(TraceError::Invariant(format!("{} exceeded max_speed", a.id)));
                }
            }
        }
        if let (Some(goal), Outcome::GoalReached) = (goal, &self.outcome) {
            if !goal.is_met(&self.states, &self.resources_spent) {
                return Err(TraceError::Invariant("goal_reached but goal not met".into()));
            }
        }
        Ok(())
    }

    pub fn records(&self) -> impl Iterator<Item = TraceRecord> + '_ {
        let header = std::iter::once(TraceRecord::Header {
            seed: self.seed,
            situation: self.situation.clone(),
        });
        let states = self.states.iter().enumerate().map(|(i, s)| TraceRecord::State {
            step: i as u64,
            world: s.world.clone(),
            bodies: s.bodies.clone(),
        });
        let footer = std::iter::once(TraceRecord::Footer {
            outcome: self.outcome.clone(),
            resources_spent: self.resources_spent,
            warnings: self.warnings.clone(),
        });
        header.chain(states).chain(footer)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), TraceError> {
        for record in self.records() {
            serde_json::to_writer(&mut out, &record).map_err(|e| TraceError::Json { line: 0, source: e })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TraceError> {
        let mut header = None;
        let mut states = Vec::new();
        let mut footer = None;
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: TraceRecord =
                serde_json::from_str(&line).map_err(|e| TraceError::Json { line: line_no, source: e })?;
            let structure = |message: &str| TraceError::Structure {
                line: line_no,
                message: message.into(),
            };
            match record {
                TraceRecord::Header { seed, situation } => {
                    if header.is_some() || !states.is_empty() {
                        return Err(structure("unexpected header"));
                    }
                    header = Some((seed, situation));
                }
                TraceRecord::State { step, world, bodies } => {
                    if header.is_none() || footer.is_some() {
                        return Err(structure("state outside header/footer"));
                    }
                    if step != states.len() as u64 {
                        return Err(structure("state records out of order"));
                    }
                    states.push(StateRecord { world, bodies });
                }
                TraceRecord::Footer {
                    outcome,
                    resources_spent,
                    warnings,
                } => {
                    if footer.is_some() {
                        return Err(structure("duplicate footer"));
                    }
                    footer = Some((outcome, resources_spent, warnings));
                }
            }
        }
        let (seed, situation) = header.ok_or(TraceError::Structure {
            line: 0,
            message: "missing header".into(),
        })?;
        let (outcome, resources_spent, warnings) = footer.ok_or(TraceError::Structure {
            line: 0,
            message: "missing footer".into(),
        })?;
        if states.is_empty() {
            return Err(TraceError::Structure {
                line: 0,
                message: "no state records".into(),
            });
        }
        Ok(Self {
            seed,
            situation,
            states,
            outcome,
            resources_spent,
            warnings,
        })
    }
}
