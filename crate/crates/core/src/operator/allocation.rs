//! Task allocation over internal agents.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::OperatorError;
use crate::world::AgentKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loa {
    Manual,
    Shared,
    Automated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskAssignment {
    pub agents: BTreeSet<String>,
    pub loa: Loa,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationDesign {
    pub tasks: Vec<String>,
    pub assignment: BTreeMap<String, TaskAssignment>,
}

/// Checks every task against its level of automation. `agents` maps names of
/// internal agents to their kind; robots count as artificial.
pub fn build_allocation(
    tasks: &[String],
    spec: &BTreeMap<String, TaskAssignment>,
    agents: &BTreeMap<String, AgentKind>,
) -> Result<AllocationDesign, OperatorError> {
    let violation = |task: &str, why: String| OperatorError::LoaViolation {
        task: task.to_string(),
        reason: why,
    };
    for task in spec.keys() {
        if !tasks.contains(task) {
            return Err(violation(task, "not in task list".into()));
        }
    }
    for task in tasks {
        let a = spec
            .get(task)
            .ok_or_else(|| violation(task, "no assignment".into()))?;
        if a.agents.is_empty() {
            return Err(violation(task, "no agents".into()));
        }
        let mut humans = 0;
        let mut artificial = 0;
        for name in &a.agents {
            match agents.get(name) {
                Some(k) if k.is_artificial() => artificial += 1,
                Some(_) => humans += 1,
                None => return Err(violation(task, format!("unknown agent `{name}`"))),
            }
        }
        let ok = match a.loa {
            Loa::Manual => artificial == 0,
            Loa::Automated => humans == 0,
            Loa::Shared => humans > 0 && artificial > 0,
        };
        if !ok {
            return Err(violation(
                task,
                format!("{:?} with {humans} human and {artificial} artificial agents", a.loa),
            ));
        }
    }
    Ok(AllocationDesign {
        tasks: tasks.to_vec(),
        assignment: spec.clone(),
    })
}
