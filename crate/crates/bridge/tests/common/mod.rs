#![allow(dead_code)]

use exswarm_bridge::SessionSetup;
use exswarm_core::competence::{GoalSpec, ResourceLedger, Situation, VariableValue};
use exswarm_core::scenario::{TARGET_SEARCH, VAR_TARGET_DISTANCE};
use exswarm_core::swarm::{PostureCommand, SwarmConfig};

pub fn setup(n_robots: usize, seed: u64) -> SessionSetup {
    SessionSetup {
        scenario: TARGET_SEARCH.into(),
        situation: Situation::default().with(VAR_TARGET_DISTANCE, VariableValue::Number(7.0)),
        swarm: SwarmConfig {
            n_robots,
            ..SwarmConfig::default()
        },
        goal: GoalSpec::find_all("find"),
        limits: ResourceLedger::new(2000, 1e6, 1_000_000),
        seed,
        initial_posture: PostureCommand::Hold,
    }
}
