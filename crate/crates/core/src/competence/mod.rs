//! Decision-making competence: situation spaces, goal sets, effectiveness
//! and efficiency estimation, allocation verdicts and brittleness sweeps.
//!
//! Competence is the product `c = r * p` of the probability `p` of ending an
//! episode inside the tolerated goal range (averaged over sampled
//! situations) and a resource score `r` in [0,1].

mod brittleness;
mod goal;
mod report;
mod resources;
mod space;
mod verdict;

use thiserror::Error;

pub use brittleness::{
    axis_values, brittleness_sweep, find_cliffs, BrittlenessCell, BrittlenessMap, Cliff, SweepSpec,
    DEFAULT_CLIFF_THRESHOLD, MIN_PER_CELL,
};
pub use goal::{GoalSize, GoalSpec, Metric, ToleratedRange};
pub use report::{
    competence, effectiveness_from_counts, estimate_effectiveness, wilson_interval, CompetenceReport, Effectiveness,
    EpisodeSummary, Interval, Z_95,
};
pub use resources::{normalize_resources, ResourceLedger};
pub use space::{
    sample_situations, sample_with_pinned, Sampler, Situation, SituationSpace, SpaceSize, Variable, VariableRange,
    VariableValue,
};
pub use verdict::{compare_allocations, JointnessVerdict, Verdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("situation space has no variables")]
    NoVariables,
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("variable `{0}` has an empty range")]
    EmptyRange(String),
    #[error("sample count must be at least 1")]
    ZeroCount,
    #[error("grid needs at least {minimum} samples for one full cross product, got {requested}")]
    GridTooCoarse { requested: usize, minimum: usize },
    #[error("no traces to estimate from")]
    EmptyTraceSet,
    #[error("resource limit `{0}` must be positive")]
    ZeroLimit(&'static str),
    #[error("{name} = {value} outside [0,1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("reports built on different spaces: expected {expected}, found {found}")]
    MismatchedSpace { expected: String, found: String },
    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),
    #[error("need at least {minimum} episodes per cell, got {requested}")]
    TooFewEpisodes { requested: usize, minimum: usize },
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("goal range inverted: [{lo}, {hi}]")]
    InvertedGoalRange { lo: f64, hi: f64 },
}
