//! Performance metrics and tolerated goal ranges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EvalError, ResourceLedger};
use crate::world::StateRecord;

/// Named performance function over an episode (the performance space).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Discovered / all non-decoy objects in the final state; 1 when the
    /// world holds none.
    DiscoveredFraction,
    DiscoveredCount,
    StepsUsed,
    DistanceTraveled,
    MessagesSent,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::DiscoveredFraction,
        Metric::DiscoveredCount,
        Metric::StepsUsed,
        Metric::DistanceTraveled,
        Metric::MessagesSent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::DiscoveredFraction => "discovered_fraction",
            Metric::DiscoveredCount => "discovered_count",
            Metric::StepsUsed => "steps_used",
            Metric::DistanceTraveled => "distance_traveled",
            Metric::MessagesSent => "messages_sent",
        }
    }

    /// Integer-valued metrics have a countable goal set.
    pub fn is_integral(self) -> bool {
        !matches!(self, Metric::DiscoveredFraction | Metric::DistanceTraveled)
    }

    /// Evaluates the metric over a (possibly partial) episode.
    ///
    /// `states` must be non-empty; every metric is defined for every trace.
    pub fn evaluate(self, states: &[StateRecord], spent: &ResourceLedger) -> f64 {
        let last = states.last().expect("trace holds at least the initial state");
        match self {
            Metric::DiscoveredFraction => {
                let total = last.world.target_count();
                if total == 0 {
                    1.0
                } else {
                    last.world.discovered_count() as f64 / total as f64
                }
            }
            Metric::DiscoveredCount => last.world.discovered_count() as f64,
            Metric::StepsUsed => spent.steps as f64,
            Metric::DistanceTraveled => spent.distance,
            Metric::MessagesSent => spent.messages as f64,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| EvalError::UnknownMetric(s.into()))
    }
}

/// Closed interval `[lo, hi]` of tolerated metric values (the goal set).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleratedRange {
    pub lo: f64,
    pub hi: f64,
}

impl ToleratedRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, EvalError> {
        if lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(EvalError::InvertedGoalRange { lo, hi })
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_range(&self, other: &ToleratedRange) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GoalSize {
    /// Number of admissible integer metric values.
    Count(u64),
    /// Width of the tolerated interval.
    Measure(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    pub id: String,
    pub metric: Metric,
    pub tolerated: ToleratedRange,
}

impl GoalSpec {
    pub fn new(id: &str, metric: Metric, lo: f64, hi: f64) -> Result<Self, EvalError> {
        Ok(Self {
            id: id.into(),
            metric,
            tolerated: ToleratedRange::new(lo, hi)?,
        })
    }

    /// All objects discovered.
    pub fn find_all(id: &str) -> Self {
        Self {
            id: id.into(),
            metric: Metric::DiscoveredFraction,
            tolerated: ToleratedRange { lo: 1.0, hi: 1.0 },
        }
    }

    pub fn value(&self, states: &[StateRecord], spent: &ResourceLedger) -> f64 {
        self.metric.evaluate(states, spent)
    }

    pub fn is_met(&self, states: &[StateRecord], spent: &ResourceLedger) -> bool {
        self.tolerated.contains(self.value(states, spent))
    }

    /// |G|.
    pub fn size(&self) -> GoalSize {
        let ToleratedRange { lo, hi } = self.tolerated;
        if self.metric.is_integral() {
            let first = lo.max(0.0).ceil();
            let last = hi.floor();
            GoalSize::Count(if last >= first { (last - first) as u64 + 1 } else { 0 })
        } else {
            GoalSize::Measure(hi - lo)
        }
    }
}
