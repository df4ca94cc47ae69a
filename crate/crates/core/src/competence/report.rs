//! Effectiveness, efficiency and competence estimates.

use serde::{Deserialize, Serialize};

use super::{normalize_resources, EvalError, GoalSpec, ResourceLedger};
use crate::world::{EpisodeTrace, Outcome};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn scaled(self, k: f64) -> Interval {
        Interval {
            lo: self.lo * k,
            hi: self.hi * k,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    // The bounds at 0 and n successes are exactly 0 and 1; avoid rounding dust.
    Interval {
        lo: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
        hi: if successes == n { 1.0 } else { (center + half).min(1.0) },
    }
}

/// Per-episode evidence retained after a trace is discarded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub outcome: Outcome,
    pub metric_value: f64,
    /// Metric value inside the tolerated range.
    pub success: bool,
    pub resources_spent: ResourceLedger,
}

impl EpisodeSummary {
    pub fn from_trace(trace: &EpisodeTrace, goal: &GoalSpec) -> Self {
        let metric_value = trace.metric_value(goal.metric);
        Self {
            seed: trace.seed,
            outcome: trace.outcome.clone(),
            metric_value,
            success: goal.tolerated.contains(metric_value),
            resources_spent: trace.resources_spent,
        }
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self.outcome, Outcome::Aborted { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Effectiveness {
    pub p_hat: f64,
    pub ci: Interval,
    pub successes: u64,
    pub n: u64,
}

/// Fraction of episodes whose metric lands in the tolerated range, with a
/// 95% Wilson interval.
pub fn estimate_effectiveness(traces: &[EpisodeTrace], goal: &GoalSpec) -> Result<Effectiveness, EvalError> {
    let successes = traces
        .iter()
        .filter(|t| goal.tolerated.contains(t.metric_value(goal.metric)))
        .count() as u64;
    effectiveness_from_counts(successes, traces.len() as u64)
}

pub fn effectiveness_from_counts(successes: u64, n: u64) -> Result<Effectiveness, EvalError> {
    if n == 0 {
        return Err(EvalError::EmptyTraceSet);
    }
    Ok(Effectiveness {
        p_hat: successes as f64 / n as f64,
        ci: wilson_interval(successes, n, Z_95),
        successes,
        n,
    })
}

/// Decision-making competence `c = r * p`.
pub fn competence(p_hat: f64, r: f64) -> Result<f64, EvalError> {
    for (name, x) in [("p_hat", p_hat), ("r", r)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(EvalError::OutOfRange { name, value: x });
        }
    }
    Ok(r * p_hat)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompetenceReport {
    pub space_id: String,
    pub goal_id: String,
    pub policy_id: String,
    pub n: u64,
    pub successes: u64,
    pub aborted: u64,
    pub p_hat: f64,
    /// 95% Wilson interval on `p_hat`.
    pub ci: Interval,
    /// Mean efficiency over successful episodes; 0 when there are none.
    pub r: f64,
    pub c_hat: f64,
    /// `ci` scaled by `r`.
    pub c_ci: Interval,
}

impl CompetenceReport {
    pub fn from_summaries(
        summaries: &[EpisodeSummary],
        limits: &ResourceLedger,
        space_id: &str,
        goal_id: &str,
        policy_id: &str,
    ) -> Result<Self, EvalError> {
        let n = summaries.len() as u64;
        let successes = summaries.iter().filter(|s| s.success).count() as u64;
        let eff = effectiveness_from_counts(successes, n)?;
        let mut r_sum = 0.0;
        for s in summaries.iter().filter(|s| s.success) {
            r_sum += normalize_resources(&s.resources_spent, limits)?;
        }
        let r = if successes == 0 { 0.0 } else { (r_sum / successes as f64).clamp(0.0, 1.0) };
        let c_hat = competence(eff.p_hat, r)?;
        Ok(Self {
            space_id: space_id.into(),
            goal_id: goal_id.into(),
            policy_id: policy_id.into(),
            n,
            successes,
            aborted: summaries.iter().filter(|s| s.is_aborted()).count() as u64,
            p_hat: eff.p_hat,
            ci: eff.ci,
            r,
            c_hat,
            c_ci: eff.ci.scaled(r),
        })
    }

    pub fn from_traces(
        traces: &[EpisodeTrace],
        goal: &GoalSpec,
        limits: &ResourceLedger,
        space_id: &str,
        policy_id: &str,
    ) -> Result<Self, EvalError> {
        let summaries: Vec<_> = traces.iter().map(|t| EpisodeSummary::from_trace(t, goal)).collect();
        Self::from_summaries(&summaries, limits, space_id, &goal.id, policy_id)
    }
}
