use serde::{Deserialize, Serialize};

use super::EvalError;

/// Resources spent by an episode, or the budget limits in the same shape.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceLedger {
    pub steps: u64,
    /// Total distance traveled by all agents (m).
    pub distance: f64,
    pub messages: u64,
}

impl ResourceLedger {
    pub fn new(steps: u64, distance: f64, messages: u64) -> Self {
        Self { steps, distance, messages }
    }

    /// Component-wise `self <= limits`.
    pub fn within(&self, limits: &ResourceLedger) -> bool {
        self.steps <= limits.steps && self.distance <= limits.distance && self.messages <= limits.messages
    }
}

/// Efficiency score `r` in [0,1]: one minus the largest spent/limit ratio.
///
/// Zero spending gives 1 and exhausting any single budget gives 0.
pub fn normalize_resources(spent: &ResourceLedger, limits: &ResourceLedger) -> Result<f64, EvalError> {
    if limits.steps == 0 {
        return Err(EvalError::ZeroLimit("steps"));
    }
    if !(limits.distance > 0.0) {
        return Err(EvalError::ZeroLimit("distance"));
    }
    if limits.messages == 0 {
        return Err(EvalError::ZeroLimit("messages"));
    }
    let worst = [
        spent.steps as f64 / limits.steps as f64,
        spent.distance / limits.distance,
        spent.messages as f64 / limits.messages as f64,
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    Ok((1.0 - worst).clamp(0.0, 1.0))
}
