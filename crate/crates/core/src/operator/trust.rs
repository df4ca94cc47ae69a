//! Supervisory control with trust calibration.
//!
//! The supervisor deploys the AI in a situation bucket when its believed
//! competence there reaches the deploy threshold. Outcomes are tagged
//! against the true competence: deploying where the AI is below threshold
//! is misuse (overtrust), withholding where it is above is disuse.
//! True competence is available only inside the simulation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OperatorError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustBucket {
    pub lo: f64,
    pub hi: f64,
    pub believed: f64,
}

/// Believed AI competence per bucket of one situation axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrustModel {
    pub axis: String,
    /// Contiguous, ascending; the last bucket includes its upper bound.
    pub buckets: Vec<TrustBucket>,
    pub deploy_threshold: f64,
}

impl TrustModel {
    pub fn validate(&self) -> Result<(), OperatorError> {
        let bad = |m: String| Err(OperatorError::InvalidTrust(m));
        if self.buckets.is_empty() {
            return bad("no buckets".into());
        }
        if !(0.0..=1.0).contains(&self.deploy_threshold) {
            return bad(format!("deploy_threshold {} outside [0,1]", self.deploy_threshold));
        }
        for (i, b) in self.buckets.iter().enumerate() {
            if !(b.lo < b.hi) {
                return bad(format!("bucket {i} is empty"));
            }
            if !(0.0..=1.0).contains(&b.believed) {
                return bad(format!("bucket {i} believed competence outside [0,1]"));
            }
        }
        for (i, w) in self.buckets.windows(2).enumerate() {
            if w[0].hi != w[1].lo {
                return bad(format!("buckets {i} and {} do not share a boundary", i + 1));
            }
        }
        Ok(())
    }

    pub fn bucket_of(&self, value: f64) -> Option<usize> {
        let last = self.buckets.len().checked_sub(1)?;
        self.buckets
            .iter()
            .position(|b| value >= b.lo && value < b.hi)
            .or_else(|| (value == self.buckets[last].hi).then_some(last))
    }

    /// Same partition with every believed value replaced.
    pub fn with_beliefs(&self, believed: impl Fn(usize) -> f64) -> TrustModel {
        TrustModel {
            buckets: self
                .buckets
                .iter()
                .enumerate()
                .map(|(i, b)| TrustBucket {
                    believed: believed(i),
                    ..b.clone()
                })
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTag {
    Calibrated,
    Misuse,
    Disuse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupervisoryDecision {
    Deploy { ai: String, parameters: BTreeMap<String, f64> },
    Withhold { ai: String },
    Reparameterize { ai: String, parameters: BTreeMap<String, f64> },
}

impl SupervisoryDecision {
    pub fn deploys(&self) -> bool {
        !matches!(self, SupervisoryDecision::Withhold { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupervisoryAction {
    pub decision: SupervisoryDecision,
    pub calibration: CalibrationTag,
}

/// Name under which the swarm appears in supervisory actions.
pub const SWARM_AI: &str = "swarm";

/// One supervisory decision for `bucket`, tagged against `true_competence`.
pub fn supervisory_step(trust: &TrustModel, bucket: usize, true_competence: f64) -> Result<SupervisoryAction, OperatorError> {
    let believed = trust
        .buckets
        .get(bucket)
        .ok_or(OperatorError::UnknownBucket(bucket))?
        .believed;
    let threshold = trust.deploy_threshold;
    let deploy = believed >= threshold;
    let fits = true_competence >= threshold;
    let calibration = match (deploy, fits) {
        (true, false) => CalibrationTag::Misuse,
        (false, true) => CalibrationTag::Disuse,
        _ => CalibrationTag::Calibrated,
    };
    let decision = if deploy {
        SupervisoryDecision::Deploy {
            ai: SWARM_AI.into(),
            parameters: BTreeMap::new(),
        }
    } else {
        SupervisoryDecision::Withhold { ai: SWARM_AI.into() }
    };
    Ok(SupervisoryAction { decision, calibration })
}
