use serde::{Deserialize, Serialize};

use super::{CompetenceReport, EvalError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Joint,
    Disjoint,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointnessVerdict {
    pub c_nat: CompetenceReport,
    pub c_arti: CompetenceReport,
    pub c_joint: CompetenceReport,
    pub verdict: Verdict,
}

/// Decides whether the joint allocation beats both isolated ones.
///
/// `Joint` needs the joint competence interval to sit strictly above both
/// other intervals. `Disjoint` means the joint upper bound does not exceed
/// the better isolated lower bound. Anything else is `Inconclusive`.
pub fn compare_allocations(
    nat: &CompetenceReport,
    arti: &CompetenceReport,
    joint: &CompetenceReport,
) -> Result<JointnessVerdict, EvalError> {
    for other in [nat, arti] {
        if other.space_id != joint.space_id || other.goal_id != joint.goal_id {
            return Err(EvalError::MismatchedSpace {
                expected: format!("{}/{}", joint.space_id, joint.goal_id),
                found: format!("{}/{}", other.space_id, other.goal_id),
            });
        }
    }
    let lo = joint.c_ci.lo;
    let hi = joint.c_ci.hi;
    let verdict = if lo > nat.c_ci.hi && lo > arti.c_ci.hi {
        Verdict::Joint
    } else if hi <= nat.c_ci.lo.max(arti.c_ci.lo) {
        Verdict::Disjoint
    } else {
        Verdict::Inconclusive
    };
    Ok(JointnessVerdict {
        c_nat: nat.clone(),
        c_arti: arti.clone(),
        c_joint: joint.clone(),
        verdict,
    })
}
