use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SwarmError;

/// Collective body posture requested by the operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PostureCommand {
    /// Cluster around the human.
    Contract,
    /// Spread out while staying connected.
    Disperse,
    /// Chain outward from the human along `bearing` (radians) up to `length` meters.
    ExtendLimb { bearing: f64, length: f64 },
    /// Move along the fusion field toward sensed objects.
    FollowGradient,
    /// Stand still.
    Hold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostureKind {
    Contract,
    Disperse,
    ExtendLimb,
    FollowGradient,
    Hold,
}

impl PostureKind {
    pub const ALL: [PostureKind; 5] = [
        PostureKind::Contract,
        PostureKind::Disperse,
        PostureKind::ExtendLimb,
        PostureKind::FollowGradient,
        PostureKind::Hold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PostureKind::Contract => "contract",
            PostureKind::Disperse => "disperse",
            PostureKind::ExtendLimb => "extend_limb",
            PostureKind::FollowGradient => "follow_gradient",
            PostureKind::Hold => "hold",
        }
    }
}

impl fmt::Display for PostureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PostureKind {
    type Err = SwarmError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PostureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SwarmError::UnknownPosture(s.into()))
    }
}

impl PostureCommand {
    pub fn kind(&self) -> PostureKind {
        match self {
            PostureCommand::Contract => PostureKind::Contract,
            PostureCommand::Disperse => PostureKind::Disperse,
            PostureCommand::ExtendLimb { .. } => PostureKind::ExtendLimb,
            PostureCommand::FollowGradient => PostureKind::FollowGradient,
            PostureCommand::Hold => PostureKind::Hold,
        }
    }

    /// Parameter-free commands by name; `extend_limb` needs its fields.
    pub fn simple(kind: PostureKind) -> Option<Self> {
        match kind {
            PostureKind::Contract => Some(PostureCommand::Contract),
            PostureKind::Disperse => Some(PostureCommand::Disperse),
            PostureKind::FollowGradient => Some(PostureCommand::FollowGradient),
            PostureKind::Hold => Some(PostureCommand::Hold),
            PostureKind::ExtendLimb => None,
        }
    }

    pub fn validate(&self, n_robots: usize, separation_distance: f64) -> Result<(), SwarmError> {
        if let PostureCommand::ExtendLimb { bearing, length } = *self {
            if !bearing.is_finite() || !length.is_finite() || length < 0.0 {
                return Err(SwarmError::InvalidCommand("extend_limb needs finite bearing and length >= 0".into()));
            }
            let max = n_robots as f64 * separation_distance;
            if length > max {
                return Err(SwarmError::InvalidCommand(format!(
                    "limb length {length} exceeds n_robots * separation_distance = {max}"
                )));
            }
        }
        Ok(())
    }
}
