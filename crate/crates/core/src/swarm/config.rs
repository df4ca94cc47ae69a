use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PostureKind, SwarmError};

/// Virtual-force gains for one posture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostureGains {
    pub cohesion: f64,
    pub separation: f64,
    pub target: f64,
}

impl PostureGains {
    pub const fn new(cohesion: f64, separation: f64, target: f64) -> Self {
        Self {
            cohesion,
            separation,
            target,
        }
    }
}

/// Documented default gains per posture.
pub fn default_gains() -> BTreeMap<PostureKind, PostureGains> {
    BTreeMap::from([
        (PostureKind::Contract, PostureGains::new(1.0, 1.0, 0.0)),
        (PostureKind::Disperse, PostureGains::new(1.0, 1.0, 0.0)),
        (PostureKind::ExtendLimb, PostureGains::new(0.5, 1.0, 1.0)),
        (PostureKind::FollowGradient, PostureGains::new(0.0, 0.5, 1.0)),
        (PostureKind::Hold, PostureGains::new(0.0, 0.0, 0.0)),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmConfig {
    pub n_robots: usize,
    pub comm_radius: f64,
    pub sense_radius: f64,
    /// Per-hop attenuation of the fusion field, in (0,1).
    pub decay: f64,
    pub separation_distance: f64,
    pub max_speed: f64,
    /// Robots start uniformly inside this radius around the human.
    pub spawn_radius: f64,
    /// Robots mark objects they sense. Off, only the human confirms finds.
    pub robots_claim: bool,
    pub posture_gains: BTreeMap<PostureKind, PostureGains>,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            n_robots: 20,
            comm_radius: 6.0,
            sense_radius: 3.0,
            decay: 0.8,
            separation_distance: 1.0,
            max_speed: 0.8,
            spawn_radius: 2.5,
            robots_claim: false,
            posture_gains: default_gains(),
        }
    }
}

impl SwarmConfig {
    pub fn gains(&self, kind: PostureKind) -> PostureGains {
        self.posture_gains
            .get(&kind)
            .copied()
            .or_else(|| default_gains().get(&kind).copied())
            .unwrap_or(PostureGains::new(0.0, 0.0, 0.0))
    }

    /// Returns every violated invariant.
    pub fn violations(&self) -> Vec<SwarmError> {
        let mut out = Vec::new();
        if self.n_robots < 1 {
            out.push(SwarmError::Config("n_robots must be >= 1".into()));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            out.push(SwarmError::Config(format!("decay {} must lie in (0,1)", self.decay)));
        }
        if !(self.separation_distance < self.comm_radius) {
            out.push(SwarmError::Config(format!(
                "separation_distance {} must be below comm_radius {}",
                self.separation_distance, self.comm_radius
            )));
        }
        if !(self.separation_distance > 0.0) {
            out.push(SwarmError::Config("separation_distance must be positive".into()));
        }
        if !(self.sense_radius >= 0.0) {
            out.push(SwarmError::Config("sense_radius must be >= 0".into()));
        }
        if !(self.max_speed > 0.0) {
            out.push(SwarmError::Config("max_speed must be > 0".into()));
        }
        if !(self.spawn_radius >= 0.0) {
            out.push(SwarmError::Config("spawn_radius must be >= 0".into()));
        }
        out
    }

    pub fn validate(&self) -> Result<(), SwarmError> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
