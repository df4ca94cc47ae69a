//! Decentralized fusion field.
//!
//! Each robot holds a value `f` in [0,1]. One synchronous round sets
//!
//! ```text
//! f_i' = max(own strongest detection, decay * max_{j in comm range} f_j)
//! ```
//!
//! and points the robot's direction at whichever source won. A robot with
//! neither a detection nor a positive neighbor keeps `decay * f_i`, so
//! abandoned gradients fade. On a static topology the field settles at
//! `strength * decay^hops` to the best detector.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::world::{AgentId, NeighborSummary, Percept};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FusionCell {
    pub value: f64,
    /// Unit vector toward the winning source; `None` when nothing sourced
    /// the value.
    pub direction: Option<Vec2>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FusionField {
    pub cells: BTreeMap<AgentId, FusionCell>,
}

impl FusionField {
    pub fn value(&self, id: AgentId) -> f64 {
        self.cells.get(&id).map_or(0.0, |c| c.value)
    }

    pub fn values(&self) -> BTreeMap<AgentId, f64> {
        self.cells.iter().map(|(&id, c)| (id, c.value)).collect()
    }
}

fn best_neighbor<'a>(neighbors: impl Iterator<Item = (&'a NeighborSummary, f64)>) -> Option<(&'a NeighborSummary, f64)> {
    // Strict comparison keeps the lowest id on ties; neighbors arrive id-sorted.
    neighbors.fold(None, |best, (n, f)| match best {
        Some((_, bf)) if bf >= f => best,
        _ => Some((n, f)),
    })
}

fn fuse(own: f64, percept: &Percept, neighbor_value: impl Fn(&NeighborSummary) -> f64, decay: f64) -> FusionCell {
    let detection = percept.strongest_detection();
    let neighbor = best_neighbor(percept.neighbor_summaries.iter().map(|n| (n, neighbor_value(n).clamp(0.0, 1.0))));
    let relayed = neighbor.map_or(0.0, |(_, f)| decay * f);

    match (detection, neighbor) {
        (Some(d), _) if d.strength > 0.0 && d.strength >= relayed => FusionCell {
            value: d.strength.clamp(0.0, 1.0),
            direction: d.offset.normalized(),
        },
        (_, Some((n, f))) if f > 0.0 => FusionCell {
            value: relayed,
            direction: n.offset.normalized(),
        },
        _ => FusionCell {
            value: (decay * own).clamp(0.0, 1.0),
            direction: None,
        },
    }
}

/// One robot's local fusion update, reading neighbor values from its percept.
pub fn local_fusion(own: f64, percept: &Percept, decay: f64) -> FusionCell {
    fuse(own, percept, |n| n.fusion, decay)
}

/// Synchronous round over all robots in `percepts`.
///
/// Neighbor values are read from `values` (the previous global snapshot)
/// where present, otherwise from the percept; either way the update of
/// robot `i` depends only on agents inside its own percept.
pub fn update_fusion_field(
    values: &BTreeMap<AgentId, f64>,
    percepts: &BTreeMap<AgentId, Percept>,
    decay: f64,
) -> BTreeMap<AgentId, FusionCell> {
    percepts
        .iter()
        .map(|(&id, p)| {
            let own = values.get(&id).copied().unwrap_or(0.0);
            let cell = fuse(own, p, |n| values.get(&n.id).copied().unwrap_or(n.fusion), decay);
            (id, cell)
        })
        .collect()
}
