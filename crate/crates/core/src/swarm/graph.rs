use std::collections::{BTreeMap, VecDeque};

use crate::world::{AgentBody, AgentId};

/// Undirected communication graph; edge iff distance <= comm radius.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommGraph {
    pub adjacency: BTreeMap<AgentId, Vec<AgentId>>,
}

pub fn communication_graph(bodies: &[AgentBody], comm_radius: f64) -> CommGraph {
    let mut adjacency: BTreeMap<AgentId, Vec<AgentId>> = bodies.iter().map(|b| (b.id, Vec::new())).collect();
    for (i, a) in bodies.iter().enumerate() {
        for b in &bodies[i + 1..] {
            if a.position.distance(b.position) <= comm_radius {
                adjacency.entry(a.id).or_default().push(b.id);
                adjacency.entry(b.id).or_default().push(a.id);
            }
        }
    }
    for list in adjacency.values_mut() {
        list.sort();
    }
    CommGraph { adjacency }
}

impl CommGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: AgentId, b: AgentId) -> bool {
        self.adjacency.get(&a).is_some_and(|l| l.binary_search(&b).is_ok())
    }

    /// Hop counts from `source` to every reachable node.
    pub fn hops_from(&self, source: AgentId) -> BTreeMap<AgentId, u32> {
        let mut dist = BTreeMap::from([(source, 0u32)]);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for &v in self.adjacency.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest finite hop distance between any two nodes.
    pub fn diameter(&self) -> u32 {
        self.adjacency
            .keys()
            .map(|&s| self.hops_from(s).into_values().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}
